//! Grid checks of the finite-budget identities and the optimal-hop solvers.
//!
//! These are the same properties the test suites assert, packaged so the CLI
//! can run them and report worst-case residuals.

use serde::Serialize;

use crate::analytic::{
    alpha3_discriminant, alpha3_single_real_root_predicted, alpha3_trig_roots, first_order_condition,
    optimal_success_forms, solve_mstar, stationarity_polynomial, success_at, SolveMode,
};
use crate::finite::{budget_gap, identity_residuals_with, PascalModel};
use crate::model::NetworkParams;

/// Absolute tolerance for the binomial identities.
pub const IDENTITY_TOL: f64 = 1e-12;
/// Relative tolerance between closed-form and numeric optimal hop counts.
pub const ROOT_AGREEMENT_TOL: f64 = 1e-9;
/// Scaled residual tolerance for the stationarity polynomial.
pub const ROOT_RESIDUAL_TOL: f64 = 1e-9;
/// Absolute tolerance for the two optimal success probability forms.
pub const FORM_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Serialize)]
pub struct Worst {
    pub value: f64,
    pub at: String,
}

impl Worst {
    fn new() -> Self {
        Worst {
            value: 0.0,
            at: String::new(),
        }
    }

    fn track(&mut self, value: f64, at: impl FnOnce() -> String) {
        if value.abs() > self.value || value.is_nan() {
            self.value = if value.is_nan() { f64::INFINITY } else { value.abs() };
            self.at = at();
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct IdentityReport {
    pub points: usize,
    pub min_gap: f64,
    pub min_gap_at: String,
    pub tail_sum: Worst,
    pub last_trial: Worst,
    pub adjacent_mass: Worst,
    pub delta: Worst,
    pub expectation_routes: Worst,
    pub violations: Vec<String>,
}

impl IdentityReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// `p` grid `0.05, 0.10, ..., 0.95`.
pub fn default_p_grid() -> Vec<f64> {
    (1..=19).map(|i| i as f64 * 0.05).collect()
}

/// Checks `f(M) >= 0` and the binomial identities for all `A <= max_a`,
/// `M <= A`, `p` in `ps`. A non-zero `perturb` shifts `p` on the right-hand
/// sides (negative control).
pub fn identity_grid(max_a: u64, ps: &[f64], perturb: f64) -> IdentityReport {
    let mut report = IdentityReport {
        points: 0,
        min_gap: f64::INFINITY,
        min_gap_at: String::new(),
        tail_sum: Worst::new(),
        last_trial: Worst::new(),
        adjacent_mass: Worst::new(),
        delta: Worst::new(),
        expectation_routes: Worst::new(),
        violations: Vec::new(),
    };
    for a in 1..=max_a {
        for m in 0..=a {
            for &p in ps {
                report.points += 1;
                let q = (p + perturb).clamp(0.0, 1.0);
                let here = || format!("A={a} M={m} p={p}");
                let gap = if perturb == 0.0 {
                    budget_gap(&PascalModel::new(m, p, a))
                } else {
                    // gap with the expectation taken at the shifted probability
                    p * crate::finite::expected_attempts_capped(&PascalModel::new(m, q, a))
                        - m as f64 * crate::finite::prob_delivery(&PascalModel::new(m, p, a))
                };
                if gap < report.min_gap {
                    report.min_gap = gap;
                    report.min_gap_at = here();
                }
                if gap < -IDENTITY_TOL {
                    report.violations.push(format!("gap f(M) = {gap:e} < 0 at {}", here()));
                }
                let r = identity_residuals_with(a, m, p, q);
                for (name, value, worst) in [
                    ("tail-sum", r.tail_sum, &mut report.tail_sum),
                    ("last-trial", r.last_trial, &mut report.last_trial),
                    ("adjacent-mass", r.adjacent_mass, &mut report.adjacent_mass),
                    ("gap-increment", r.delta, &mut report.delta),
                    (
                        "expectation-routes",
                        r.expectation_routes,
                        &mut report.expectation_routes,
                    ),
                ] {
                    worst.track(value, here);
                    if !(value.abs() <= IDENTITY_TOL) {
                        report
                            .violations
                            .push(format!("{name} residual {value:e} at {}", here()));
                    }
                }
            }
        }
    }
    report
}

#[derive(Debug, Clone, Serialize)]
pub struct SolverReport {
    pub points: usize,
    pub single_real_root_cases: usize,
    pub three_real_root_cases: usize,
    pub root_residual: Worst,
    pub first_order: Worst,
    pub closed_vs_numeric: Worst,
    pub form_agreement: Worst,
    pub vieta: Worst,
    pub violations: Vec<String>,
}

impl SolverReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

pub struct SolverGrid {
    pub lambdas: Vec<f64>,
    pub snrs: Vec<f64>,
    pub betas: Vec<f64>,
    pub alphas: Vec<f64>,
    pub radii: Vec<f64>,
}

impl Default for SolverGrid {
    fn default() -> Self {
        SolverGrid {
            lambdas: (-3..=3).map(|e| 10f64.powi(e)).collect(),
            snrs: vec![1.0, 10.0, 100.0, f64::INFINITY],
            betas: vec![1.0, 3.0, 10.0],
            alphas: vec![2.5, 3.0, 3.5, 4.0, 5.0, 6.0],
            radii: vec![0.5, 1.0, 2.0],
        }
    }
}

pub fn solver_grid(grid: &SolverGrid) -> SolverReport {
    let mut report = SolverReport {
        points: 0,
        single_real_root_cases: 0,
        three_real_root_cases: 0,
        root_residual: Worst::new(),
        first_order: Worst::new(),
        closed_vs_numeric: Worst::new(),
        form_agreement: Worst::new(),
        vieta: Worst::new(),
        violations: Vec::new(),
    };
    for &alpha in &grid.alphas {
        for &lambda in &grid.lambdas {
            for &snr in &grid.snrs {
                for &beta in &grid.betas {
                    for &big_r in &grid.radii {
                        let here = || format!("alpha={alpha} lambda={lambda} snr={snr} beta={beta} R={big_r}");
                        let params = match NetworkParams::with_snr(lambda, alpha, beta, big_r, 1.0, snr) {
                            Ok(p) => p,
                            Err(e) => {
                                report.violations.push(format!("{e} at {}", here()));
                                continue;
                            }
                        };
                        report.points += 1;
                        check_point(&params, &mut report, &here);
                    }
                }
            }
        }
    }
    report
}

fn check_point(params: &NetworkParams, report: &mut SolverReport, here: &dyn Fn() -> String) {
    let alpha = params.alpha();
    let d = params.derive();
    let sol = match solve_mstar(params, SolveMode::Auto) {
        Ok(s) => s,
        Err(e) => {
            report.violations.push(format!("{e} at {}", here()));
            return;
        }
    };
    let m = sol.m_star_continuous;

    let residual = stationarity_polynomial(alpha, d.k1, d.k2, m) / m.powf(alpha).max(1.0);
    report.root_residual.track(residual, here);
    if !(residual.abs() <= ROOT_RESIDUAL_TOL) {
        report
            .violations
            .push(format!("root residual {residual:e} at {}", here()));
    }
    let foc = first_order_condition(alpha, d.k1, d.k2, m);
    report.first_order.track(foc, here);
    if !(foc.abs() <= ROOT_RESIDUAL_TOL) {
        report
            .violations
            .push(format!("first-order condition {foc:e} at {}", here()));
    }

    if alpha == 3.0 || alpha == 4.0 {
        match solve_mstar(params, SolveMode::ForceNumeric) {
            Ok(n) => {
                let rel = (m - n.m_star_continuous) / n.m_star_continuous;
                report.closed_vs_numeric.track(rel, here);
                if !(rel.abs() <= ROOT_AGREEMENT_TOL) {
                    report
                        .violations
                        .push(format!("closed vs numeric {rel:e} at {}", here()));
                }
            }
            Err(e) => report.violations.push(format!("{e} at {}", here())),
        }
    }

    if alpha == 3.0 {
        let disc = alpha3_discriminant(d.k1, d.k2);
        let predicted = alpha3_single_real_root_predicted(params);
        if predicted != (disc >= 0.0) {
            report.violations.push(format!(
                "regime prediction {predicted} disagrees with discriminant {disc:e} at {}",
                here()
            ));
        }
        if disc >= 0.0 {
            report.single_real_root_cases += 1;
        } else {
            report.three_real_root_cases += 1;
            let [y1, y2, y3] = alpha3_trig_roots(d.k1, d.k2);
            let scale = (3.0 * d.k1).abs().max(2.0 * d.k2).max(1e-300);
            let prod = (y1 * y2 * y3 - 3.0 * d.k1) / scale;
            let pairs = (y1 * y2 + y1 * y3 + y2 * y3 + 2.0 * d.k2) / scale;
            let positives = [y1, y2, y3].iter().filter(|y| **y > 0.0).count();
            report.vieta.track(prod.abs().max(pairs.abs()), here);
            if prod.abs() > 1e-9 || pairs.abs() > 1e-9 || positives != 1 {
                report.violations.push(format!(
                    "Vieta check failed ({prod:e}, {pairs:e}, {positives} positive) at {}",
                    here()
                ));
            }
        }
    }

    let forms = optimal_success_forms(params, m);
    let direct = success_at(params, m);
    let spread = (forms.interference_form - direct)
        .abs()
        .max((forms.noise_form - direct).abs())
        .max((forms.interference_form - forms.noise_form).abs());
    report.form_agreement.track(spread, here);
    if !(spread <= FORM_TOL) {
        report
            .violations
            .push(format!("success forms disagree by {spread:e} at {}", here()));
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identities_hold_on_small_grid() {
        let r = identity_grid(12, &default_p_grid(), 0.0);
        assert!(r.passed(), "{:?}", &r.violations[..r.violations.len().min(5)]);
        assert!(r.min_gap >= -IDENTITY_TOL);
    }

    #[test]
    fn perturbation_is_detected() {
        let r = identity_grid(6, &default_p_grid(), 1e-3);
        assert!(!r.passed());
    }

    #[test]
    fn solver_grid_passes() {
        let r = solver_grid(&SolverGrid::default());
        assert!(r.passed(), "{:?}", &r.violations[..r.violations.len().min(5)]);
        assert!(r.single_real_root_cases > 0 && r.three_real_root_cases > 0);
    }
}
