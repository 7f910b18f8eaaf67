//! Closed-form upper bound on random access transport capacity.
//!
//! With `M` equidistant hops and an unlimited attempt budget, each hop
//! succeeds with probability `p_s(M) = exp(-k1 M^-alpha - k2 M^-2)` and the
//! capacity bound is `lambda log(1+beta) R p_s(M) / M`. The maximizing hop
//! count solves `M^alpha - 2 k2 M^(alpha-2) - alpha k1 = 0`, which has exactly
//! one positive root: divided by `M^(alpha-2)` the left side is strictly
//! increasing in `M`.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{kappa_alpha, DerivedConstants, NetworkParams, RateLogBase};

/// Maximum allowed disagreement between the two optimal success probability forms.
pub const FORM_AGREEMENT_TOL: f64 = 1e-10;

fn success_exponent(alpha: f64, k1: f64, k2: f64, m: f64) -> f64 {
    -k1 * m.powf(-alpha) - k2 / (m * m)
}

/// `p_s(M)` without the `M >= 1` precondition. The continuous optimum can sit
/// below one hop for weak interference and strong signal.
pub fn success_at(params: &NetworkParams, m: f64) -> f64 {
    let d = params.derive();
    success_exponent(params.alpha(), d.k1, d.k2, m).exp()
}

/// Single transmission over the whole distance `R`.
pub fn single_hop_success(params: &NetworkParams) -> f64 {
    let d = params.derive();
    (-d.k1 - d.k2).exp()
}

/// Per-hop success with `m` equidistant hops.
pub fn per_hop_success(params: &NetworkParams, m: f64) -> Result<f64> {
    check_hops(m)?;
    Ok(success_at(params, m))
}

fn check_hops(m: f64) -> Result<()> {
    if !(m >= 1.0) || !m.is_finite() {
        return Err(Error::Domain(format!("hop count must be a finite value >= 1, got {m}")));
    }
    Ok(())
}

fn prefactor(params: &NetworkParams) -> f64 {
    params.lambda() * params.spectral_efficiency() * params.big_r()
}

pub fn single_hop_capacity(params: &NetworkParams) -> f64 {
    prefactor(params) * single_hop_success(params)
}

/// Capacity bound evaluated at a fixed hop count.
pub fn cub_at(params: &NetworkParams, m: f64) -> Result<f64> {
    Ok(prefactor(params) * per_hop_success(params, m)? / m)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HopPlan {
    pub m: f64,
    pub hop_distance: f64,
    pub p_s: f64,
    pub expected_attempts_per_hop: f64,
}

pub fn hop_plan(params: &NetworkParams, m: f64) -> Result<HopPlan> {
    let p_s = per_hop_success(params, m)?;
    Ok(HopPlan {
        m,
        hop_distance: params.big_r() / m,
        p_s,
        expected_attempts_per_hop: 1.0 / p_s,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SolveMode {
    /// Closed forms for `alpha` in {3, 4}, bracketed root finding otherwise.
    #[default]
    Auto,
    ForceNumeric,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MStarMethod {
    ClosedFormAlpha3Cardano,
    ClosedFormAlpha3Trig,
    ClosedFormAlpha4,
    Numeric,
}

impl MStarMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            MStarMethod::ClosedFormAlpha3Cardano => "closed_form_alpha3_cardano",
            MStarMethod::ClosedFormAlpha3Trig => "closed_form_alpha3_trig",
            MStarMethod::ClosedFormAlpha4 => "closed_form_alpha4",
            MStarMethod::Numeric => "numeric",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MStarSolution {
    pub m_star_continuous: f64,
    pub m_star_integer: u64,
    pub method: MStarMethod,
    /// `9 k1^2 / 4 - 8 k2^3 / 27`, only for `alpha = 3`.
    pub discriminant: Option<f64>,
}

/// `M^alpha - 2 k2 M^(alpha-2) - alpha k1`.
pub fn stationarity_polynomial(alpha: f64, k1: f64, k2: f64, m: f64) -> f64 {
    m.powf(alpha) - 2.0 * k2 * m.powf(alpha - 2.0) - alpha * k1
}

/// `1 - alpha k1 M^-alpha - 2 k2 M^-2`; zero at the optimum.
pub fn first_order_condition(alpha: f64, k1: f64, k2: f64, m: f64) -> f64 {
    1.0 - alpha * k1 * m.powf(-alpha) - 2.0 * k2 / (m * m)
}

pub fn alpha3_discriminant(k1: f64, k2: f64) -> f64 {
    9.0 * k1 * k1 / 4.0 - 8.0 * k2 * k2 * k2 / 27.0
}

/// Whether the cubic has a single real root (`D >= 0`), predicted from the
/// density/power condition alone: `lambda <= (eta/rho)^(2/3) (3/2)^(5/3) / K_3`.
pub fn alpha3_single_real_root_predicted(params: &NetworkParams) -> bool {
    let k3 = kappa_alpha(3.0).expect("alpha = 3 is valid");
    let bound = (params.eta() / params.rho()).powf(2.0 / 3.0) * 1.5f64.powf(5.0 / 3.0) / k3;
    params.lambda() <= bound
}

/// Positive root of `M^3 - 2 k2 M - 3 k1` when `D >= 0`.
///
/// Written as `C + 2k2 / (3C)` with `C = cbrt(3k1/2 + sqrt(D))`; the second
/// cube root of the textbook form equals `2k2 / (3C)` and would otherwise
/// cancel badly when `k2` is small.
pub fn alpha3_cardano(k1: f64, k2: f64) -> f64 {
    let d = alpha3_discriminant(k1, k2).max(0.0);
    let c = (1.5 * k1 + d.sqrt()).cbrt();
    if c == 0.0 {
        return 0.0;
    }
    c + 2.0 * k2 / (3.0 * c)
}

/// The three real roots of `M^3 - 2 k2 M - 3 k1` when `D < 0`, largest first.
pub fn alpha3_trig_roots(k1: f64, k2: f64) -> [f64; 3] {
    let amp = 2.0 * (2.0 * k2 / 3.0).sqrt();
    let x = (9.0 * k1 / (4.0 * k2)) * (3.0 / (2.0 * k2)).sqrt();
    let phi = x.clamp(-1.0, 1.0).acos();
    [
        amp * (phi / 3.0).cos(),
        amp * (phi / 3.0 + 4.0 * PI / 3.0).cos(),
        amp * (phi / 3.0 + 2.0 * PI / 3.0).cos(),
    ]
}

pub fn alpha3_trig(k1: f64, k2: f64) -> f64 {
    alpha3_trig_roots(k1, k2)[0]
}

/// Trigonometric root expression with a `3^(1/6)` prefactor divisor and a
/// `3 sqrt(3) eta / (4 sqrt(2 rho) (lambda K_3)^(3/2))` arccos argument, a
/// form that circulates for the `alpha = 3` optimum. It does not solve the
/// stationarity cubic in general; it is evaluated only so reports can show
/// how far it is from the true root. `None` outside `alpha = 3`, `D < 0`.
pub fn alpha3_trig_printed_variant(params: &NetworkParams) -> Option<f64> {
    if params.alpha() != 3.0 {
        return None;
    }
    let d = params.derive();
    if alpha3_discriminant(d.k1, d.k2) >= 0.0 {
        return None;
    }
    let lk = params.lambda() * d.k_alpha;
    let arg = 3.0 * 3f64.sqrt() * params.eta() / (4.0 * (2.0 * params.rho()).sqrt() * lk.powf(1.5));
    if arg.abs() > 1.0 {
        return None;
    }
    Some(
        2.0 * (2.0 * lk).sqrt() / 3f64.powf(1.0 / 6.0)
            * params.beta().cbrt()
            * params.big_r()
            * (arg.acos() / 3.0).cos(),
    )
}

/// Positive root of `M^4 - 2 k2 M^2 - 4 k1`.
pub fn alpha4_closed_form(k1: f64, k2: f64) -> f64 {
    (k2 + (k2 * k2 + 4.0 * k1).sqrt()).sqrt()
}

/// Largest positive root of the stationarity polynomial by bisection on the
/// first-order condition, which is monotone in `M`.
pub fn numeric_root(alpha: f64, k1: f64, k2: f64) -> Result<f64> {
    if k1 == 0.0 && k2 == 0.0 {
        return Err(Error::Degenerate);
    }
    let foc = |m: f64| first_order_condition(alpha, k1, k2, m);
    let mut lo = 1e-6;
    let mut hi = (2.0 * (2.0 * k2).sqrt())
        .max(2.0 * (alpha * k1).powf(1.0 / alpha))
        .max(1.0)
        * 10.0;
    while foc(lo) >= 0.0 {
        lo *= 1e-3;
        if lo < 1e-300 {
            return Err(Error::Domain("root lies below the representable range".into()));
        }
    }
    while foc(hi) <= 0.0 {
        hi *= 2.0;
        if !hi.is_finite() {
            return Err(Error::Domain("root lies beyond the representable range".into()));
        }
    }
    for _ in 0..2000 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if foc(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo <= 1e-15 * hi {
            break;
        }
    }
    // the endpoint with the smaller residual
    Ok(if foc(lo).abs() <= foc(hi).abs() { lo } else { hi })
}

/// Solves for the optimal hop count from the raw constants.
pub fn solve_mstar_constants(alpha: f64, k1: f64, k2: f64, mode: SolveMode) -> Result<(f64, MStarMethod, Option<f64>)> {
    if !(alpha > 2.0) {
        return Err(Error::Domain(format!("alpha must exceed 2, got {alpha}")));
    }
    if k1 == 0.0 && k2 == 0.0 {
        return Err(Error::Degenerate);
    }
    let discriminant = (alpha == 3.0).then(|| alpha3_discriminant(k1, k2));
    let (m, method) = match (mode, discriminant) {
        (SolveMode::Auto, Some(d)) if d >= 0.0 => (alpha3_cardano(k1, k2), MStarMethod::ClosedFormAlpha3Cardano),
        (SolveMode::Auto, Some(_)) => (alpha3_trig(k1, k2), MStarMethod::ClosedFormAlpha3Trig),
        (SolveMode::Auto, None) if alpha == 4.0 => (alpha4_closed_form(k1, k2), MStarMethod::ClosedFormAlpha4),
        _ => (numeric_root(alpha, k1, k2)?, MStarMethod::Numeric),
    };
    Ok((m, method, discriminant))
}

pub fn solve_mstar(params: &NetworkParams, mode: SolveMode) -> Result<MStarSolution> {
    let d = params.derive();
    let (m, method, discriminant) = solve_mstar_constants(params.alpha(), d.k1, d.k2, mode)?;
    Ok(MStarSolution {
        m_star_continuous: m,
        m_star_integer: integer_argmax(params.alpha(), &d, m, None),
        method,
        discriminant,
    })
}

fn integer_argmax(alpha: f64, d: &DerivedConstants, continuous: f64, cap: Option<u64>) -> u64 {
    let cap = cap.unwrap_or(u64::MAX).max(1);
    let floor = (continuous.floor() as u64).max(1);
    let ceil = (continuous.ceil() as u64).max(1);
    let objective = |m: u64| {
        let m = m as f64;
        success_exponent(alpha, d.k1, d.k2, m).exp() / m
    };
    let mut best = 1;
    let mut best_val = objective(1);
    for m in [floor.min(cap), ceil.min(cap)] {
        let v = objective(m);
        if v > best_val || (v == best_val && m < best) {
            best = m;
            best_val = v;
        }
    }
    best
}

/// Integer hop count maximizing `p_s(M) / M` over `{1, ..., a_cap}` (or all
/// positive integers). The objective is unimodal, so only the neighbours of
/// the continuous optimum and `M = 1` need comparing; ties go to fewer hops.
pub fn mstar_integer(params: &NetworkParams, a_cap: Option<u64>) -> u64 {
    let d = params.derive();
    let (m, _, _) = solve_mstar_constants(params.alpha(), d.k1, d.k2, SolveMode::Auto)
        .expect("validated parameters always have k1 > 0 or k2 > 0");
    integer_argmax(params.alpha(), &d, m, a_cap)
}

/// The optimal per-hop success probability in its two equivalent forms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OptimalSuccess {
    /// `exp((2/alpha - 1) k2 / M*^2 - 1/alpha)`; independent of noise.
    pub interference_form: f64,
    /// `exp((alpha/2 - 1) k1 / M*^alpha - 1/2)`; independent of density.
    pub noise_form: f64,
}

pub fn optimal_success_forms(params: &NetworkParams, m_star: f64) -> OptimalSuccess {
    let a = params.alpha();
    let d = params.derive();
    OptimalSuccess {
        interference_form: ((2.0 / a - 1.0) * d.k2 / (m_star * m_star) - 1.0 / a).exp(),
        noise_form: ((a / 2.0 - 1.0) * d.k1 * m_star.powf(-a) - 0.5).exp(),
    }
}

/// Both forms, checked against each other. Disagreement means `m_star` is not
/// a stationary point.
pub fn optimal_success_probability(params: &NetworkParams, m_star: f64) -> Result<OptimalSuccess> {
    let forms = optimal_success_forms(params, m_star);
    if (forms.interference_form - forms.noise_form).abs() > FORM_AGREEMENT_TOL {
        return Err(Error::Inconsistent {
            interference: forms.interference_form,
            noise: forms.noise_form,
        });
    }
    Ok(forms)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CapacityMethod {
    UpperBound,
    ExactFiniteA,
    Simulated,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CapacityResult {
    pub method: CapacityMethod,
    /// Capacity at the continuous optimum.
    pub capacity: f64,
    pub m_star: f64,
    pub p_s: f64,
    pub m_star_integer: u64,
    pub capacity_integer: f64,
    pub solution: MStarSolution,
}

/// Hop-optimized upper bound.
pub fn cub_optimal(params: &NetworkParams) -> Result<CapacityResult> {
    let solution = solve_mstar(params, SolveMode::Auto)?;
    let m = solution.m_star_continuous;
    let mi = solution.m_star_integer;
    let p_s = success_at(params, m);
    Ok(CapacityResult {
        method: CapacityMethod::UpperBound,
        capacity: prefactor(params) * p_s / m,
        m_star: m,
        p_s,
        m_star_integer: mi,
        capacity_integer: prefactor(params) * success_at(params, mi as f64) / mi as f64,
        solution,
    })
}

/// Upper bound maximized over `M in {1, ..., a}` (finite range, unlimited
/// attempts inside the objective).
pub fn cub_range(params: &NetworkParams, a: u64) -> (u64, f64) {
    let m = mstar_integer(params, Some(a));
    (m, prefactor(params) * success_at(params, m as f64) / m as f64)
}

/// `alpha = 4` bound using the high-SNR hop count `beta^(1/4) R pi sqrt(lambda)`.
pub fn high_snr_limit_alpha4(params: &NetworkParams) -> Result<f64> {
    if params.alpha() != 4.0 {
        return Err(Error::Domain(format!(
            "high-SNR limit is only available for alpha = 4, got {}",
            params.alpha()
        )));
    }
    let lambda = params.lambda();
    if lambda == 0.0 {
        return Ok(0.0);
    }
    let noise = params.eta() / (params.rho() * PI.powi(4) * lambda * lambda);
    Ok(lambda.sqrt() * params.spectral_efficiency() / (PI * params.beta().powf(0.25)) * (-noise - 0.5).exp())
}

/// `lim C_ub / sqrt(lambda)` as `lambda -> inf`.
pub fn scaling_constant(alpha: f64, beta: f64, base: RateLogBase) -> Result<f64> {
    let k = kappa_alpha(alpha)?;
    if !(beta > 0.0) {
        return Err(Error::Domain(format!("beta must be > 0, got {beta}")));
    }
    Ok((-0.5f64).exp() * base.spectral_efficiency(beta) / ((2.0 * k).sqrt() * beta.powf(1.0 / alpha)))
}

/// Slope of `M*` against `sqrt(lambda)` in the dense limit: `sqrt(2 K_alpha) beta^(1/alpha) R`.
pub fn mstar_density_slope(params: &NetworkParams) -> f64 {
    let k = params.derive().k_alpha;
    (2.0 * k).sqrt() * params.beta().powf(1.0 / params.alpha()) * params.big_r()
}
