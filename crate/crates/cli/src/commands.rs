use ratcap_core::analytic::{
    alpha3_discriminant, alpha3_trig_printed_variant, cub_at, cub_optimal, cub_range, high_snr_limit_alpha4,
    optimal_success_forms, scaling_constant, success_at,
};
use ratcap_core::finite::{capacity_finite, FiniteCapacityResult};
use ratcap_core::montecarlo::estimate_row;
use ratcap_core::verify::{self, IdentityReport, SolverGrid, SolverReport, Worst};
use ratcap_core::NetworkParams;

use crate::output::{Cell, Table};
use crate::spec::{sweep_points, RunSpec};
use crate::CliError;

/// Agreement threshold, in standard errors, for simulated rows.
pub const AGREEMENT_SIGMAS: f64 = 3.0;

const PARAM_COLUMNS: [&str; 7] = ["lambda", "alpha", "beta", "R", "rho", "eta", "snr"];

fn param_cells(p: &NetworkParams) -> Vec<Cell> {
    vec![
        p.lambda().into(),
        p.alpha().into(),
        p.beta().into(),
        p.big_r().into(),
        p.rho().into(),
        p.eta().into(),
        p.snr().into(),
    ]
}

fn columns(head: &[&'static str], tail: &[&'static str]) -> Vec<&'static str> {
    head.iter().chain(tail).copied().collect()
}

pub const ANALYTIC_COLUMNS: [&str; 22] = [
    "k_alpha",
    "k1",
    "k2",
    "m_star",
    "m_star_integer",
    "method",
    "discriminant",
    "ps_interference_form",
    "ps_noise_form",
    "ps_m_star",
    "c_ub",
    "c_ub_integer",
    "scaling_constant",
    "high_snr_limit",
    "alt_trig_m_star",
    "alt_trig_rel_dev",
    "A",
    "m_star_range",
    "c_ub_range",
    "M",
    "ps_at_M",
    "c_ub_at_M",
];

pub fn analytic(spec: &RunSpec) -> Result<Table, CliError> {
    let mut table = Table::new(&columns(&PARAM_COLUMNS, &ANALYTIC_COLUMNS));
    for point in sweep_points(&spec.params, spec.a, spec.sweep.as_ref())? {
        let p = &point.params;
        let d = p.derive();
        let ub = cub_optimal(p)?;
        let m = ub.m_star;
        let forms = optimal_success_forms(p, m);
        let disc = (p.alpha() == 3.0).then(|| alpha3_discriminant(d.k1, d.k2));
        let alt = alpha3_trig_printed_variant(p);
        let limit = (p.alpha() == 4.0).then(|| high_snr_limit_alpha4(p)).transpose()?;
        let range = point.a.map(|a| cub_range(p, a));
        let at_m = spec
            .m
            .map(|mm| -> Result<_, CliError> { Ok((success_at(p, mm as f64), cub_at(p, mm as f64)?)) })
            .transpose()?;

        let mut row = param_cells(p);
        row.extend([
            d.k_alpha.into(),
            d.k1.into(),
            d.k2.into(),
            m.into(),
            ub.m_star_integer.into(),
            ub.solution.method.as_str().into(),
            disc.into(),
            forms.interference_form.into(),
            forms.noise_form.into(),
            ub.p_s.into(),
            ub.capacity.into(),
            ub.capacity_integer.into(),
            scaling_constant(p.alpha(), p.beta(), p.rate_log_base())?.into(),
            limit.into(),
            alt.into(),
            alt.map(|x| (x - m) / m).into(),
            point.a.into(),
            range.map(|r| r.0).into(),
            range.map(|r| r.1).into(),
            spec.m.into(),
            at_m.map(|r| r.0).into(),
            at_m.map(|r| r.1).into(),
        ]);
        table.push(row);
    }
    Ok(table)
}

pub const EXACT_COLUMNS: [&str; 15] = [
    "A",
    "M",
    "p_s",
    "p_delivery",
    "expected_attempts_capped",
    "objective",
    "capacity_at_M",
    "c_ub_at_M",
    "capacity",
    "m_star",
    "p_out",
    "c_ub",
    "m_star_ub",
    "c_ub_unrestricted",
    "is_optimal",
];

fn exact_row(p: &NetworkParams, res: &FiniteCapacityResult, m: u64, ub_unrestricted: f64) -> Vec<Cell> {
    let prefactor = p.lambda() * p.spectral_efficiency() * p.big_r();
    let r = &res.per_m_table[(m - 1) as usize];
    let (m_ub, c_ub) = res.bound_argmax();
    let mut row = param_cells(p);
    row.extend([
        res.a.into(),
        m.into(),
        r.p_s.into(),
        r.p_delivery.into(),
        r.expected_attempts_capped.into(),
        r.objective.into(),
        (prefactor * r.objective).into(),
        (prefactor * r.bound_objective).into(),
        res.capacity.into(),
        res.m_star.into(),
        res.p_out.into(),
        (prefactor * c_ub).into(),
        m_ub.into(),
        ub_unrestricted.into(),
        (m == res.m_star).into(),
    ]);
    row
}

/// Per-`M` table for a single point; with a sweep, one row per point at its
/// maximizing `M`.
pub fn exact(spec: &RunSpec) -> Result<Table, CliError> {
    let mut table = Table::new(&columns(&PARAM_COLUMNS, &EXACT_COLUMNS));
    let points = sweep_points(&spec.params, spec.a, spec.sweep.as_ref())?;
    for point in &points {
        let a = point
            .a
            .ok_or_else(|| CliError::Usage("exact needs an attempt budget: pass --A or sweep over A".into()))?;
        let p = &point.params;
        let res = capacity_finite(p, a);
        let unrestricted = cub_optimal(p)?.capacity_integer;
        if spec.sweep.is_some() {
            table.push(exact_row(p, &res, res.m_star, unrestricted));
        } else {
            let ms: Vec<u64> = match spec.m {
                Some(m) if m > a => return Err(CliError::Usage(format!("--M {m} exceeds --A {a}"))),
                Some(m) => vec![m],
                None => (1..=a).collect(),
            };
            for m in ms {
                table.push(exact_row(p, &res, m, unrestricted));
            }
        }
    }
    Ok(table)
}

pub const SIMULATE_COLUMNS: [&str; 17] = [
    "A",
    "M",
    "trials",
    "seed",
    "p_s",
    "p_delivery_sim",
    "p_delivery_se",
    "p_delivery_exact",
    "attempts_sim",
    "attempts_se",
    "attempts_exact",
    "objective_sim",
    "objective_se",
    "objective_exact",
    "objective_z",
    "p_delivery_z",
    "pass",
];

/// Simulated finite-budget table next to the exact values. A row passes when
/// the simulated objective lies within three standard errors of the exact one.
pub fn simulate(spec: &RunSpec) -> Result<(Table, Vec<String>), CliError> {
    if spec.sweep.is_some() {
        return Err(CliError::Usage(
            "simulate does not take --sweep; run one point at a time".into(),
        ));
    }
    let a = spec
        .a
        .ok_or_else(|| CliError::Usage("simulate needs an attempt budget --A".into()))?;
    let cfg = spec
        .sim
        .ok_or_else(|| CliError::Usage("simulate needs a simulation config".into()))?;
    let p = &spec.params;
    let exact = capacity_finite(p, a);
    let ms: Vec<u64> = match spec.m {
        Some(m) if m > a => return Err(CliError::Usage(format!("--M {m} exceeds --A {a}"))),
        Some(m) => vec![m],
        None => (1..=a).collect(),
    };
    let mut table = Table::new(&columns(&PARAM_COLUMNS, &SIMULATE_COLUMNS));
    let mut failures = Vec::new();
    for m in ms {
        let sim = estimate_row(p, m, a, &cfg);
        let ex = &exact.per_m_table[(m - 1) as usize];
        let pass = sim.objective.agrees_with(ex.objective, AGREEMENT_SIGMAS);
        if !pass {
            failures.push(format!(
                "M={m}: simulated objective {} (se {}) vs exact {} (z = {:.2})",
                sim.objective.mean,
                sim.objective.std_error,
                ex.objective,
                sim.objective.z_score(ex.objective)
            ));
        }
        let mut row = param_cells(p);
        row.extend([
            a.into(),
            m.into(),
            cfg.trials.into(),
            cfg.seed.into(),
            ex.p_s.into(),
            sim.p_delivery.mean.into(),
            sim.p_delivery.std_error.into(),
            ex.p_delivery.into(),
            sim.expected_attempts_capped.mean.into(),
            sim.expected_attempts_capped.std_error.into(),
            ex.expected_attempts_capped.into(),
            sim.objective.mean.into(),
            sim.objective.std_error.into(),
            ex.objective.into(),
            sim.objective.z_score(ex.objective).into(),
            sim.p_delivery.z_score(ex.p_delivery).into(),
            pass.into(),
        ]);
        table.push(row);
    }
    Ok((table, failures))
}

pub const VERIFY_COLUMNS: [&str; 6] = ["check", "points", "worst", "tolerance", "at", "pass"];

/// Largest `A` in the identity grid.
pub const VERIFY_MAX_A: u64 = 30;

pub fn verify(perturb: f64) -> (Table, Vec<String>) {
    let ids = verify::identity_grid(VERIFY_MAX_A, &verify::default_p_grid(), perturb);
    let solver = verify::solver_grid(&SolverGrid::default());
    let table = verify_table(&ids, &solver);
    let mut failures = ids.violations.clone();
    failures.extend(solver.violations.iter().cloned());
    (table, failures)
}

fn verify_table(ids: &IdentityReport, solver: &SolverReport) -> Table {
    let mut t = Table::new(&VERIFY_COLUMNS);
    let row = |name: &str, points: usize, w: &Worst, tol: f64| -> Vec<Cell> {
        vec![
            name.into(),
            (points as u64).into(),
            w.value.into(),
            tol.into(),
            w.at.clone().into(),
            (w.value <= tol).into(),
        ]
    };
    let n = ids.points;
    t.push(vec![
        "gap_min".into(),
        (n as u64).into(),
        ids.min_gap.into(),
        (-verify::IDENTITY_TOL).into(),
        ids.min_gap_at.clone().into(),
        (ids.min_gap >= -verify::IDENTITY_TOL).into(),
    ]);
    t.push(row("gap_increment", n, &ids.delta, verify::IDENTITY_TOL));
    t.push(row("tail_sum", n, &ids.tail_sum, verify::IDENTITY_TOL));
    t.push(row("last_trial", n, &ids.last_trial, verify::IDENTITY_TOL));
    t.push(row("adjacent_mass", n, &ids.adjacent_mass, verify::IDENTITY_TOL));
    t.push(row(
        "expectation_routes",
        n,
        &ids.expectation_routes,
        verify::IDENTITY_TOL,
    ));
    let s = solver.points;
    t.push(row(
        "root_residual",
        s,
        &solver.root_residual,
        verify::ROOT_RESIDUAL_TOL,
    ));
    t.push(row("first_order", s, &solver.first_order, verify::ROOT_RESIDUAL_TOL));
    t.push(row(
        "closed_vs_numeric",
        s,
        &solver.closed_vs_numeric,
        verify::ROOT_AGREEMENT_TOL,
    ));
    t.push(row("success_forms", s, &solver.form_agreement, verify::FORM_TOL));
    t.push(row("vieta", solver.three_real_root_cases, &solver.vieta, 1e-9));
    for (name, count) in [
        ("alpha3_single_real_root", solver.single_real_root_cases),
        ("alpha3_three_real_roots", solver.three_real_root_cases),
    ] {
        t.push(vec![
            name.into(),
            (count as u64).into(),
            Cell::Empty,
            Cell::Empty,
            Cell::Empty,
            (count > 0).into(),
        ]);
    }
    t
}
