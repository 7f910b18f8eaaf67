//! Datasets behind the seven standard plots.
//!
//! Figures 1 to 4 use the resolved scenario (by default `lambda = 0.1`,
//! `SNR = 10`, `alpha = 3`, `beta = 3`, `R = 1`). Figures 5 and 7 sweep
//! `lambda` over `logrange(1e-2, 1e3, 60)` for `alpha` in {3, 4} and SNR in
//! {0, 10, 30} dB. Figure 6 compares `(lambda, SNR) = (0.1, 10 dB)` and
//! `(1, 30 dB)`. The fixed settings are returned as a profile so they end
//! up in the output header.

use ratcap_core::analytic::{cub_at, cub_optimal, cub_range, mstar_density_slope, scaling_constant};
use ratcap_core::finite::capacity_finite;
use ratcap_core::NetworkParams;
use serde_json::{json, Value};

use crate::output::{Cell, Table};
use crate::spec::parse_axis;
use crate::CliError;

pub const FIG1_MAX_A: u64 = 50;
pub const FIG2_A: u64 = 6;
pub const FIG3_A: u64 = 12;
pub const FIG6_MAX_M: u64 = 20;
pub const DENSITY_AXIS: &str = "logrange(1e-2,1e3,60)";
pub const SNR_DB: [f64; 3] = [0.0, 10.0, 30.0];
pub const ALPHAS: [f64; 2] = [3.0, 4.0];
pub const FIG6_SETTINGS: [(f64, f64); 2] = [(0.1, 10.0), (1.0, 30.0)];

fn db(x: f64) -> f64 {
    10f64.powf(x / 10.0)
}

fn with(base: &NetworkParams, lambda: f64, alpha: f64, snr_db: f64) -> Result<NetworkParams, CliError> {
    Ok(
        NetworkParams::with_snr(lambda, alpha, base.beta(), base.big_r(), base.rho(), db(snr_db))?
            .with_log_base(base.rate_log_base()),
    )
}

pub fn figure(id: u8, base: &NetworkParams) -> Result<(Table, Value), CliError> {
    match id {
        1 => Ok((fig1(base)?, json!({"A": format!("1..={FIG1_MAX_A}")}))),
        2 => Ok((curves_vs_m(base, FIG2_A)?, json!({"A": FIG2_A}))),
        3 => Ok((curves_vs_m(base, FIG3_A)?, json!({"A": FIG3_A}))),
        4 => Ok((fig4(base), json!({"A": format!("1..={FIG1_MAX_A}")}))),
        5 => Ok((fig5(base)?, density_profile())),
        6 => Ok((
            fig6(base)?,
            json!({"settings": FIG6_SETTINGS.iter().map(|(l, s)| json!({"lambda": l, "snr_db": s})).collect::<Vec<_>>(),
                   "alpha": base.alpha(), "M": format!("1..={FIG6_MAX_M}")}),
        )),
        7 => Ok((fig7(base)?, density_profile())),
        other => Err(CliError::Usage(format!("unknown figure {other}; expected 1 to 7"))),
    }
}

fn density_profile() -> Value {
    json!({"lambda": DENSITY_AXIS, "alpha": ALPHAS, "snr_db": SNR_DB})
}

fn fig1(p: &NetworkParams) -> Result<Table, CliError> {
    let mut t = Table::new(&[
        "A",
        "capacity",
        "c_ub",
        "m_star",
        "m_star_ub",
        "rel_gap",
        "c_ub_unrestricted",
    ]);
    let unrestricted = cub_optimal(p)?.capacity_integer;
    for a in 1..=FIG1_MAX_A {
        let exact = capacity_finite(p, a);
        let (m_ub, c_ub) = cub_range(p, a);
        t.push(vec![
            a.into(),
            exact.capacity.into(),
            c_ub.into(),
            exact.m_star.into(),
            m_ub.into(),
            ((c_ub - exact.capacity) / c_ub).into(),
            unrestricted.into(),
        ]);
    }
    Ok(t)
}

fn curves_vs_m(p: &NetworkParams, a: u64) -> Result<Table, CliError> {
    let mut t = Table::new(&[
        "A",
        "M",
        "capacity_at_M",
        "c_ub_at_M",
        "is_exact_optimum",
        "is_ub_optimum",
    ]);
    let exact = capacity_finite(p, a);
    let (m_ub, _) = exact.bound_argmax();
    let prefactor = p.lambda() * p.spectral_efficiency() * p.big_r();
    for r in &exact.per_m_table {
        t.push(vec![
            a.into(),
            r.m.into(),
            (prefactor * r.objective).into(),
            cub_at(p, r.m as f64)?.into(),
            (r.m == exact.m_star).into(),
            (r.m == m_ub).into(),
        ]);
    }
    Ok(t)
}

fn fig4(p: &NetworkParams) -> Table {
    let mut t = Table::new(&["A", "m_star", "m_star_ub", "difference"]);
    for a in 1..=FIG1_MAX_A {
        let exact = capacity_finite(p, a);
        let (m_ub, _) = exact.bound_argmax();
        t.push(vec![
            a.into(),
            exact.m_star.into(),
            m_ub.into(),
            Cell::Num(exact.m_star as f64 - m_ub as f64),
        ]);
    }
    t
}

fn density_grid() -> Vec<f64> {
    parse_axis(DENSITY_AXIS).expect("valid axis")
}

fn fig5(base: &NetworkParams) -> Result<Table, CliError> {
    let mut t = Table::new(&[
        "alpha",
        "snr_db",
        "lambda",
        "m_star",
        "m_star_over_sqrt_lambda",
        "dense_slope",
    ]);
    for alpha in ALPHAS {
        for snr_db in SNR_DB {
            for lambda in density_grid() {
                let p = with(base, lambda, alpha, snr_db)?;
                let m = cub_optimal(&p)?.m_star;
                t.push(vec![
                    alpha.into(),
                    snr_db.into(),
                    lambda.into(),
                    m.into(),
                    (m / lambda.sqrt()).into(),
                    mstar_density_slope(&p).into(),
                ]);
            }
        }
    }
    Ok(t)
}

fn fig6(base: &NetworkParams) -> Result<Table, CliError> {
    let mut t = Table::new(&[
        "lambda",
        "snr_db",
        "M",
        "c_ub_at_M",
        "m_star",
        "m_star_integer",
        "is_integer_optimum",
    ]);
    for (lambda, snr_db) in FIG6_SETTINGS {
        let p = with(base, lambda, base.alpha(), snr_db)?;
        let opt = cub_optimal(&p)?;
        for m in 1..=FIG6_MAX_M {
            t.push(vec![
                lambda.into(),
                snr_db.into(),
                m.into(),
                cub_at(&p, m as f64)?.into(),
                opt.m_star.into(),
                opt.m_star_integer.into(),
                (m == opt.m_star_integer).into(),
            ]);
        }
    }
    Ok(t)
}

fn fig7(base: &NetworkParams) -> Result<Table, CliError> {
    let mut t = Table::new(&[
        "alpha",
        "snr_db",
        "lambda",
        "c_ub",
        "c_ub_over_sqrt_lambda",
        "scaling_constant",
        "rel_dev",
    ]);
    for alpha in ALPHAS {
        let limit = scaling_constant(alpha, base.beta(), base.rate_log_base())?;
        for snr_db in SNR_DB {
            for lambda in density_grid() {
                let p = with(base, lambda, alpha, snr_db)?;
                let c = cub_optimal(&p)?.capacity / lambda.sqrt();
                t.push(vec![
                    alpha.into(),
                    snr_db.into(),
                    lambda.into(),
                    (c * lambda.sqrt()).into(),
                    c.into(),
                    limit.into(),
                    ((c - limit) / limit).into(),
                ]);
            }
        }
    }
    Ok(t)
}
