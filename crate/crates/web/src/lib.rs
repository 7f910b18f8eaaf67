//! WebAssembly bindings for the demo page in `www/`.
//!
//! Each export takes plain numbers and returns a JSON string, so the page
//! needs no generated type definitions. The same functions without the
//! `wasm_bindgen` layer are public for native use and tests.

use ratcap_core::analytic::{cub_optimal, mstar_density_slope, per_hop_success, scaling_constant};
use ratcap_core::finite::capacity_finite;
use ratcap_core::montecarlo::estimate_single_hop_ps;
use ratcap_core::{NetworkParams, SimConfig};
use serde::Serialize;
use wasm_bindgen::prelude::*;

/// Largest attempt budget the page offers; keeps the exact table interactive.
pub const MAX_BUDGET: u32 = 200;
pub const MAX_TRIALS: u32 = 2_000_000;

fn scenario(lambda: f64, alpha: f64, beta: f64, big_r: f64, snr_db: f64) -> Result<NetworkParams, String> {
    NetworkParams::with_snr(lambda, alpha, beta, big_r, 1.0, 10f64.powf(snr_db / 10.0)).map_err(|e| e.to_string())
}

#[derive(Debug, Serialize)]
pub struct HopPoint {
    pub m: u64,
    pub capacity: f64,
    pub bound: f64,
}

#[derive(Debug, Serialize)]
pub struct HopCurve {
    pub a: u64,
    pub points: Vec<HopPoint>,
    pub m_star: u64,
    pub capacity: f64,
    pub m_star_bound: u64,
    pub bound: f64,
    pub m_star_continuous: f64,
    pub p_out: f64,
}

/// Exact capacity and the unlimited-attempt bound against the hop count.
pub fn hop_curve_data(lambda: f64, alpha: f64, beta: f64, big_r: f64, snr_db: f64, a: u32) -> Result<HopCurve, String> {
    if !(1..=MAX_BUDGET).contains(&a) {
        return Err(format!("attempt budget must be between 1 and {MAX_BUDGET}"));
    }
    let p = scenario(lambda, alpha, beta, big_r, snr_db)?;
    let exact = capacity_finite(&p, a as u64);
    let prefactor = p.lambda() * p.spectral_efficiency() * p.big_r();
    let points = exact
        .per_m_table
        .iter()
        .map(|r| HopPoint {
            m: r.m,
            capacity: prefactor * r.objective,
            bound: prefactor * r.bound_objective,
        })
        .collect();
    let (m_ub, best) = exact.bound_argmax();
    let opt = cub_optimal(&p).map_err(|e| e.to_string())?;
    Ok(HopCurve {
        a: a as u64,
        points,
        m_star: exact.m_star,
        capacity: exact.capacity,
        m_star_bound: m_ub,
        bound: prefactor * best,
        m_star_continuous: opt.m_star,
        p_out: exact.p_out,
    })
}

#[derive(Debug, Serialize)]
pub struct DensityPoint {
    pub lambda: f64,
    pub m_star_per_sqrt_lambda: f64,
    pub bound_per_sqrt_lambda: f64,
}

#[derive(Debug, Serialize)]
pub struct DensityCurve {
    pub points: Vec<DensityPoint>,
    pub dense_slope: f64,
    pub scaling_constant: f64,
}

/// `M*/sqrt(lambda)` and `C_ub/sqrt(lambda)` on a log grid of densities,
/// with their dense-network limits.
pub fn density_curve_data(
    alpha: f64,
    beta: f64,
    big_r: f64,
    snr_db: f64,
    lambda_min: f64,
    lambda_max: f64,
    count: u32,
) -> Result<DensityCurve, String> {
    if !(lambda_min > 0.0 && lambda_max > lambda_min) || !(2..=2000).contains(&count) {
        return Err("need 0 < lambda_min < lambda_max and 2 to 2000 points".into());
    }
    let (lo, hi) = (lambda_min.ln(), lambda_max.ln());
    let mut points = Vec::with_capacity(count as usize);
    for i in 0..count {
        let lambda = (lo + (hi - lo) * i as f64 / (count - 1) as f64).exp();
        let p = scenario(lambda, alpha, beta, big_r, snr_db)?;
        let opt = cub_optimal(&p).map_err(|e| e.to_string())?;
        points.push(DensityPoint {
            lambda,
            m_star_per_sqrt_lambda: opt.m_star / lambda.sqrt(),
            bound_per_sqrt_lambda: opt.capacity / lambda.sqrt(),
        });
    }
    let p = scenario(lambda_max, alpha, beta, big_r, snr_db)?;
    Ok(DensityCurve {
        points,
        dense_slope: mstar_density_slope(&p),
        scaling_constant: scaling_constant(alpha, beta, p.rate_log_base()).map_err(|e| e.to_string())?,
    })
}

#[derive(Debug, Serialize)]
pub struct SimulationCheck {
    pub hops: u64,
    pub trials: u64,
    pub seed: u64,
    pub simulated: f64,
    pub std_error: f64,
    pub analytic: f64,
    pub z: f64,
    pub agrees: bool,
}

/// Simulated per-hop success probability at hop length `R / hops` next to
/// the closed form.
#[allow(clippy::too_many_arguments)]
pub fn simulate_hop_data(
    lambda: f64,
    alpha: f64,
    beta: f64,
    big_r: f64,
    snr_db: f64,
    hops: u32,
    trials: u32,
    seed: u32,
) -> Result<SimulationCheck, String> {
    if hops == 0 || trials == 0 || trials > MAX_TRIALS {
        return Err(format!("need hops >= 1 and 1 to {MAX_TRIALS} trials"));
    }
    let p = scenario(lambda, alpha, beta, big_r, snr_db)?;
    // a single hop of the shorter length is the same experiment
    let hop = p.set("R", big_r / hops as f64).map_err(|e| e.to_string())?;
    let cfg = SimConfig::new(trials as u64, seed as u64).map_err(|e| e.to_string())?;
    let est = estimate_single_hop_ps(&hop, &cfg);
    let analytic = per_hop_success(&p, hops as f64).map_err(|e| e.to_string())?;
    Ok(SimulationCheck {
        hops: hops as u64,
        trials: trials as u64,
        seed: seed as u64,
        simulated: est.mean,
        std_error: est.std_error,
        analytic,
        z: est.z_score(analytic),
        agrees: est.agrees_with(analytic, 3.0),
    })
}

fn to_js<T: Serialize>(r: Result<T, String>) -> Result<String, JsError> {
    let v = r.map_err(|e| JsError::new(&e))?;
    serde_json::to_string(&v).map_err(|e| JsError::new(&e.to_string()))
}

#[wasm_bindgen(js_name = hopCurve)]
pub fn hop_curve(lambda: f64, alpha: f64, beta: f64, big_r: f64, snr_db: f64, a: u32) -> Result<String, JsError> {
    to_js(hop_curve_data(lambda, alpha, beta, big_r, snr_db, a))
}

#[wasm_bindgen(js_name = densityCurve)]
pub fn density_curve(
    alpha: f64,
    beta: f64,
    big_r: f64,
    snr_db: f64,
    lambda_min: f64,
    lambda_max: f64,
    count: u32,
) -> Result<String, JsError> {
    to_js(density_curve_data(
        alpha, beta, big_r, snr_db, lambda_min, lambda_max, count,
    ))
}

#[wasm_bindgen(js_name = simulateHop)]
#[allow(clippy::too_many_arguments)]
pub fn simulate_hop(
    lambda: f64,
    alpha: f64,
    beta: f64,
    big_r: f64,
    snr_db: f64,
    hops: u32,
    trials: u32,
    seed: u32,
) -> Result<String, JsError> {
    to_js(simulate_hop_data(
        lambda, alpha, beta, big_r, snr_db, hops, trials, seed,
    ))
}
