//! Monte Carlo simulation of the SINR model.
//!
//! Each transmission attempt draws a fresh Poisson field of interferers in a
//! disk of radius `b` around the receiver, unit-mean exponential fades for
//! every link, and compares the SINR to `beta`. Interferers are generated in
//! order of increasing distance (`pi lambda r_k^2` are the arrival times of a
//! unit-rate Poisson process), so the field inside `b` is a prefix of the
//! field inside any larger radius drawn from the same stream. Interference from beyond `b`
//! is replaced by its mean `2 pi lambda rho b^(2-alpha) / (alpha-2)`; with
//! Rayleigh fading (Jensen) that underestimates the success probability by a
//! relative factor of at most `pi lambda beta^2 d^(2 alpha) b^(2-2 alpha) / (alpha-1)`,
//! and `b` is chosen to hold that below `truncation_epsilon`.
//!
//! Every trial owns a ChaCha8 stream keyed by `(seed, lane)` with the trial
//! index as stream id, so results do not depend on how trials are scheduled.
//! All accumulators are integer counts.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};
use serde::Serialize;

use crate::analytic::CapacityMethod;
use crate::error::{invalid, Result};
use crate::finite::argmax;
use crate::model::NetworkParams;

const MIN_DISTANCE: f64 = 1e-12;
const CHUNK: u64 = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SimConfig {
    pub trials: u64,
    pub seed: u64,
    pub truncation_epsilon: f64,
    /// Overrides the radius derived from `truncation_epsilon`.
    pub region_radius: Option<f64>,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            trials: 100_000,
            seed: 1,
            truncation_epsilon: 1e-5,
            region_radius: None,
        }
    }
}

impl SimConfig {
    pub fn new(trials: u64, seed: u64) -> Result<Self> {
        SimConfig {
            trials,
            seed,
            ..Default::default()
        }
        .validated()
    }

    pub fn validated(self) -> Result<Self> {
        if self.trials == 0 {
            return Err(invalid("trials", "must be at least 1"));
        }
        if !(self.truncation_epsilon > 0.0) {
            return Err(invalid("truncation_epsilon", "must be > 0"));
        }
        if let Some(b) = self.region_radius {
            if !(b > 0.0 && b.is_finite()) {
                return Err(invalid("region_radius", "must be finite and > 0"));
            }
        }
        Ok(self)
    }

    /// Disk radius used for hops of length `hop_distance`.
    pub fn region_radius_for(&self, params: &NetworkParams, hop_distance: f64) -> f64 {
        if let Some(b) = self.region_radius {
            return b;
        }
        let a = params.alpha();
        let beta = params.beta();
        let bias =
            PI * params.lambda() * beta * beta * hop_distance.powf(2.0 * a) / ((a - 1.0) * self.truncation_epsilon);
        bias.powf(1.0 / (2.0 * a - 2.0)).max(hop_distance)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SimEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub trials: u64,
    pub seed: u64,
}

impl SimEstimate {
    fn bernoulli(successes: u64, trials: u64, seed: u64) -> Self {
        let n = trials as f64;
        let mean = successes as f64 / n;
        let var = if trials > 1 {
            (successes as f64 - n * mean * mean) / (n - 1.0)
        } else {
            0.0
        };
        SimEstimate {
            mean,
            std_error: (var.max(0.0) / n).sqrt(),
            trials,
            seed,
        }
    }

    /// `|mean - reference| <= k * max(std_error, 1/trials)`. The `1/trials`
    /// floor keeps tiny runs where every sample agreed from failing on a
    /// zero standard error.
    pub fn agrees_with(&self, reference: f64, k: f64) -> bool {
        (self.mean - reference).abs() <= k * self.std_error.max(1.0 / self.trials as f64)
    }

    pub fn z_score(&self, reference: f64) -> f64 {
        (self.mean - reference) / self.std_error.max(1.0 / self.trials as f64)
    }
}

/// RNG for one trial.
pub fn trial_rng(seed: u64, lane: u64, trial: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&lane.to_le_bytes());
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(trial);
    rng
}

/// Interference field sampler for one hop length.
#[derive(Debug, Clone)]
pub struct FieldSampler {
    alpha: f64,
    rho: f64,
    eta: f64,
    beta: f64,
    signal_gain: f64,
    radius: f64,
    tail_mean: f64,
    density: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldDraw {
    pub interferers: u64,
    pub interference: f64,
}

impl FieldSampler {
    pub fn new(params: &NetworkParams, hop_distance: f64, config: &SimConfig) -> Self {
        assert!(hop_distance > 0.0, "hop distance must be positive");
        let radius = config.region_radius_for(params, hop_distance);
        let a = params.alpha();
        let lambda = params.lambda();
        FieldSampler {
            alpha: a,
            rho: params.rho(),
            eta: params.eta(),
            beta: params.beta(),
            signal_gain: params.rho() * hop_distance.powf(-a),
            radius,
            tail_mean: 2.0 * PI * lambda * params.rho() * radius.powf(2.0 - a) / (a - 2.0),
            density: lambda,
        }
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// Expected number of interferers in the disk, `lambda pi b^2`.
    pub fn mean_count(&self) -> f64 {
        self.density * PI * self.radius * self.radius
    }

    pub fn sample_field<R: Rng + ?Sized>(&self, rng: &mut R) -> FieldDraw {
        let mut draw = FieldDraw {
            interferers: 0,
            interference: 0.0,
        };
        if self.density == 0.0 {
            return draw;
        }
        let area_scale = 1.0 / (PI * self.density);
        let r2_max = self.radius * self.radius;
        let mut arrival = 0.0;
        loop {
            let gap: f64 = Exp1.sample(rng);
            arrival += gap;
            let r2 = arrival * area_scale;
            if r2 > r2_max {
                return draw;
            }
            let fade: f64 = Exp1.sample(rng);
            let r2 = r2.max(MIN_DISTANCE * MIN_DISTANCE);
            draw.interferers += 1;
            draw.interference += self.rho * fade * r2.powf(-0.5 * self.alpha);
        }
    }

    pub fn sample_sinr<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let fade: f64 = Exp1.sample(rng);
        let field = self.sample_field(rng);
        let denom = field.interference + self.tail_mean + self.eta;
        if denom == 0.0 {
            return f64::INFINITY;
        }
        self.signal_gain * fade / denom
    }

    pub fn attempt<R: Rng + ?Sized>(&self, rng: &mut R) -> bool {
        self.sample_sinr(rng) >= self.beta
    }
}

/// One SINR draw for a receiver at the origin and its transmitter at
/// `hop_distance`.
pub fn sample_sinr<R: Rng + ?Sized>(params: &NetworkParams, hop_distance: f64, config: &SimConfig, rng: &mut R) -> f64 {
    FieldSampler::new(params, hop_distance, config).sample_sinr(rng)
}

fn count_trials<F>(trials: u64, f: F) -> [u64; 4]
where
    F: Fn(u64) -> [u64; 4] + Sync,
{
    let chunk = |c: u64| {
        let mut acc = [0u64; 4];
        for t in c * CHUNK..((c + 1) * CHUNK).min(trials) {
            let v = f(t);
            for i in 0..4 {
                acc[i] += v[i];
            }
        }
        acc
    };
    let chunks = trials.div_ceil(CHUNK);
    let merge = |mut a: [u64; 4], b: [u64; 4]| {
        for i in 0..4 {
            a[i] += b[i];
        }
        a
    };
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..chunks).into_par_iter().map(chunk).reduce(|| [0; 4], merge)
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..chunks).map(chunk).fold([0; 4], merge)
    }
}

/// Fraction of single transmissions over the full distance `R` that reach
/// SINR `>= beta`.
pub fn estimate_single_hop_ps(params: &NetworkParams, config: &SimConfig) -> SimEstimate {
    let sampler = FieldSampler::new(params, params.big_r(), config);
    let [hits, ..] = count_trials(config.trials, |t| {
        let mut rng = trial_rng(config.seed, 0, t);
        [sampler.attempt(&mut rng) as u64, 0, 0, 0]
    });
    SimEstimate::bernoulli(hits, config.trials, config.seed)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PacketOutcome {
    Delivered { attempts_used: u64 },
    Outage,
}

impl PacketOutcome {
    /// Transmissions actually spent, `T ∧ A`.
    pub fn attempts_spent(self, a: u64) -> u64 {
        match self {
            PacketOutcome::Delivered { attempts_used } => attempts_used,
            PacketOutcome::Outage => a,
        }
    }
}

/// Pushes one packet over `sampler`'s hop length, `m` hops in order, with a
/// total budget of `a` attempts.
pub fn simulate_packet_with<R: Rng + ?Sized>(sampler: &FieldSampler, m: u64, a: u64, rng: &mut R) -> PacketOutcome {
    if m > a {
        return PacketOutcome::Outage;
    }
    let mut done = 0;
    for attempt in 1..=a {
        if sampler.attempt(rng) {
            done += 1;
            if done == m {
                return PacketOutcome::Delivered { attempts_used: attempt };
            }
        }
    }
    PacketOutcome::Outage
}

pub fn simulate_packet<R: Rng + ?Sized>(
    params: &NetworkParams,
    m: u64,
    a: u64,
    config: &SimConfig,
    rng: &mut R,
) -> PacketOutcome {
    assert!(m >= 1 && a >= 1, "need m >= 1 and a >= 1");
    let sampler = FieldSampler::new(params, params.big_r() / m as f64, config);
    simulate_packet_with(&sampler, m, a, rng)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SimRow {
    pub m: u64,
    pub p_delivery: SimEstimate,
    pub expected_attempts_capped: SimEstimate,
    /// Ratio of means `P(T <= A) / E[T ∧ A]`; standard error by the delta method.
    pub objective: SimEstimate,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimCapacityResult {
    pub method: CapacityMethod,
    pub a: u64,
    pub capacity: f64,
    pub m_star: u64,
    pub p_out: f64,
    pub rows: Vec<SimRow>,
}

pub fn estimate_row(params: &NetworkParams, m: u64, a: u64, config: &SimConfig) -> SimRow {
    let sampler = FieldSampler::new(params, params.big_r() / m as f64, config);
    let [delivered, spent, spent_sq, spent_delivered] = count_trials(config.trials, |t| {
        let mut rng = trial_rng(config.seed, m, t);
        let outcome = simulate_packet_with(&sampler, m, a, &mut rng);
        let y = outcome.attempts_spent(a);
        let x = matches!(outcome, PacketOutcome::Delivered { .. }) as u64;
        [x, y, y * y, x * y]
    });
    let n = config.trials as f64;
    let (sx, sy, syy, sxy) = (delivered as f64, spent as f64, spent_sq as f64, spent_delivered as f64);
    let xbar = sx / n;
    let ybar = sy / n;
    let dof = (n - 1.0).max(1.0);
    // x is 0/1 so sum x^2 = sum x
    let var_x = ((sx - n * xbar * xbar) / dof).max(0.0);
    let var_y = ((syy - n * ybar * ybar) / dof).max(0.0);
    let cov = (sxy - n * xbar * ybar) / dof;
    let ratio = xbar / ybar;
    let var_ratio = ((var_x - 2.0 * ratio * cov + ratio * ratio * var_y) / (ybar * ybar)).max(0.0) / n;
    let seed = config.seed;
    SimRow {
        m,
        p_delivery: SimEstimate::bernoulli(delivered, config.trials, seed),
        expected_attempts_capped: SimEstimate {
            mean: ybar,
            std_error: (var_y / n).sqrt(),
            trials: config.trials,
            seed,
        },
        objective: SimEstimate {
            mean: ratio,
            std_error: var_ratio.sqrt(),
            trials: config.trials,
            seed,
        },
    }
}

/// Empirical counterpart of the exact finite-budget capacity.
pub fn estimate_capacity_finite(params: &NetworkParams, a: u64, config: &SimConfig) -> SimCapacityResult {
    assert!(a >= 1, "attempt budget must be at least 1");
    let rows: Vec<SimRow> = (1..=a).map(|m| estimate_row(params, m, a, config)).collect();
    let (m_star, best) = argmax(rows.iter().map(|r| (r.m, r.objective.mean)));
    SimCapacityResult {
        method: CapacityMethod::Simulated,
        a,
        capacity: params.lambda() * params.spectral_efficiency() * params.big_r() * best,
        m_star,
        p_out: 1.0 - rows[(m_star - 1) as usize].p_delivery.mean,
        rows,
    }
}
