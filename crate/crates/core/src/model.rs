//! Network scenario parameters and the constants derived from them.
//!
//! A scenario is a source and destination separated by `R`, transmitters
//! scattered as a Poisson field of density `lambda`, singular path loss
//! `d^-alpha`, Rayleigh fading, transmit power `rho` (radiated power at 1 m),
//! noise power `eta`, and a per-hop SINR threshold `beta`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Base of the logarithm in the spectral efficiency `log(1 + beta)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RateLogBase {
    /// Capacity in nats/s/Hz/m.
    #[default]
    Natural,
    /// Capacity in bits/s/Hz/m.
    Base2,
}

impl RateLogBase {
    pub fn spectral_efficiency(self, beta: f64) -> f64 {
        match self {
            RateLogBase::Natural => beta.ln_1p(),
            RateLogBase::Base2 => beta.ln_1p() / std::f64::consts::LN_2,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            RateLogBase::Natural => "natural",
            RateLogBase::Base2 => "base2",
        }
    }
}

impl std::str::FromStr for RateLogBase {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "natural" | "e" | "ln" => Ok(RateLogBase::Natural),
            "base2" | "2" | "log2" => Ok(RateLogBase::Base2),
            other => Err(invalid(
                "rate_log_base",
                format!("expected `natural` or `base2`, got `{other}`"),
            )),
        }
    }
}

/// A validated network scenario.
///
/// Construct with [`NetworkParams::new`] or [`NetworkParams::with_snr`]; both
/// reject `alpha <= 2`, negative densities or powers, and the fully degenerate
/// case of zero noise together with zero density.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawParams", into = "RawParams")]
pub struct NetworkParams {
    lambda: f64,
    alpha: f64,
    beta: f64,
    big_r: f64,
    rho: f64,
    eta: f64,
    rate_log_base: RateLogBase,
}

/// Wire form of [`NetworkParams`]; field names match the JSON config schema.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct RawParams {
    pub lambda: f64,
    pub alpha: f64,
    pub beta: f64,
    #[serde(rename = "R")]
    pub big_r: f64,
    pub rho: f64,
    pub eta: f64,
    #[serde(default)]
    pub rate_log_base: RateLogBase,
}

impl TryFrom<RawParams> for NetworkParams {
    type Error = Error;

    fn try_from(raw: RawParams) -> Result<Self> {
        NetworkParams::new(raw.lambda, raw.alpha, raw.beta, raw.big_r, raw.rho, raw.eta)
            .map(|p| p.with_log_base(raw.rate_log_base))
    }
}

impl From<NetworkParams> for RawParams {
    fn from(p: NetworkParams) -> Self {
        RawParams {
            lambda: p.lambda,
            alpha: p.alpha,
            beta: p.beta,
            big_r: p.big_r,
            rho: p.rho,
            eta: p.eta,
            rate_log_base: p.rate_log_base,
        }
    }
}

impl NetworkParams {
    pub fn new(lambda: f64, alpha: f64, beta: f64, big_r: f64, rho: f64, eta: f64) -> Result<Self> {
        if !(lambda.is_finite() && lambda >= 0.0) {
            return Err(invalid("lambda", format!("must be finite and >= 0, got {lambda}")));
        }
        if !(alpha.is_finite() && alpha > 2.0) {
            return Err(invalid(
                "alpha",
                format!("path loss exponent must satisfy alpha > 2, got {alpha}"),
            ));
        }
        if !(beta.is_finite() && beta > 0.0) {
            return Err(invalid("beta", format!("must be finite and > 0, got {beta}")));
        }
        if !(big_r.is_finite() && big_r > 0.0) {
            return Err(invalid("R", format!("must be finite and > 0, got {big_r}")));
        }
        if !(rho.is_finite() && rho > 0.0) {
            return Err(invalid("rho", format!("must be finite and > 0, got {rho}")));
        }
        if !(eta.is_finite() && eta >= 0.0) {
            return Err(invalid("eta", format!("must be finite and >= 0, got {eta}")));
        }
        if eta == 0.0 && lambda == 0.0 {
            return Err(invalid(
                "eta",
                "eta = 0 together with lambda = 0 makes every hop succeed surely; the optimal hop count is undefined",
            ));
        }
        Ok(NetworkParams {
            lambda,
            alpha,
            beta,
            big_r,
            rho,
            eta,
            rate_log_base: RateLogBase::Natural,
        })
    }

    /// Builds a scenario from the end-to-end SNR `rho R^-alpha / eta` instead of
    /// the noise power. `snr = inf` gives `eta = 0`.
    pub fn with_snr(lambda: f64, alpha: f64, beta: f64, big_r: f64, rho: f64, snr: f64) -> Result<Self> {
        if !(snr > 0.0) {
            return Err(invalid("snr", format!("must be > 0, got {snr}")));
        }
        if !(alpha.is_finite() && alpha > 2.0) {
            return Err(invalid(
                "alpha",
                format!("path loss exponent must satisfy alpha > 2, got {alpha}"),
            ));
        }
        let eta = if snr.is_infinite() {
            0.0
        } else {
            rho * big_r.powf(-alpha) / snr
        };
        Self::new(lambda, alpha, beta, big_r, rho, eta)
    }

    pub fn with_log_base(mut self, base: RateLogBase) -> Self {
        self.rate_log_base = base;
        self
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }
    pub fn alpha(&self) -> f64 {
        self.alpha
    }
    pub fn beta(&self) -> f64 {
        self.beta
    }
    pub fn big_r(&self) -> f64 {
        self.big_r
    }
    pub fn rho(&self) -> f64 {
        self.rho
    }
    pub fn eta(&self) -> f64 {
        self.eta
    }
    pub fn rate_log_base(&self) -> RateLogBase {
        self.rate_log_base
    }

    /// End-to-end SNR over the full distance `R`; `+inf` when `eta = 0`.
    pub fn snr(&self) -> f64 {
        if self.eta == 0.0 {
            f64::INFINITY
        } else {
            self.rho * self.big_r.powf(-self.alpha) / self.eta
        }
    }

    /// `log(1 + beta)` in the configured base.
    pub fn spectral_efficiency(&self) -> f64 {
        self.rate_log_base.spectral_efficiency(self.beta)
    }

    pub fn derive(&self) -> DerivedConstants {
        derive(self)
    }

    /// Copy with one field replaced, re-validated.
    pub fn set(&self, field: &str, value: f64) -> Result<Self> {
        let mut raw = RawParams::from(*self);
        match field {
            "lambda" => raw.lambda = value,
            "alpha" => raw.alpha = value,
            "beta" => raw.beta = value,
            "R" => raw.big_r = value,
            "rho" => raw.rho = value,
            "eta" => raw.eta = value,
            other => return Err(invalid("field", format!("unknown parameter `{other}`"))),
        }
        NetworkParams::try_from(raw)
    }
}

/// Constants shared by every closed-form expression.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DerivedConstants {
    pub k_alpha: f64,
    pub snr: f64,
    /// Noise term `beta / SNR`.
    pub k1: f64,
    /// Interference term `lambda beta^(2/alpha) K_alpha R^2`.
    pub k2: f64,
}

/// `K_alpha = 2 pi^2 / (alpha sin(2 pi / alpha))`, the Rayleigh-fading
/// interference constant. Diverges as `alpha -> 2+`.
pub fn kappa_alpha(alpha: f64) -> Result<f64> {
    if !(alpha.is_finite() && alpha > 2.0) {
        return Err(Error::Domain(format!(
            "K_alpha requires alpha > 2 (interference diverges otherwise), got {alpha}"
        )));
    }
    Ok(2.0 * PI * PI / (alpha * (2.0 * PI / alpha).sin()))
}

pub fn derive(params: &NetworkParams) -> DerivedConstants {
    // alpha > 2 is a construction invariant
    let k_alpha = kappa_alpha(params.alpha).expect("validated alpha");
    let k1 = params.beta * params.eta * params.big_r.powf(params.alpha) / params.rho;
    let k2 = params.lambda * params.beta.powf(2.0 / params.alpha) * k_alpha * params.big_r * params.big_r;
    DerivedConstants {
        k_alpha,
        snr: params.snr(),
        k1,
        k2,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn kappa_reference_values() {
        assert_relative_eq!(kappa_alpha(4.0).unwrap(), PI * PI / 2.0, max_relative = 1e-14);
        let k3 = kappa_alpha(3.0).unwrap();
        assert_relative_eq!(k3, 4.0 * 3f64.sqrt() * PI * PI / 9.0, max_relative = 1e-14);
        assert!((k3 - 7.598).abs() < 1e-3);
    }

    #[test]
    fn kappa_diverges_near_two() {
        assert!(kappa_alpha(2.0001).unwrap() > 1e4);
        assert!(matches!(kappa_alpha(2.0), Err(Error::Domain(_))));
        assert!(kappa_alpha(1.5).is_err());
        assert!(kappa_alpha(f64::NAN).is_err());
    }

    #[test]
    fn kappa_decreasing_in_alpha() {
        let mut prev = f64::INFINITY;
        for i in 1..=600 {
            let a = 2.0 + i as f64 * 0.01;
            let k = kappa_alpha(a).unwrap();
            assert!(k < prev, "not decreasing at alpha={a}");
            prev = k;
        }
    }

    #[test]
    fn snr_from_powers() {
        let p = NetworkParams::new(0.1, 4.0, 3.0, 1.0, 1.0, 0.01).unwrap();
        assert_relative_eq!(p.snr(), 100.0, max_relative = 1e-14);
    }

    #[test]
    fn derived_constants_reference() {
        let p = NetworkParams::with_snr(0.1, 4.0, 3.0, 1.0, 1.0, 10.0).unwrap();
        let d = p.derive();
        assert_relative_eq!(d.k1, 0.3, max_relative = 1e-14);
        // 0.1 * sqrt(3) * pi^2 / 2
        assert_relative_eq!(d.k2, 0.854_732_813_664_608_4, max_relative = 1e-14);
        assert_relative_eq!(d.snr, 10.0, max_relative = 1e-14);

        let quiet = p.set("lambda", 0.0).unwrap();
        assert_eq!(quiet.derive().k2, 0.0);
    }

    #[test]
    fn infinite_snr_is_zero_noise() {
        let p = NetworkParams::with_snr(1.0, 3.0, 3.0, 1.0, 1.0, f64::INFINITY).unwrap();
        assert_eq!(p.eta(), 0.0);
        let d = p.derive();
        assert!(d.snr.is_infinite());
        assert_eq!(d.k1, 0.0);
    }

    #[test]
    fn rejects_invalid() {
        assert!(NetworkParams::new(0.1, 2.0, 3.0, 1.0, 1.0, 0.1).is_err());
        assert!(NetworkParams::new(-0.1, 3.0, 3.0, 1.0, 1.0, 0.1).is_err());
        assert!(NetworkParams::new(0.1, 3.0, 0.0, 1.0, 1.0, 0.1).is_err());
        assert!(NetworkParams::new(0.1, 3.0, 3.0, 0.0, 1.0, 0.1).is_err());
        assert!(NetworkParams::new(0.1, 3.0, 3.0, 1.0, 0.0, 0.1).is_err());
        assert!(NetworkParams::new(0.1, 3.0, 3.0, 1.0, 1.0, -0.1).is_err());
        assert!(NetworkParams::new(0.0, 3.0, 3.0, 1.0, 1.0, 0.0).is_err());
        assert!(NetworkParams::with_snr(0.1, 3.0, 3.0, 1.0, 1.0, 0.0).is_err());
        let err = NetworkParams::new(0.1, 2.0, 3.0, 1.0, 1.0, 0.1).unwrap_err();
        assert!(err.to_string().contains("alpha > 2"));
    }

    #[test]
    fn json_field_names() {
        let p = NetworkParams::with_snr(0.1, 3.0, 3.0, 2.0, 1.0, 10.0)
            .unwrap()
            .with_log_base(RateLogBase::Base2);
        let v: serde_json::Value = serde_json::to_value(p).unwrap();
        for key in ["lambda", "alpha", "beta", "R", "rho", "eta", "rate_log_base"] {
            assert!(v.get(key).is_some(), "missing {key}");
        }
        assert_eq!(v["rate_log_base"], "base2");
        let back: NetworkParams = serde_json::from_value(v).unwrap();
        assert_eq!(back, p);

        let bad = r#"{"lambda":0.1,"alpha":2,"beta":3,"R":1,"rho":1,"eta":0.1}"#;
        assert!(serde_json::from_str::<NetworkParams>(bad).is_err());
        let defaulted = r#"{"lambda":0.1,"alpha":3,"beta":3,"R":1,"rho":1,"eta":0.1}"#;
        let p: NetworkParams = serde_json::from_str(defaulted).unwrap();
        assert_eq!(p.rate_log_base(), RateLogBase::Natural);
    }

    #[test]
    fn log_bases_differ_by_ln2() {
        let n = RateLogBase::Natural.spectral_efficiency(3.0);
        let b = RateLogBase::Base2.spectral_efficiency(3.0);
        assert_relative_eq!(n, 4f64.ln(), max_relative = 1e-15);
        assert_relative_eq!(b, 2.0, max_relative = 1e-15);
    }

    proptest::proptest! {
        #[test]
        fn derive_roundtrip(
            lambda in 0.0f64..100.0,
            alpha in 2.05f64..8.0,
            beta in 0.01f64..50.0,
            big_r in 0.1f64..10.0,
            rho in 0.1f64..10.0,
            eta in 1e-6f64..1.0,
        ) {
            let p = NetworkParams::new(lambda, alpha, beta, big_r, rho, eta).unwrap();
            let d = p.derive();
            let k1 = beta / p.snr();
            let k2 = lambda * beta.powf(2.0 / alpha) * kappa_alpha(alpha).unwrap() * big_r * big_r;
            proptest::prop_assert!((d.k1 - k1).abs() <= 1e-14 * k1.abs().max(f64::MIN_POSITIVE) * 4.0);
            proptest::prop_assert!((d.k2 - k2).abs() <= 1e-14 * k2.abs().max(f64::MIN_POSITIVE));
        }
    }
}
