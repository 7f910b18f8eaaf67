use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("degenerate parameters: k1 = k2 = 0 (no noise and no interference), objective is maximized at M = 1")]
    Degenerate,

    #[error("success probability forms disagree: interference form {interference}, noise form {noise}")]
    Inconsistent { interference: f64, noise: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
