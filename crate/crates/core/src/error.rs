use thiserror::Error;

/// Errors raised by the bound, coverage and estimation routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("invalid signal configuration: {0}")]
    InvalidConfig(String),

    /// The information matrix cannot be inverted reliably.
    #[error("singular information matrix (condition number {condition:.3e})")]
    SingularInformation { condition: f64 },

    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),

    #[error("target {target} is unachievable: {reason}")]
    Unachievable { target: f64, reason: String },

    #[error("insufficient coverage: {visible} visible satellites, {required} required")]
    InsufficientCoverage { visible: usize, required: usize },

    #[error("sensors are collinear with the source")]
    CollinearSensors,

    /// The TDOA+RSS model needs η and ρ separately, not only their product.
    #[error("the TDOA+RSS model needs the (eta, rho) split; only eta_rho was given")]
    MissingRssSplit,
}

pub type Result<T> = std::result::Result<T, Error>;
