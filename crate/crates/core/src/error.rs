use thiserror::Error;

/// Errors raised by the simulator, the fitters and the loss budget.
#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown subsystem `{0}`")]
    UnknownSubsystem(String),

    #[error("invalid Fock space: {0}")]
    InvalidSpace(String),

    #[error(
        "truncation guard violated on `{subsystem}`: mean photon number {mean_photons:.3} \
         needs dimension >= {required}, have {dim}"
    )]
    Truncation {
        subsystem: String,
        mean_photons: f64,
        required: usize,
        dim: usize,
    },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("integrator step size underflow at t = {t:e} s (h = {h:e})")]
    StepSizeUnderflow { t: f64, h: f64 },

    #[error("integrator gave up after {steps} steps at t = {t:e} s")]
    TooManySteps { steps: usize, t: f64 },

    #[error("trace drift {drift:e} exceeds tolerance {tolerance:e}")]
    TraceDrift { drift: f64, tolerance: f64 },

    #[error("fit did not converge: {0}")]
    NonConvergence(String),

    #[error("degenerate data: {0}")]
    DegenerateData(String),

    #[error("unphysical input: {0}")]
    Unphysical(String),
}

pub type Result<T> = std::result::Result<T, Error>;
