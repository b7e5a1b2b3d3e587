use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("quadratic norm of the ordering vector is below tolerance (|rr| = {norm:e})")]
    ZeroQuadraticNorm { norm: f64 },

    #[error("gaussian integral diverges: real part of the quadratic form is not negative definite")]
    DivergentIntegral,

    #[error("ordering vector does not define a decaying kernel")]
    DivergentKernel,

    #[error("grids are not compatible: {0}")]
    MismatchedGrids(String),

    #[error("negative time t = {0}")]
    NegativeTime(f64),

    #[error("tabulated drive covers [{start}, {end}] but [0, {t}] was requested")]
    DriveDomain { t: f64, start: f64, end: f64 },

    #[error(
        "evolution kernel not normalizable at t = {t} (|M| = {m_abs}, nbar = {nbar}, discriminant = {discriminant:e})"
    )]
    KernelNotNormalizable {
        t: f64,
        m_abs: f64,
        nbar: f64,
        discriminant: f64,
    },

    #[error("output grid maps outside the convolved region (needs {needed:.3}, have {available:.3})")]
    ExtentTooSmall { needed: f64, available: f64 },

    #[error("integration blew up at t = {t} (max |entry| = {max_entry:e})")]
    BlowUp { t: f64, max_entry: f64 },

    #[error("series did not converge (last term norm {last_term_norm:e} > floor {floor:e})")]
    NonConvergence { last_term_norm: f64, floor: f64 },

    #[error("integrand tail does not decay (tail/peak = {ratio:e})")]
    TailDivergence { ratio: f64 },

    #[error("verification failed: {0}")]
    VerificationFailed(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for failures of the numerics themselves, as opposed to bad input or I/O.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::ZeroQuadraticNorm { .. }
                | Error::DivergentIntegral
                | Error::DivergentKernel
                | Error::KernelNotNormalizable { .. }
                | Error::ExtentTooSmall { .. }
                | Error::BlowUp { .. }
                | Error::NonConvergence { .. }
                | Error::TailDivergence { .. }
                | Error::VerificationFailed(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
