use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Coarse classification used for process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Config,
    Numerical,
    Io,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("argument outside domain: {0}")]
    Domain(String),
    #[error("empty input: {0}")]
    Empty(String),
    #[error("{what}: root not bracketed on [{lo:e}, {hi:e}] (f = {f_lo:e}, {f_hi:e})")]
    NotBracketed { what: &'static str, lo: f64, hi: f64, f_lo: f64, f_hi: f64 },
    #[error("{what}: root finder stalled after {iterations} iterations, residual {residual:e} > {tolerance:e}")]
    NoConvergence { what: &'static str, iterations: usize, residual: f64, tolerance: f64 },
    #[error("quadrature on [{a:e}, {b:e}] did not reach tolerance (estimate {estimate:e})")]
    Quadrature { a: f64, b: f64, estimate: f64 },
    #[error("grid does not cover the shock layer: captured mass {captured:e} < required {required:e}")]
    Coverage { captured: f64, required: f64 },
    #[error("fit quality too low: R^2 = {r_squared:.4} < {threshold}")]
    FitQuality { r_squared: f64, threshold: f64 },
    #[error("CFL violated: dt = {dt:e} exceeds stable limit {limit:e}")]
    Cfl { dt: f64, limit: f64 },
    #[error("blow-up at t = {t}: {detail}")]
    BlowUp { t: f64, detail: String },
    #[error("non-finite value: {0}")]
    NonFinite(String),
    #[error("i/o: {0}")]
    Io(String),
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::Config(_) | Error::Domain(_) | Error::Empty(_) => ErrorClass::Config,
            Error::Io(_) => ErrorClass::Io,
            _ => ErrorClass::Numerical,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}
