use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FrameError {
    #[error("point ({x}, {y}) lies on the singular set")]
    SingularPoint { x: f64, y: f64 },
    #[error("{operation} is not defined for the {variant} frame")]
    UnsupportedFrame { variant: &'static str, operation: &'static str },
    #[error("curve is not admissible: length diverges at t = {t}")]
    NotAdmissible { t: f64 },
    #[error("bad curve: {0}")]
    BadCurve(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeodesicError {
    #[error("Hamiltonian drift {drift:.3e} exceeds {limit:.3e}; reduce dt (currently {dt})")]
    StepSizeTooLarge { drift: f64, limit: f64, dt: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error(transparent)]
    Frame(#[from] FrameError),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpectralError {
    #[error("gauge transform needs an F2 or alpha-Grushin frame, got {0}")]
    UnsupportedFrame(&'static str),
    #[error("bad grid: {0}")]
    BadGrid(String),
    #[error("inverse iteration did not converge for eigenpair {index} (residual {residual:.3e})")]
    ConvergenceFailure { index: usize, residual: f64 },
    #[error("inverse-square coefficient {0} is at or below the Hardy threshold -1/4")]
    OutOfRange(f64),
    #[error("indicial exponents {s_plus} and {s_minus} are too close to separate")]
    FitIllConditioned { s_plus: f64, s_minus: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvolutionError {
    #[error("bad grid: {0}")]
    BadGrid(String),
    #[error("linear solver stalled after {iterations} iterations (relative residual {residual:.3e})")]
    SolverDiverged { iterations: usize, residual: f64 },
    #[error("transmission study is inconclusive: fractions {fractions:?}")]
    Inconclusive { fractions: Vec<f64> },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}
