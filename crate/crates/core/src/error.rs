use thiserror::Error;

use crate::model::AtomId;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("atom {0} has zero mass")]
    ZeroMassAtom(AtomId),
    #[error("atom {atom}: mass {mass} differs from children total {children}")]
    AdditivityViolation { atom: AtomId, mass: f64, children: f64 },
    #[error("malformed model: {0}")]
    InvalidModel(String),
    #[error("midpoint relation fails at t = {t}")]
    MidpointMismatch { t: f64 },
    #[error("N_theta leaves [0,1] at theta = {theta}")]
    InvalidPath { theta: f64 },
    #[error("division by zero: {0}")]
    DivisionByZero(String),
    #[error("not quasiconcave: {0}")]
    NotQuasiconcave(String),
    #[error("Young function is not convex near t = {0}")]
    NonconvexYoung(f64),
    #[error("integral of 1/Phi diverges: {0}")]
    DivergentYoungTail(String),
    #[error("no positive L log L floor: {0}")]
    FloorViolated(String),
    #[error("t -> Psi(e^-t) is not convex after truncation near t = {0}")]
    NotConvexAfterTruncation(f64),
    #[error("C_alpha diverges")]
    DivergentPenalty,
    #[error("penalty invalid: {0}")]
    InvalidPenalty(String),
    #[error("operator normalization violated at atom {atom}: certificate {value}")]
    NormalizationViolated { atom: AtomId, value: f64 },
    #[error("power iteration did not converge; bracket [{lower}, {upper}]")]
    PowerIterationStall { lower: f64, upper: f64 },
    #[error("step function is not decreasing at index {0}")]
    NotDecreasing(usize),
    #[error("convexity data invalid: {0}")]
    ConvexityDataInvalid(String),
    #[error("singular point x = {0}")]
    SingularPoint(f64),
    #[error("quadrature failed on [{a}, {b}]")]
    QuadratureFailure { a: f64, b: f64 },
    #[error("hypothesis violated: {0}")]
    HypothesisViolated(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;
