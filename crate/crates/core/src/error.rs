use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Coarse failure category, used by front ends to pick an exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    /// Malformed or inconsistent input data.
    Input,
    /// The model is outside the class an operation is defined for.
    ModelClass,
    /// A numerical procedure failed or could not reach its accuracy target.
    Numerical,
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("non-finite entry in {0}")]
    NonFinite(&'static str),
    #[error("matrix is not Hurwitz (max Re(eig) = {max_real:.3e}, margin {margin:.3e})")]
    NotHurwitz { max_real: f64, margin: f64 },
    #[error("ill-conditioned problem: {0}")]
    IllConditioned(String),
    #[error("eigenvalue iteration failed to converge after {0} iterations")]
    NoConvergence(usize),
    #[error("no stabilizing Riccati solution: {0}")]
    NoStabilizingSolution(String),
    #[error("nonzero feedthrough D (largest entry {0:.3e})")]
    NonzeroFeedthrough(f64),
    #[error("H-infinity bracket failure: upper bound {0:.6e} still infeasible")]
    BracketFailure(f64),
    #[error("system is not lossless (residuals {residual_a:.3e}, {residual_b:.3e})")]
    NotLossless { residual_a: f64, residual_b: f64 },
    #[error("storage matrix is not positive definite (min eigenvalue {0:.3e})")]
    NotPositiveDefinite(f64),
    #[error("storage matrix not unique (nullspace dimension {0}); realization is not minimal")]
    NotUnique(usize),
    #[error("feedthrough is not skew-symmetric (|D + D^T| = {0:.3e})")]
    SkewFeedthroughViolated(f64),
    #[error("tr(CB) = {0:.3e} is negative")]
    NegativeTrace(f64),
    #[error("ill-posed interconnection: I - D_K D_yu is singular (sigma_min = {0:.3e})")]
    IllPosedLoop(f64),
    #[error("network is disconnected: {0}")]
    Disconnected(String),
    #[error("load angle {angle:.4} rad on line {i}-{j} is outside (-pi/2, pi/2)")]
    LoadAngleOutOfRange { i: usize, j: usize, angle: f64 },
    #[error("edge weight {weight:.3e} on line {i}-{j} is not positive")]
    NonpositiveWeight { i: usize, j: usize, weight: f64 },
    #[error("internal-bus Laplacian block is singular")]
    SingularInternalBlock,
    #[error("reduced Laplacian has rank {rank}, expected {expected}")]
    RankDeficient { rank: usize, expected: usize },
    #[error("nullspace of reduced Laplacian is not spanned by the ones vector (deviation {0:.3e})")]
    NullspaceMismatch(f64),
    #[error("inertia must be positive, got {0}")]
    NonpositiveInertia(f64),
    #[error("susceptance sizing did not converge in {0} iterations")]
    InfeasibleSizing(usize),
    #[error("generator bus {0} has no rated power")]
    MissingRatedPower(usize),
    #[error("graph is not connected")]
    NotConnected,
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("unknown bus id {0}")]
    UnknownBus(usize),
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        use Error::*;
        match self {
            DimensionMismatch(_) | NonFinite(_) | InvalidConfig(_) | UnknownBus(_)
            | MissingRatedPower(_) => ErrorClass::Input,
            NotLossless { .. }
            | NotPositiveDefinite(_)
            | NotUnique(_)
            | SkewFeedthroughViolated(_)
            | NegativeTrace(_)
            | NonzeroFeedthrough(_)
            | NotHurwitz { .. }
            | Disconnected(_)
            | LoadAngleOutOfRange { .. }
            | NonpositiveWeight { .. }
            | NonpositiveInertia(_)
            | NotConnected => ErrorClass::ModelClass,
            IllConditioned(_)
            | NoConvergence(_)
            | NoStabilizingSolution(_)
            | BracketFailure(_)
            | IllPosedLoop(_)
            | SingularInternalBlock
            | RankDeficient { .. }
            | NullspaceMismatch(_)
            | InfeasibleSizing(_) => ErrorClass::Numerical,
        }
    }
}
