use thiserror::Error;

/// Errors surfaced by the analysis and simulation operations.
///
/// Variants distinguish mathematical refusals (the input genuinely lies
/// outside the domain of a result, e.g. [`Error::NoCrossing`]) from
/// internal-consistency failures that indicate a broken invariant.
#[derive(Debug, Error)]
pub enum Error {
    #[error("non-finite input in {0}")]
    NonFinite(&'static str),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("bc = 0: the equation reduces to a single delay, which is not handled here")]
    UnsupportedSingleDelay,

    #[error("no crossing window: (|b|+|c|)^2 <= a^2")]
    NoWindow,

    #[error("no crossing frequency in the admissible window")]
    NoCrossing,

    #[error("first root of the crossing equation is a tangency, not a sign change")]
    TangencyAtFirstRoot,

    #[error("|tau| = {tau:.6} is not below the tangency threshold tau* = {tau_star:.6}")]
    TauTooLarge { tau: f64, tau_star: f64 },

    #[error("second crossing frequency {0:.6} active at the critical delays: uniqueness violated")]
    NonUniqueCrossing(f64),

    #[error("inconsistent crossing data: {0}")]
    InconsistentCrossing(String),

    #[error("derivative denominator below 1e-14 at the crossing")]
    DegenerateDerivative,

    #[error("resonance degeneracy: {0}")]
    ResonanceDegeneracy(&'static str),

    #[error("contour passes too close to a characteristic root (min |h| = {0:.3e})")]
    ContourRootCollision(f64),

    #[error("step h = {h} exceeds the delay lookahead limit {limit}")]
    StepExceedsDelay { h: f64, limit: f64 },

    #[error("solution became non-finite at t = {0}")]
    BlowUp(f64),

    #[error("no positive equilibrium: P <= delta + H")]
    NoPositiveEquilibrium,

    #[error("Taylor expansion nearly singular: equilibrium {0:.3e} too close to zero for n < 3")]
    NearSingularExpansion(f64),

    #[error("equilibrium is unstable for all delays: a + b + c < 0")]
    UnstableRegime,

    #[error("degenerate zero root: a + b + c = 0")]
    DegenerateZeroRoot,

    #[error("boundary parameter set: {0}")]
    BoundaryRegime(&'static str),

    #[error("internal consistency failure: {0}")]
    InternalInconsistency(String),
}

pub type Result<T> = std::result::Result<T, Error>;
