use thiserror::Error;

/// Violations of the structural invariants of a potential description.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum PotentialError {
    #[error("segment {index}: x_start ({x_start}) must be strictly less than x_end ({x_end})")]
    EmptySegment { index: usize, x_start: f64, x_end: f64 },
    #[error("gap between segment {index} (ends at {end}) and segment {next} (starts at {start})")]
    GapBetweenSegments { index: usize, next: usize, end: f64, start: f64 },
    #[error("segment {index} (ends at {end}) overlaps segment {next} (starts at {start})")]
    OverlappingSegments { index: usize, next: usize, end: f64, start: f64 },
    #[error("potential has no segments and no step point")]
    EmptyDomainWithNoStepPoint,
    #[error("step point given together with {count} segment(s)")]
    StepPointWithSegments { count: usize },
    #[error("non-finite value in {field}")]
    NonFinite { field: String },
    #[error("sampled potential needs at least 2 samples, got {count}")]
    TooFewSamples { count: usize },
    #[error("sample {index}: x ({x}) is not strictly greater than the previous sample ({prev})")]
    NonIncreasingSamples { index: usize, x: f64, prev: f64 },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error(transparent)]
    Potential(#[from] PotentialError),
    #[error("invalid model parameters: hbar = {hbar}, mass = {mass} (both must be positive and finite)")]
    InvalidParams { hbar: f64, mass: f64 },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("energy {e} coincides with potential level {u}")]
    DegenerateEnergy { e: f64, u: f64 },
    #[error("impedance pole at x = {x}")]
    PoleAtX { x: f64 },
    #[error("layer transform denominator vanishes (|den| = {magnitude:e})")]
    TransformPole { magnitude: f64 },
    #[error("invalid layer length {0}")]
    InvalidLength(f64),
    #[error("step size underflow at x = {x} (h = {h:e})")]
    StepSizeUnderflow { x: f64, h: f64 },
    #[error("non-finite integrator state at x = {x}")]
    NonFiniteState { x: f64 },
    #[error("energy {e} is below the incidence lead level {lead}")]
    EvanescentIncidence { e: f64, lead: f64 },
    #[error("energy grid is not strictly increasing at index {index}")]
    NonIncreasingGrid { index: usize },
    #[error("non-positive real impedance {re} at x = {x}")]
    NonPositiveRealPart { x: f64, re: f64 },
    #[error("no bound-state window: interior minimum {interior_min} is not below lead minimum {lead_min}")]
    EmptyWindow { interior_min: f64, lead_min: f64 },
    #[error("bracketing found {found} of {expected} bound states; increase scan_points")]
    BracketingExhausted {
        expected: usize,
        found: usize,
        profile: Vec<(f64, f64)>,
    },
    #[error("probe point {x} is outside the open interval ({a}, {b})")]
    InvalidProbe { x: f64, a: f64, b: f64 },
    #[error("probe point {x} sits on a singular point of the potential")]
    SingularProbePoint { x: f64 },
    #[error("cumulative quadrature diverged at x = {x}")]
    QuadratureDivergence { x: f64 },
    #[error("need at least {needed} samples, got {got}")]
    InsufficientSamples { needed: usize, got: usize },
}

impl Error {
    /// Short variant name, used in machine-readable error records.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Potential(p) => match p {
                PotentialError::EmptySegment { .. } => "EmptySegment",
                PotentialError::GapBetweenSegments { .. } => "GapBetweenSegments",
                PotentialError::OverlappingSegments { .. } => "OverlappingSegments",
                PotentialError::EmptyDomainWithNoStepPoint => "EmptyDomainWithNoStepPoint",
                PotentialError::StepPointWithSegments { .. } => "StepPointWithSegments",
                PotentialError::NonFinite { .. } => "NonFinite",
                PotentialError::TooFewSamples { .. } => "TooFewSamples",
                PotentialError::NonIncreasingSamples { .. } => "NonIncreasingSamples",
            },
            Error::InvalidParams { .. } => "InvalidParams",
            Error::InvalidConfig(_) => "InvalidConfig",
            Error::DegenerateEnergy { .. } => "DegenerateEnergy",
            Error::PoleAtX { .. } => "PoleAtX",
            Error::TransformPole { .. } => "TransformPole",
            Error::InvalidLength(_) => "InvalidLength",
            Error::StepSizeUnderflow { .. } => "StepSizeUnderflow",
            Error::NonFiniteState { .. } => "NonFiniteState",
            Error::EvanescentIncidence { .. } => "EvanescentIncidence",
            Error::NonIncreasingGrid { .. } => "NonIncreasingGrid",
            Error::NonPositiveRealPart { .. } => "NonPositiveRealPart",
            Error::EmptyWindow { .. } => "EmptyWindow",
            Error::BracketingExhausted { .. } => "BracketingExhausted",
            Error::InvalidProbe { .. } => "InvalidProbe",
            Error::SingularProbePoint { .. } => "SingularProbePoint",
            Error::QuadratureDivergence { .. } => "QuadratureDivergence",
            Error::InsufficientSamples { .. } => "InsufficientSamples",
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
