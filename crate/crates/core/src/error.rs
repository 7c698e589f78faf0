use thiserror::Error;

/// Errors raised by channel algebra, inversion and analysis routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("input is not Hermitian (residual {0:e})")]
    NonHermitianInput(f64),

    #[error("invalid density matrix: {0}")]
    InvalidState(String),

    #[error("input and output dimensions differ ({dim_in} vs {dim_out})")]
    DimensionMismatch { dim_in: usize, dim_out: usize },

    #[error("channel is not invertible (smallest singular value {0:e})")]
    NonInvertibleChannel(f64),

    #[error("generalized eigenvector basis is ill-conditioned (cond {0:e})")]
    IllConditionedBasis(f64),

    #[error("eigenvalue clusters too close to separate (distance {0:e})")]
    ClusterAmbiguity(f64),

    #[error("Jordan reconstruction residual {0:e} exceeds tolerance")]
    JordanReconstruction(f64),

    #[error("Drazin backends disagree (difference {0:e})")]
    BackendDisagreement(f64),

    #[error("Drazin postcondition `{check}` violated (residual {residual:e})")]
    DrazinPostcondition { check: &'static str, residual: f64 },

    #[error("parameter out of range: {0}")]
    ParamOutOfRange(String),

    #[error("operator is not unitary (residual {0:e})")]
    NonUnitaryInput(f64),

    #[error("unknown fixture `{0}`")]
    UnknownFixture(String),

    #[error("estimated noise of layer {layer} is not invertible")]
    NonInvertibleEstimate { layer: usize },

    #[error("true noise of layer {layer} is not invertible")]
    NonInvertibleNoise { layer: usize },

    #[error("first-order state is not Hermitian (residual {0:e})")]
    InvalidFirstOrderState(f64),

    #[error("extrapolation scale factors are degenerate: {0}")]
    DegenerateScales(String),

    #[error("target lies outside the span of the basis (residual {0:e})")]
    TargetOutsideSpan(f64),

    #[error("readout matrix is singular (smallest singular value {0:e})")]
    SingularReadoutMatrix(f64),

    #[error("stochastic matrix is singular (smallest singular value {0:e})")]
    SingularChannel(f64),

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("bit string length {0} is not a multiple of 3")]
    LengthNotMultipleOf3(usize),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// True for failures caused by floating-point conditioning rather than bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::IllConditionedBasis(_)
                | Error::ClusterAmbiguity(_)
                | Error::JordanReconstruction(_)
                | Error::BackendDisagreement(_)
                | Error::DrazinPostcondition { .. }
        )
    }
}
