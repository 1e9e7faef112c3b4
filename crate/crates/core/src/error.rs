use crate::algebra::AlgebraTag;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("algebra mismatch: {left:?} vs {right:?}")]
    AlgebraMismatch { left: AlgebraTag, right: AlgebraTag },

    #[error("division by an element of squared norm {norm_sqr:e}")]
    DivisionByZero { norm_sqr: f64 },

    #[error("{dim} coefficients supplied, {tag:?} needs {expected}")]
    CoefficientCount {
        tag: AlgebraTag,
        dim: usize,
        expected: usize,
    },

    #[error("not a unit imaginary element (real part {real:e}, norm {norm:e})")]
    NotImaginaryUnit { real: f64, norm: f64 },

    #[error("arity mismatch: {left} vs {right}")]
    ArityMismatch { left: usize, right: usize },

    #[error("axis {axis} out of range for arity {arity}")]
    AxisOutOfRange { axis: usize, arity: usize },

    #[error("point is not in the slice cone: imaginary parts of coordinates {first} and {second} are not parallel")]
    NotInSliceCone { first: usize, second: usize },

    #[error("imaginary units too close for the representation formula (|J-K| = {distance:e})")]
    DegenerateUnits { distance: f64 },

    #[error("spherical derivative requested at a real point")]
    RealPoint,

    #[error("stem function needs {required:?} smoothness, has {actual:?}")]
    Smoothness {
        required: crate::stem::Smoothness,
        actual: crate::stem::Smoothness,
    },

    #[error("restriction along axis {axis} has non-real anchor at coordinate {coordinate}")]
    NonIntrinsicRestriction { axis: usize, coordinate: usize },

    #[error("stem function is not complex intrinsic (violation {violation:e})")]
    NotIntrinsic { violation: f64 },

    #[error("coordinate {coordinate} of the evaluation point is within {distance:e} of its circle (minimum {minimum:e})")]
    PointTooCloseToBoundary {
        coordinate: usize,
        distance: f64,
        minimum: f64,
    },

    #[error("point lies outside the stem function's domain")]
    OutsideDomain,

    #[error("point lies in a different slice plane than the domain")]
    SliceMismatch,

    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("invalid quadrature: {0}")]
    InvalidQuadrature(String),

    #[error("Hartogs extension requires at least two variables")]
    HartogsRequiresSeveralVariables,

    #[error("parse error: {0}")]
    Parse(String),
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
