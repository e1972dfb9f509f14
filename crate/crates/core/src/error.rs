use std::fmt;

use thiserror::Error;

/// Optional `(i, j)` face label used in error messages.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FaceLabel(pub Option<(usize, usize)>);

impl fmt::Display for FaceLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            Some((i, j)) => write!(f, "face ({i},{j})"),
            None => write!(f, "unlabeled quad"),
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("index ({i},{j}) out of range for a {m}x{n} net")]
    IndexOutOfRange { i: usize, j: usize, m: usize, n: usize },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("invalid net: {0}")]
    InvalidNet(String),

    #[error("vertex ({i},{j}) has non-finite coordinates")]
    NonFinite { i: usize, j: usize },

    #[error("{face} is not planar (residual {residual:.3e})")]
    NonPlanar { face: FaceLabel, residual: f64 },

    #[error("{face} is not strictly convex")]
    NonConvex { face: FaceLabel },

    #[error("{face} is degenerate: {reason}")]
    Degenerate { face: FaceLabel, reason: String },

    #[error("not parallel: {0}")]
    NotParallel(String),

    #[error("collinear input: {0}")]
    Collinear(String),

    #[error("vertex ({i},{j}) is on the boundary; an interior vertex is required")]
    BoundaryVertex { i: usize, j: usize },

    #[error("{face}: simple-ratio invariant violated ({detail})")]
    FrameInvariant { face: FaceLabel, detail: String },

    #[error("class ({class}) condition violated at {location} (residual {residual:.3e})")]
    ClassCondition {
        class: &'static str,
        location: String,
        residual: f64,
    },

    #[error("{what} must be positive, got {value}")]
    NonPositive { what: String, value: f64 },

    #[error("edge scale {scale} outside the admissible interval ({min}, {max})")]
    Inadmissible { scale: f64, min: f64, max: f64 },

    #[error("area not preserved at face ({i},{j}): relative residual {residual:.3e}")]
    AreaResidual { i: usize, j: usize, residual: f64 },

    #[error("forced vertex ({i},{j}) inconsistent: line residual {residual:.3e}")]
    ForcedVertex { i: usize, j: usize, residual: f64 },

    #[error("parameter out of domain: {0}")]
    OutOfDomain(String),

    #[error("face ({i},{j}) lies in an isotropic (vertical) plane")]
    IsotropicPlane { i: usize, j: usize },

    #[error("not a cone-cylinder net (residual {residual:.3e})")]
    NotConeCylinder { residual: f64 },

    #[error("quadrature did not converge on [{a}, {b}] (error estimate {estimate:.3e})")]
    Quadrature { a: f64, b: f64, estimate: f64 },

    #[error("invalid input: {0}")]
    Input(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
