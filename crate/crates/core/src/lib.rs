//! Truncating analytic maps to their Taylor polynomials and checking,
//! numerically, that the zero sets stay (tangentially) s-equivalent near an
//! isolated singularity at the origin.
//!
//! The numeric core is generic over [`Scalar`] (`f32` or `f64`); sampling
//! and the verification pipeline run in `f64`. The aliases below fix the
//! scalar to `f64`.

pub mod expr;
pub mod geometry;
pub mod jets;
pub mod linalg;
pub mod metrics;
pub mod sampler;
pub mod scalar;
pub mod verify;

pub use expr::{AnalyticMap, EvalError, Expr, Func, ParseError};
pub use scalar::Scalar;

pub type Series = jets::TruncatedSeries<f64>;
pub type Frame = geometry::NormalFrame<f64>;
pub type Fit = metrics::ExponentFit<f64>;
pub type Mat = linalg::Matrix<f64>;
