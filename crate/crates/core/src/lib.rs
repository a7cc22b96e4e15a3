//! Chern connection, curvature and flag curvature of pseudo-Finsler metrics.
//!
//! A pseudo-Finsler metric is a smooth, positively 2-homogeneous
//! `L(x, v)` on a conic open domain of the tangent bundle of a chart
//! `Ω ⊂ ℝⁿ`, with non-degenerate fundamental tensor `g_v`. For every
//! admissible reference vector field `V` the crate evaluates the
//! torsion-free, almost `g`-compatible affine connection `∇^V`, its
//! curvature `R^V`, the hh-curvature of the Chern connection, and the flag
//! curvature.
//!
//! All derivatives come from truncated Taylor jets ([`calculus`]), so
//! identities between these objects hold to roundoff; [`verify`] sweeps
//! them over random samples.

pub mod calculus;
pub mod connection;
pub mod curvature;
pub mod curves;
pub mod error;
pub mod geometry;
pub mod metrics;
pub mod verify;

pub use error::{Error, Result};
pub use metrics::{MetricField, TangentSample};
