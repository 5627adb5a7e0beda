//! Normed-space models, sphere sampling and ball coverings.

mod covering;
mod model;
mod sample;

use thiserror::Error;

pub use covering::{
    certify_point, certify_point_best, classify_covering, rescale_covering, rescale_covering_to, scaling_margin,
    standard_covering, Ball, BallCovering, Classification, CoverCertificate,
};
pub use model::{norm_of, Exponent, GridMode, SpaceModel};
pub use sample::{realized_slope, sample_sphere, sample_sphere_with, SphereSample};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpaceError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    /// No ball contains the point; carries `min_i (‖v - c_i‖ - r_i)`.
    #[error("point not covered (closest ball misses by {min_excess})")]
    NotCovered { min_excess: f64 },
}
