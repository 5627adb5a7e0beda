//! Ball-covering experiments for finite models of Banach spaces.
//!
//! The numeric code is generic over [`scalar::Scalar`] (`f32` or `f64`);
//! the aliases below fix `f64`, with `F32` variants for single precision.

// `!(a > b)` rejects NaN along with the failing case.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod ck_cover;
pub mod harness;
pub mod op_cover;
pub mod scalar;
pub mod seed;
pub mod spaces;
pub mod topology;

pub type Space = spaces::SpaceModel<f64>;
pub type Covering = spaces::BallCovering<f64>;
pub type Certificate = spaces::CoverCertificate<f64>;
pub type Matrix = op_cover::Operator<f64>;

pub type SpaceF32 = spaces::SpaceModel<f32>;
pub type CoveringF32 = spaces::BallCovering<f32>;
pub type MatrixF32 = op_cover::Operator<f32>;
