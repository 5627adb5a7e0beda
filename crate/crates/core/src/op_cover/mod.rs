//! Operator-space coverings: induced norms, the `B(X, ℓ_p)` candidate
//! construction, rank-one Hilbert centers, covering transfers and
//! `ℓ_∞`-sums.

mod hilbert;
mod linf;
mod lp;
mod net;
mod norm;
mod transfer;

use thiserror::Error;

use crate::spaces::SpaceError;

pub use hilbert::{hilbert_rank_one_certify, HilbertCertificate};
pub use linf::{
    b_c0_covering, b_l1_covering, columns_as_linf_sum, linf_sum_cover, rows_as_linf_sum, IdentifiedCovering,
};
pub use lp::{
    certify_lp_operator, enumerate_lp_centers, lp_operator_covering, LpCenterCandidate, LpCertificate, LpConstants,
    LpOperatorCovering,
};
pub use net::{DualBallNet, NetIndex, SphereNet};
pub use norm::{
    ascent_operator_norm, norming_vector, operator_norm, top_singular_triple, AscentConfig, NormEstimate, NormMethod,
    Operator,
};
pub use transfer::{operator_cover_transfer, rank_one_operator, OperatorTransfer, TransferConfig};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OpCoverError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("operator norm {norm} is not 1")]
    NotNormalized { norm: f64 },
    #[error("no candidate inside the norm window")]
    EmptyWindow,
    #[error("net too coarse: need {required}, nearest point at {achieved}")]
    NetTooCoarse { required: f64, achieved: f64 },
    #[error("net has {points} points, limit {limit}")]
    NetTooLarge { points: f64, limit: usize },
    #[error("candidate norm {norm} outside window ({lo}, {hi})")]
    WindowMiss { norm: f64, lo: f64, hi: f64 },
    #[error("distance {distance} exceeds bound {bound}")]
    BoundViolated { distance: f64, bound: f64 },
    #[error("ball {index}: operator norm {norm} does not exceed radius {radius}")]
    NormingFailure { index: usize, norm: f64, radius: f64 },
    #[error("no separating functional: best min |g(x_n)| = {best}")]
    SeparationFailure { best: f64 },
    #[error(transparent)]
    Space(#[from] SpaceError),
}
