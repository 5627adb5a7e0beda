//! Coverings of `C(K)` and `C(K, X)` over grid models of `K`: bump
//! constructions, the falsifier for coverings that miss a π-basis, transfers
//! back to `X` and `C(K)`, and the composition-operator complementation demo.

mod bump;
mod ckx;
mod complement;
mod witness;

use thiserror::Error;

use crate::spaces::SpaceError;
use crate::topology::TopologyError;

pub use bump::{
    build_ck_cover, certify_ck_sample, rigged_covering, superlevel_hypothesis, BumpFamily, BumpShape, CkCoverConfig,
    SampleOutcome,
};
pub use ckx::{
    build_ckx_cover, certify_ckx_sample, ckx_hypothesis, ckx_transfer, CkxForm, CkxTransfer, ScalarCertificate,
};
pub use complement::{complementation_pair, convergent_retraction, matmul, ComplementationRecord};
pub use witness::{level_set, pibasis_witness_search, FalsificationWitness, WitnessVerdict};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CkError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("center {index} has norm {norm} <= 1")]
    CenterTooSmall { index: usize, norm: f64 },
    #[error("map {map} is not continuous (open set {witness} has a non-open preimage)")]
    NotContinuous { map: String, witness: String },
    #[error("α ∘ β is not the identity")]
    NotRetraction,
    #[error("no scalar center with m <= {m_max} (closest misses by {min_excess})")]
    ScalarTransferExhausted { m_max: usize, min_excess: f64 },
    #[error(transparent)]
    Space(#[from] SpaceError),
    #[error(transparent)]
    Topology(#[from] TopologyError),
}
