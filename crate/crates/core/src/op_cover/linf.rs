use serde::Serialize;

use crate::scalar::Scalar;
use crate::spaces::{classify_covering, norm_of, standard_covering, Ball, BallCovering, Exponent, SpaceModel};

use super::norm::Operator;
use super::OpCoverError;

/// Covering of the sphere of `(⊕ X_k)_∞` from admissible coverings of each
/// `X_k`. A block ball `(c, r)` with margin `μ = ‖c‖ - r` is pushed out to
/// `c' = t c`, `t = max(1, (1+μ)/‖c‖)`, with radius `‖c'‖ - μ`, and embedded
/// with zeros elsewhere. The output gap equals the least block margin.
pub fn linf_sum_cover<T: Scalar>(covs: &[BallCovering<T>]) -> Result<BallCovering<T>, OpCoverError> {
    if covs.is_empty() {
        return Err(OpCoverError::InvalidParameter("no block coverings".into()));
    }
    for (k, c) in covs.iter().enumerate() {
        if !classify_covering(c).admissible {
            return Err(OpCoverError::InvalidParameter(format!(
                "block {k} covering is not admissible (gap {})",
                c.origin_gap
            )));
        }
    }
    let blocks: Vec<SpaceModel<T>> = covs.iter().map(|c| c.space.clone()).collect();
    let space = SpaceModel::LinfSum { blocks };
    let ranges = space.block_ranges();
    let dim = space.dim();
    let mut balls = Vec::new();
    for (c, range) in covs.iter().zip(&ranges) {
        for (i, b) in c.balls.iter().enumerate() {
            let norm = c.center_norm(i);
            let mu = norm - b.radius;
            // t = 1 keeps the ball as is, so the block margin carries over exactly
            let push = (T::one() + mu) / norm;
            let t = if push <= T::one() + T::lit(1e-12) {
                T::one()
            } else {
                push
            };
            let mut center = vec![T::zero(); dim];
            for (slot, &x) in center[range.clone()].iter_mut().zip(&b.center) {
                *slot = x * t;
            }
            let radius = if t == T::one() {
                b.radius
            } else {
                norm_of(&c.space, &center[range.clone()])? - mu
            };
            balls.push(Ball::new(center, radius)?);
        }
    }
    Ok(BallCovering::new(space, balls)?)
}

/// Columns of `A` as a vector of `(⊕ ℓ_1^m)_∞`; its norm is `‖A‖_{1→1}`.
pub fn columns_as_linf_sum<T: Scalar>(a: &Operator<T>) -> (SpaceModel<T>, Vec<T>) {
    let blocks = vec![
        SpaceModel::Lp {
            n: a.rows(),
            p: Exponent::finite(1.0)
        };
        a.cols()
    ];
    let v = (0..a.cols()).flat_map(|j| a.column(j)).collect();
    (SpaceModel::LinfSum { blocks }, v)
}

/// Rows of `A` as a vector of `(⊕ ℓ_1^n)_∞`; its norm is `‖A‖_{∞→∞}`.
pub fn rows_as_linf_sum<T: Scalar>(a: &Operator<T>) -> (SpaceModel<T>, Vec<T>) {
    let blocks = vec![
        SpaceModel::Lp {
            n: a.cols(),
            p: Exponent::finite(1.0)
        };
        a.rows()
    ];
    (SpaceModel::LinfSum { blocks }, a.data().to_vec())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(bound = "T: Scalar")]
pub struct IdentifiedCovering<T> {
    /// Covering in the `ℓ_∞`-sum coordinates.
    pub covering: BallCovering<T>,
    /// `true`: blocks are columns (`B(ℓ_1^n, ℓ_1^m)`); `false`: rows (`B(ℓ_∞^n, ℓ_∞^m)`).
    pub by_columns: bool,
}

/// Covering of the sphere of `B(ℓ_1^n, ℓ_1^m)` through the column identification.
pub fn b_l1_covering<T: Scalar>(m: usize, n: usize) -> Result<IdentifiedCovering<T>, OpCoverError> {
    let block = standard_covering(&SpaceModel::Lp {
        n: m,
        p: Exponent::finite(1.0),
    })?;
    Ok(IdentifiedCovering {
        covering: linf_sum_cover(&vec![block; n])?,
        by_columns: true,
    })
}

/// Covering of the sphere of `B(ℓ_∞^n, ℓ_∞^m)` through the row identification.
pub fn b_c0_covering<T: Scalar>(m: usize, n: usize) -> Result<IdentifiedCovering<T>, OpCoverError> {
    let block = standard_covering(&SpaceModel::Lp {
        n,
        p: Exponent::finite(1.0),
    })?;
    Ok(IdentifiedCovering {
        covering: linf_sum_cover(&vec![block; m])?,
        by_columns: false,
    })
}
