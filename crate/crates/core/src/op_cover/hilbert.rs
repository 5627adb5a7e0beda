use serde::Serialize;

use crate::scalar::{Scalar, Strictness};

use super::net::{NetIndex, SphereNet};
use super::norm::{operator_norm, top_singular_triple, Operator};
use super::OpCoverError;

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(bound = "T: Scalar")]
pub struct HilbertCertificate<T> {
    pub lambda: T,
    pub delta: T,
    pub sigma1: T,
    pub left: NetIndex,
    pub right: NetIndex,
    /// `λ b_n ⊗ b_m`, row-major.
    pub center: Vec<T>,
    pub distance: T,
    /// `1 + (2λ+2)δ`
    pub bound: T,
    /// `(1+λ)/2`
    pub radius: T,
    /// `λ - radius = (λ-1)/2`
    pub gap: T,
    pub check: Strictness,
}

/// Certifies a norm-one `A` on `ℓ_2` against the rank-one centers `λ b ⊗ b'`
/// with `b, b'` from a Euclidean sphere net.
pub fn hilbert_rank_one_certify<T: Scalar>(
    a: &Operator<T>,
    lambda: T,
    net_left: &SphereNet<T>,
    net_right: &SphereNet<T>,
) -> Result<HilbertCertificate<T>, OpCoverError> {
    let (one, two) = (T::one(), T::lit(2.0));
    if a.q.value() != two || a.p.value() != two {
        return Err(OpCoverError::InvalidParameter(
            "Hilbert certificate needs q = p = 2".into(),
        ));
    }
    if !(one < lambda && lambda < two) {
        return Err(OpCoverError::InvalidParameter(format!(
            "λ = {lambda} must lie in (1, 2)"
        )));
    }
    if net_left.n != a.rows() || net_right.n != a.cols() {
        return Err(OpCoverError::InvalidParameter(
            "net dimensions do not match the operator".into(),
        ));
    }
    let required = (lambda - one) / (T::lit(4.0) * lambda + T::lit(4.0));
    let delta = net_left.euclidean_mesh().max(net_right.euclidean_mesh());
    if delta > required * T::lit(1.0 + 1e-12) {
        return Err(OpCoverError::NetTooCoarse {
            required: required.to_f64_lossy(),
            achieved: delta.to_f64_lossy(),
        });
    }
    let (sigma1, u, v) = top_singular_triple(a);
    if (sigma1 - one).abs() > T::lit(1e-9) {
        return Err(OpCoverError::NotNormalized {
            norm: sigma1.to_f64_lossy(),
        });
    }
    let (left, bn) = net_left.nearest(&u);
    let (right, bm) = net_right.nearest(&v);
    let center = Operator::rank_one(&bn, &bm, a.q, a.p).scaled(lambda);
    let distance = operator_norm(&a.minus(&center)).value;
    let bound = one + (two * lambda + two) * delta;
    let radius = (one + lambda) / two;
    let check = Strictness::of_slack(bound - distance);
    if !check.holds() {
        return Err(OpCoverError::BoundViolated {
            distance: distance.to_f64_lossy(),
            bound: bound.to_f64_lossy(),
        });
    }
    Ok(HilbertCertificate {
        lambda,
        delta,
        sigma1,
        left,
        right,
        center: center.data().to_vec(),
        distance,
        bound,
        radius,
        gap: lambda - radius,
        check,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn nets(n: usize) -> SphereNet<f64> {
        SphereNet::euclidean(n, 0.05).unwrap()
    }

    #[test]
    fn rank_one_projection() {
        let a = Operator::<f64>::square_exp(vec![vec![1.0, 0.0], vec![0.0, 0.0]], 2.0).unwrap();
        let c = hilbert_rank_one_certify(&a, 1.5, &nets(2), &nets(2)).unwrap();
        assert!((c.distance - 0.5).abs() < 1e-12);
        assert_eq!(c.radius, 1.25);
    }

    #[test]
    fn identity_is_degenerate_but_certified() {
        let a = Operator::<f64>::square_exp(vec![vec![1.0, 0.0], vec![0.0, 1.0]], 2.0).unwrap();
        let c = hilbert_rank_one_certify(&a, 1.5, &nets(2), &nets(2)).unwrap();
        assert!((c.distance - 1.0).abs() < 1e-12);
        assert!(c.distance <= c.radius);
    }

    #[test]
    fn coarse_net_rejected() {
        let a = Operator::<f64>::square_exp(vec![vec![1.0, 0.0], vec![0.0, 0.0]], 2.0).unwrap();
        let coarse = SphereNet::euclidean(2, 0.5).unwrap();
        assert!(matches!(
            hilbert_rank_one_certify(&a, 1.5, &coarse, &coarse),
            Err(OpCoverError::NetTooCoarse { .. })
        ));
    }
}
