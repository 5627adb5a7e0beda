use serde::Serialize;

use crate::scalar::Scalar;
use crate::spaces::{BallCovering, SpaceModel};
use crate::topology::PointSet;

use super::bump::{is_discrete_grid, BumpFamily, BumpShape};
use super::CkError;

/// A unit function that every ball of the covering misses.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(bound = "T: Scalar")]
pub struct FalsificationWitness<T> {
    pub open: PointSet,
    pub function: Vec<T>,
    /// `‖f - g_n‖` per center.
    pub distances: Vec<T>,
    pub center_norms: Vec<T>,
}

impl<T: Scalar> FalsificationWitness<T> {
    /// `‖f - g_n‖ >= ‖g_n‖` for every center.
    pub fn defeats_all(&self) -> bool {
        self.distances.iter().zip(&self.center_norms).all(|(d, c)| d >= c)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(bound = "T: Scalar")]
pub struct WitnessVerdict<T> {
    /// Largest `k` used, per center.
    pub k_used: Vec<usize>,
    /// Every candidate open contains some `A_{n,k}`.
    pub pibasis_relative: bool,
    pub witness: Option<FalsificationWitness<T>>,
}

/// `A_{n,k} = {τ : |g_n(τ)| > ‖g_n‖ - 1/k}`.
pub fn level_set<T: Scalar>(center: &[T], k: usize) -> PointSet {
    let norm = center.iter().fold(T::zero(), |m, x| m.max(x.abs()));
    let cut = norm - T::one() / T::from_usize(k).expect("small");
    PointSet::from_points(center.len(), (0..center.len()).filter(|&i| center[i].abs() > cut))
}

/// Smallest `k` with `A_{n,k}` equal to the argmax set of `|g_n|`.
fn stabilization_index<T: Scalar>(center: &[T]) -> usize {
    let norm = center.iter().fold(T::zero(), |m, x| m.max(x.abs()));
    let second = center
        .iter()
        .map(|x| x.abs())
        .filter(|&a| a < norm)
        .fold(T::neg_infinity(), T::max);
    if second == T::neg_infinity() {
        return 1;
    }
    // need 1/k <= norm - second
    let k = (T::one() / (norm - second)).ceil().to_usize().unwrap_or(usize::MAX);
    k.clamp(1, 1 << 20)
}

/// Looks for a candidate open containing no `A_{n,k}`; the unit bump on such
/// an open is at distance at least `‖g_n‖` from every center `g_n`.
pub fn pibasis_witness_search<T: Scalar>(
    c: &BallCovering<T>,
    candidate_opens: &[PointSet],
    k_max: usize,
) -> Result<WitnessVerdict<T>, CkError> {
    let SpaceModel::SupGrid { n, .. } = c.space else {
        return Err(CkError::InvalidParameter(
            "witness search needs a sup-grid covering".into(),
        ));
    };
    if k_max == 0 {
        return Err(CkError::InvalidParameter("k_max must be >= 1".into()));
    }
    let norms: Vec<T> = (0..c.len()).map(|i| c.center_norm(i)).collect();
    if let Some((index, norm)) = norms.iter().enumerate().find(|(_, &v)| !(v > T::one())) {
        return Err(CkError::CenterTooSmall {
            index,
            norm: norm.to_f64_lossy(),
        });
    }
    let mut k_used = Vec::with_capacity(c.len());
    let mut families: Vec<PointSet> = Vec::new();
    for b in &c.balls {
        let top = k_max.max(stabilization_index(&b.center));
        k_used.push(top);
        let mut prev: Option<PointSet> = None;
        for k in 1..=top {
            let a = level_set(&b.center, k);
            if prev.as_ref() != Some(&a) {
                families.push(a.clone());
            }
            prev = Some(a);
        }
    }
    let shape = if is_discrete_grid(&c.space) {
        BumpShape::Indicator
    } else {
        BumpShape::Tent
    };
    for u in candidate_opens {
        if u.universe() != n || u.is_empty() {
            return Err(CkError::InvalidParameter(
                "candidate open over the wrong grid or empty".into(),
            ));
        }
        if families.iter().any(|a| !a.is_empty() && a.is_subset(u)) {
            continue;
        }
        let fam = BumpFamily::new(n, vec![u.clone()], shape)?;
        let f: Vec<T> = fam.bump(0, T::one());
        let distances = c
            .balls
            .iter()
            .map(|b| {
                f.iter()
                    .zip(&b.center)
                    .fold(T::zero(), |m, (x, y)| m.max((*x - *y).abs()))
            })
            .collect();
        return Ok(WitnessVerdict {
            k_used,
            pibasis_relative: false,
            witness: Some(FalsificationWitness {
                open: u.clone(),
                function: f,
                distances,
                center_norms: norms,
            }),
        });
    }
    Ok(WitnessVerdict {
        k_used,
        pibasis_relative: true,
        witness: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ck_cover::{build_ck_cover, rigged_covering, CkCoverConfig};

    fn singletons(n: usize) -> Vec<PointSet> {
        (0..n).map(|i| PointSet::singleton(n, i)).collect()
    }

    #[test]
    fn genuine_cover_has_no_witness() {
        let c = build_ck_cover(&SpaceModel::<f64>::sup_grid(4), &CkCoverConfig::discrete(4, 1.2)).unwrap();
        let v = pibasis_witness_search(&c, &singletons(4), 3).unwrap();
        assert!(v.pibasis_relative && v.witness.is_none());
        for (i, b) in c.balls.iter().enumerate() {
            assert_eq!(level_set(&b.center, 1), PointSet::singleton(4, i / 2));
        }
    }

    #[test]
    fn rigged_cover_is_falsified() {
        let c = rigged_covering::<f64>(4, 3, 1.2).unwrap();
        let v = pibasis_witness_search(&c, &singletons(4), 3).unwrap();
        let w = v.witness.unwrap();
        assert_eq!(w.open, PointSet::singleton(4, 3));
        assert_eq!(w.function, vec![0.0, 0.0, 0.0, 1.0]);
        assert!(w.defeats_all());
    }

    #[test]
    fn level_sets_nest() {
        let g = [1.3, -0.2, 1.25, 0.9, -1.1];
        for k in 1..20 {
            assert!(level_set(&g, k + 1).is_subset(&level_set(&g, k)));
        }
    }
}
