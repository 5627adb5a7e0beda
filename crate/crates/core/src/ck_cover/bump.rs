use serde::Serialize;

use crate::scalar::{Scalar, STRICT_SLACK};
use crate::spaces::{certify_point_best, Ball, BallCovering, CoverCertificate, GridMode, SpaceError, SpaceModel};
use crate::topology::PointSet;

use super::CkError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BumpShape {
    /// Constant on the member.
    Indicator,
    /// Hat peaking at the member's middle node, positive on the member only.
    Tent,
}

/// Open sets of the grid `K` (as node sets) carrying one bump each.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BumpFamily {
    pub nodes: usize,
    pub members: Vec<PointSet>,
    pub shape: BumpShape,
}

impl BumpFamily {
    pub fn new(nodes: usize, members: Vec<PointSet>, shape: BumpShape) -> Result<Self, CkError> {
        if members.is_empty() {
            return Err(CkError::InvalidParameter("bump family is empty".into()));
        }
        for (i, m) in members.iter().enumerate() {
            if m.universe() != nodes || m.is_empty() {
                return Err(CkError::InvalidParameter(format!(
                    "member {i} is empty or over the wrong grid"
                )));
            }
        }
        Ok(BumpFamily { nodes, members, shape })
    }

    pub fn singletons(nodes: usize) -> Self {
        BumpFamily {
            nodes,
            members: (0..nodes).map(|i| PointSet::singleton(nodes, i)).collect(),
            shape: BumpShape::Indicator,
        }
    }

    /// Dyadic node intervals `[k/2^l, (k+1)/2^l]` of length at least
    /// `1/(8 slope)`, for nodes at `i/(n-1)`.
    pub fn dyadic(nodes: usize, slope: f64) -> Result<Self, CkError> {
        if nodes < 2 || !(slope > 0.0) {
            return Err(CkError::InvalidParameter(format!(
                "dyadic family needs n >= 2 and slope > 0, got {nodes}, {slope}"
            )));
        }
        let depth = (8.0 * slope).log2().floor().max(0.0) as u32;
        let span = (nodes - 1) as u64;
        let mut members: Vec<PointSet> = Vec::new();
        for level in 0..=depth.min(40) {
            let parts = 1u64 << level;
            for k in 0..parts {
                let set = PointSet::from_points(
                    nodes,
                    (0..nodes).filter(|&i| {
                        let x = i as u64 * parts;
                        k * span <= x && x <= (k + 1) * span
                    }),
                );
                if !set.is_empty() && !members.contains(&set) {
                    members.push(set);
                }
            }
        }
        Ok(BumpFamily {
            nodes,
            members,
            shape: BumpShape::Tent,
        })
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Nonnegative bump on member `index` with maximum `peak`, zero off it.
    pub fn bump<T: Scalar>(&self, index: usize, peak: T) -> Vec<T> {
        let member = &self.members[index];
        let mut f = vec![T::zero(); self.nodes];
        match self.shape {
            BumpShape::Indicator => {
                for i in member.iter() {
                    f[i] = peak;
                }
            }
            BumpShape::Tent => {
                let nodes: Vec<usize> = member.iter().collect();
                let mid = nodes[(nodes.len() - 1) / 2];
                let lo = nodes[0];
                let hi = *nodes.last().expect("nonempty");
                let w = T::from_usize((mid - lo).max(hi - mid) + 1).expect("small");
                for i in nodes {
                    let d = T::from_usize(i.abs_diff(mid)).expect("small");
                    f[i] = peak * (T::one() - d / w);
                }
            }
        }
        f
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(bound = "T: Scalar")]
pub struct CkCoverConfig<T> {
    pub lambda: T,
    pub family: BumpFamily,
}

impl<T: Scalar> CkCoverConfig<T> {
    pub fn discrete(nodes: usize, lambda: T) -> Self {
        CkCoverConfig {
            lambda,
            family: BumpFamily::singletons(nodes),
        }
    }
}

fn grid_nodes<T: Scalar>(k: &SpaceModel<T>) -> Result<usize, CkError> {
    match k {
        SpaceModel::SupGrid { n, .. } => Ok(*n),
        _ => Err(CkError::InvalidParameter("K must be a sup-grid model".into())),
    }
}

/// Centers `+f_1, -f_1, +f_2, ...` with `‖f_n‖ = λ`, all radii `max{λ - 1/2, 1}`.
pub fn build_ck_cover<T: Scalar>(k: &SpaceModel<T>, cfg: &CkCoverConfig<T>) -> Result<BallCovering<T>, CkError> {
    let n = grid_nodes(k)?;
    let lambda = cfg.lambda;
    if !(lambda > T::one() && lambda <= T::lit(1.5)) {
        return Err(CkError::InvalidParameter(format!("λ = {lambda} must lie in (1, 3/2]")));
    }
    if cfg.family.nodes != n {
        return Err(CkError::InvalidParameter(format!(
            "family over {} nodes for a grid of {n}",
            cfg.family.nodes
        )));
    }
    let radius = (lambda - T::lit(0.5)).max(T::one());
    let mut balls = Vec::with_capacity(2 * cfg.family.len());
    for i in 0..cfg.family.len() {
        let f = cfg.family.bump(i, lambda);
        let neg = f.iter().map(|&x| -x).collect();
        balls.push(Ball::new(f, radius)?);
        balls.push(Ball::new(neg, radius)?);
    }
    Ok(BallCovering::new(k.clone(), balls)?)
}

/// Some member lies inside `{g > 1/2}` or inside `{g < -1/2}`.
pub fn superlevel_hypothesis<T: Scalar>(family: &BumpFamily, g: &[T]) -> bool {
    let half = T::lit(0.5);
    family
        .members
        .iter()
        .any(|u| u.iter().all(|i| g[i] > half) || u.iter().all(|i| g[i] < -half))
}

/// Result of certifying one sphere sample.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case", tag = "outcome", bound = "T: Scalar")]
pub enum SampleOutcome<T> {
    Certified(CoverCertificate<T>),
    /// Not covered, and the sample is outside the covering's hypothesis.
    OutsideHypothesis {
        min_excess: f64,
    },
    /// Not covered although the hypothesis holds.
    Falsified {
        min_excess: f64,
    },
}

impl<T: Scalar> SampleOutcome<T> {
    pub fn certificate(&self) -> Option<&CoverCertificate<T>> {
        match self {
            SampleOutcome::Certified(c) => Some(c),
            _ => None,
        }
    }
}

pub(crate) fn classify_outcome<T: Scalar>(
    c: &BallCovering<T>,
    v: &[T],
    hypothesis: impl FnOnce() -> bool,
) -> Result<SampleOutcome<T>, CkError> {
    match certify_point_best(c, v) {
        Ok(cert) => Ok(SampleOutcome::Certified(cert)),
        Err(SpaceError::NotCovered { min_excess }) => Ok(if hypothesis() {
            SampleOutcome::Falsified { min_excess }
        } else {
            SampleOutcome::OutsideHypothesis { min_excess }
        }),
        Err(e) => Err(e.into()),
    }
}

/// Certify a unit `g ∈ C(K)` against a bump covering built from `family`.
pub fn certify_ck_sample<T: Scalar>(
    c: &BallCovering<T>,
    family: &BumpFamily,
    g: &[T],
) -> Result<SampleOutcome<T>, CkError> {
    classify_outcome(c, g, || superlevel_hypothesis(family, g))
}

/// Covering whose centers `±λ 1_{j}` skip node `dead`, so all vanish there.
pub fn rigged_covering<T: Scalar>(nodes: usize, dead: usize, lambda: T) -> Result<BallCovering<T>, CkError> {
    if dead >= nodes || nodes < 2 {
        return Err(CkError::InvalidParameter(format!(
            "dead node {dead} on a grid of {nodes}"
        )));
    }
    let members = (0..nodes)
        .filter(|&j| j != dead)
        .map(|j| PointSet::singleton(nodes, j))
        .collect();
    let cfg = CkCoverConfig {
        lambda,
        family: BumpFamily::new(nodes, members, BumpShape::Indicator)?,
    };
    build_ck_cover(&SpaceModel::sup_grid(nodes), &cfg)
}

pub(crate) fn is_discrete_grid<T: Scalar>(k: &SpaceModel<T>) -> bool {
    matches!(
        k,
        SpaceModel::SupGrid {
            mode: GridMode::Discrete,
            ..
        }
    )
}

pub(crate) fn strictly_positive<T: Scalar>(x: T) -> bool {
    x > T::lit(STRICT_SLACK)
}
