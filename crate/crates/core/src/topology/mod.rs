//! Finite topological spaces, π-bases and continuous maps.
//!
//! A finite space is determined by the minimal open neighbourhood `N(x)` of
//! each point: a set is open iff it contains `N(x)` for each of its points.
//! The full open family is materialized (sorted by mask value) whenever it has
//! at most [`MAX_MATERIALIZED_OPENS`] members; larger spaces keep only the
//! neighbourhoods and answer `is_open` through them.

mod pointset;

use std::collections::BTreeSet;

use serde::Serialize;
use thiserror::Error;

pub use pointset::PointSet;

pub const MAX_MATERIALIZED_OPENS: usize = 1 << 16;
pub const MAX_CUBE_DIMENSION: usize = 16;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TopologyError {
    #[error("parameter out of range: {0}")]
    TooLarge(String),
    #[error("invalid open-set family: {0}")]
    InvalidOpens(String),
    #[error("family member {0} is empty")]
    EmptyMember(usize),
    #[error("family member {0} is not open")]
    NotOpen(usize),
    #[error("open family is not materialized for a space with {0} points")]
    NotMaterialized(usize),
    #[error("malformed space text: {0}")]
    Parse(String),
    #[error("map is not total or points outside the target")]
    BadAssignment,
}

#[derive(Clone, Debug)]
pub struct FiniteSpace {
    labels: Vec<String>,
    nbhd: Vec<PointSet>,
    opens: Option<Vec<PointSet>>,
}

/// Builder tags accepted by [`build_finite_space`].
#[derive(Clone, Debug)]
pub enum SpaceKind {
    DiscreteCube {
        m: usize,
    },
    Sierpinski,
    /// `n_isolated` isolated points converging onto a copy of `{0,1}^m`.
    ConvergentModel {
        n_isolated: usize,
        m: usize,
    },
    Custom {
        points: usize,
        opens: Vec<PointSet>,
    },
}

pub fn build_finite_space(kind: &SpaceKind) -> Result<FiniteSpace, TopologyError> {
    match kind {
        SpaceKind::DiscreteCube { m } => FiniteSpace::discrete_cube(*m),
        SpaceKind::Sierpinski => Ok(FiniteSpace::sierpinski()),
        SpaceKind::ConvergentModel { n_isolated, m } => FiniteSpace::convergent_model(*n_isolated, *m),
        SpaceKind::Custom { points, opens } => FiniteSpace::custom(*points, opens.clone()),
    }
}

impl FiniteSpace {
    /// Space from minimal neighbourhoods. Requires `x ∈ N(x)` and
    /// `y ∈ N(x) ⇒ N(y) ⊆ N(x)`.
    pub fn from_neighbourhoods(labels: Vec<String>, nbhd: Vec<PointSet>) -> Result<FiniteSpace, TopologyError> {
        let n = labels.len();
        if nbhd.len() != n || nbhd.iter().any(|s| s.universe() != n) {
            return Err(TopologyError::InvalidOpens("neighbourhood size mismatch".into()));
        }
        for (x, nx) in nbhd.iter().enumerate() {
            if !nx.contains(x) {
                return Err(TopologyError::InvalidOpens(format!(
                    "point {x} not in its neighbourhood"
                )));
            }
            for y in nx.iter() {
                if !nbhd[y].is_subset(nx) {
                    return Err(TopologyError::InvalidOpens(format!(
                        "neighbourhoods of {x} and {y} are not nested"
                    )));
                }
            }
        }
        let opens = enumerate_unions(n, &nbhd);
        Ok(FiniteSpace { labels, nbhd, opens })
    }

    pub fn discrete(labels: Vec<String>) -> FiniteSpace {
        let n = labels.len();
        let nbhd = (0..n).map(|i| PointSet::singleton(n, i)).collect();
        let opens = (n <= 16).then(|| (0..1u64 << n).map(|m| PointSet::from_mask(n, m)).collect());
        FiniteSpace { labels, nbhd, opens }
    }

    /// `{0,1}^m` with the discrete topology; point `f` is the integer whose bit `j`
    /// is coordinate `j`.
    pub fn discrete_cube(m: usize) -> Result<FiniteSpace, TopologyError> {
        if m > MAX_CUBE_DIMENSION {
            return Err(TopologyError::TooLarge(format!(
                "cube dimension {m} > {MAX_CUBE_DIMENSION}"
            )));
        }
        Ok(Self::discrete((0..1usize << m).map(|f| bits_label(f, m)).collect()))
    }

    pub fn sierpinski() -> FiniteSpace {
        let nbhd = vec![PointSet::from_points(2, [0]), PointSet::from_points(2, [0, 1])];
        Self::from_neighbourhoods(vec!["a".into(), "b".into()], nbhd).expect("valid")
    }

    /// Finite model of `L×{0} ∪ {(h_i, 1/i)}` over the cube `L = {0,1}^m`.
    ///
    /// Points `0..n_isolated` are the isolated points `(h_i, 1/i)` with
    /// `h_i = (i-1) mod 2^m`; point `n_isolated + f` is the base point `(f,0)`.
    /// Neighbourhoods of a base point fix the coordinates of a cylinder on the
    /// low `s = min(m, ⌊log₂ N⌋)` bits and keep the tail `i ≥ N - 2^s + 1`, so
    /// every neighbourhood of a base point meets the isolated points.
    pub fn convergent_model(n_isolated: usize, m: usize) -> Result<FiniteSpace, TopologyError> {
        if n_isolated == 0 {
            return Err(TopologyError::TooLarge("convergent model needs N >= 1".into()));
        }
        if m > MAX_CUBE_DIMENSION || n_isolated > 1 << 16 {
            return Err(TopologyError::TooLarge(format!(
                "convergent model N={n_isolated}, m={m}"
            )));
        }
        let cube = 1usize << m;
        let total = n_isolated + cube;
        let s = m.min(n_isolated.ilog2() as usize);
        let low_mask = (1usize << s) - 1;
        let tail_start = n_isolated - (1 << s) + 1;
        let h = |i: usize| (i - 1) % cube;

        let mut labels = Vec::with_capacity(total);
        let mut nbhd = Vec::with_capacity(total);
        for i in 1..=n_isolated {
            labels.push(format!("(h{i}={},1/{i})", bits_label(h(i), m)));
            nbhd.push(PointSet::singleton(total, i - 1));
        }
        for f in 0..cube {
            labels.push(format!("({},0)", bits_label(f, m)));
            let mut set = PointSet::empty(total);
            for g in 0..cube {
                if g & low_mask == f & low_mask {
                    set.insert(n_isolated + g);
                }
            }
            for i in tail_start..=n_isolated {
                if h(i) & low_mask == f & low_mask {
                    set.insert(i - 1);
                }
            }
            nbhd.push(set);
        }
        Self::from_neighbourhoods(labels, nbhd)
    }

    /// Space from an explicit open family; the family must contain `∅` and the
    /// whole set and be closed under pairwise unions and intersections.
    pub fn custom(points: usize, opens: Vec<PointSet>) -> Result<FiniteSpace, TopologyError> {
        if opens.iter().any(|u| u.universe() != points) {
            return Err(TopologyError::InvalidOpens("open set over a different universe".into()));
        }
        if opens.len() > MAX_MATERIALIZED_OPENS {
            return Err(TopologyError::TooLarge(format!("{} opens", opens.len())));
        }
        let family: BTreeSet<PointSet> = opens.into_iter().collect();
        if !family.contains(&PointSet::empty(points)) || !family.contains(&PointSet::full(points)) {
            return Err(TopologyError::InvalidOpens("missing empty set or whole space".into()));
        }
        let list: Vec<PointSet> = family.iter().cloned().collect();
        for (i, a) in list.iter().enumerate() {
            for b in &list[i + 1..] {
                if !family.contains(&a.union(b)) || !family.contains(&a.intersection(b)) {
                    return Err(TopologyError::InvalidOpens(format!(
                        "not closed under union/intersection: {a:?}, {b:?}"
                    )));
                }
            }
        }
        let nbhd = (0..points)
            .map(|x| {
                list.iter()
                    .filter(|u| u.contains(x))
                    .fold(PointSet::full(points), |acc, u| acc.intersection(u))
            })
            .collect();
        Ok(FiniteSpace {
            labels: (0..points).map(|i| i.to_string()).collect(),
            nbhd,
            opens: Some(list),
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn neighbourhood(&self, point: usize) -> &PointSet {
        &self.nbhd[point]
    }

    /// Materialized open family in ascending mask order, if small enough.
    pub fn opens(&self) -> Option<&[PointSet]> {
        self.opens.as_deref()
    }

    pub fn is_open(&self, set: &PointSet) -> bool {
        set.universe() == self.len() && set.iter().all(|x| self.nbhd[x].is_subset(set))
    }

    pub fn is_discrete(&self) -> bool {
        self.nbhd.iter().all(|n| n.count() == 1)
    }

    /// Text encoding: `points: <n>` then one open set per line as a hex mask.
    pub fn to_text(&self) -> Result<String, TopologyError> {
        let opens = self.opens.as_ref().ok_or(TopologyError::NotMaterialized(self.len()))?;
        let mut out = format!("points: {}\n", self.len());
        for u in opens {
            out.push_str(&u.to_hex());
            out.push('\n');
        }
        Ok(out)
    }

    pub fn from_text(text: &str) -> Result<FiniteSpace, TopologyError> {
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
        let header = lines.next().ok_or_else(|| TopologyError::Parse("empty input".into()))?;
        let n: usize = header
            .strip_prefix("points:")
            .and_then(|r| r.trim().parse().ok())
            .ok_or_else(|| TopologyError::Parse(format!("bad header `{header}`")))?;
        let opens = lines
            .map(|l| PointSet::from_hex(n, l).ok_or_else(|| TopologyError::Parse(format!("bad mask `{l}`"))))
            .collect::<Result<Vec<_>, _>>()?;
        Self::custom(n, opens)
    }
}

fn bits_label(f: usize, m: usize) -> String {
    (0..m).map(|j| if f >> j & 1 == 1 { '1' } else { '0' }).collect()
}

/// All unions of subfamilies of `gens`, or `None` past the materialization cap.
fn enumerate_unions(n: usize, gens: &[PointSet]) -> Option<Vec<PointSet>> {
    let mut family: BTreeSet<PointSet> = BTreeSet::new();
    family.insert(PointSet::empty(n));
    let distinct: BTreeSet<&PointSet> = gens.iter().collect();
    for g in distinct {
        let snapshot: Vec<PointSet> = family.iter().cloned().collect();
        for u in snapshot {
            family.insert(u.union(g));
            if family.len() > MAX_MATERIALIZED_OPENS {
                return None;
            }
        }
    }
    Some(family.into_iter().collect())
}

/// Product topology; neighbourhoods are rectangles `N(x) × N(y)`.
/// Point `(i, j)` has index `i * b.len() + j`.
pub fn product_space(a: &FiniteSpace, b: &FiniteSpace) -> Result<FiniteSpace, TopologyError> {
    let (na, nb) = (a.len(), b.len());
    let n = na
        .checked_mul(nb)
        .filter(|&n| n <= 1 << 20)
        .ok_or_else(|| TopologyError::TooLarge(format!("product of {na} and {nb} points")))?;
    let mut labels = Vec::with_capacity(n);
    let mut nbhd = Vec::with_capacity(n);
    for i in 0..na {
        for j in 0..nb {
            labels.push(format!("({},{})", a.labels[i], b.labels[j]));
            nbhd.push(rectangle(a.neighbourhood(i), b.neighbourhood(j), nb));
        }
    }
    let space = FiniteSpace::from_neighbourhoods(labels, nbhd)?;
    if space.opens.is_none() {
        return Err(TopologyError::TooLarge(format!(
            "product has more than {MAX_MATERIALIZED_OPENS} opens"
        )));
    }
    Ok(space)
}

fn rectangle(u: &PointSet, v: &PointSet, nb: usize) -> PointSet {
    let n = u.universe() * nb;
    PointSet::from_points(n, u.iter().flat_map(|i| v.iter().map(move |j| i * nb + j)))
}

/// An ordered family of nonempty open sets.
#[derive(Clone, Debug, Serialize)]
pub struct PiBasis {
    pub members: Vec<PointSet>,
}

impl PiBasis {
    pub fn new(members: Vec<PointSet>) -> Self {
        PiBasis { members }
    }

    pub fn singletons(n: usize) -> Self {
        PiBasis::new((0..n).map(|i| PointSet::singleton(n, i)).collect())
    }

    /// Pairwise rectangles of members, indexed consistently with [`product_space`].
    pub fn product(&self, other: &PiBasis) -> PiBasis {
        let nb = other.members.first().map_or(0, PointSet::universe);
        PiBasis::new(
            self.members
                .iter()
                .flat_map(|u| other.members.iter().map(move |v| rectangle(u, v, nb)))
                .collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PiBasisVerdict {
    pub holds: bool,
    /// Nonempty open set containing no member (the first in enumeration order).
    pub witness: Option<PointSet>,
}

/// Checks that every nonempty open set contains a member of `family`.
///
/// With a materialized open family the check is exhaustive. Otherwise it runs
/// over the minimal open sets, which is equivalent: every nonempty open set
/// contains a minimal one, and a minimal open set contains a member only if it
/// equals it.
pub fn is_pibasis(space: &FiniteSpace, family: &PiBasis) -> Result<PiBasisVerdict, TopologyError> {
    for (i, u) in family.members.iter().enumerate() {
        if u.universe() != space.len() {
            return Err(TopologyError::InvalidOpens(format!(
                "member {i} over a different universe"
            )));
        }
        if u.is_empty() {
            return Err(TopologyError::EmptyMember(i));
        }
        if !space.is_open(u) {
            return Err(TopologyError::NotOpen(i));
        }
    }
    let contains_member = |v: &PointSet| family.members.iter().any(|u| u.is_subset(v));
    let witness = match space.opens() {
        Some(opens) => opens
            .iter()
            .filter(|v| !v.is_empty())
            .find(|v| !contains_member(v))
            .cloned(),
        None => minimal_open_sets(space)
            .family
            .into_iter()
            .find(|v| !contains_member(v)),
    };
    Ok(PiBasisVerdict {
        holds: witness.is_none(),
        witness,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct MinimalOpens {
    pub family: Vec<PointSet>,
    pub pi_weight: usize,
}

/// Minimal nonempty open sets, ascending. They are among the point
/// neighbourhoods, so no enumeration of the open family is needed.
pub fn minimal_open_sets(space: &FiniteSpace) -> MinimalOpens {
    let distinct: BTreeSet<&PointSet> = space.nbhd.iter().collect();
    let family: Vec<PointSet> = distinct
        .iter()
        .filter(|u| !distinct.iter().any(|v| v != *u && v.is_subset(u)))
        .map(|u| (*u).clone())
        .collect();
    MinimalOpens {
        pi_weight: family.len(),
        family,
    }
}

/// A total map between the point sets of two finite spaces.
#[derive(Clone, Debug)]
pub struct PointMap {
    pub source: FiniteSpace,
    pub target: FiniteSpace,
    pub assignment: Vec<usize>,
}

impl PointMap {
    pub fn new(source: FiniteSpace, target: FiniteSpace, assignment: Vec<usize>) -> Result<PointMap, TopologyError> {
        if assignment.len() != source.len() || assignment.iter().any(|&y| y >= target.len()) {
            return Err(TopologyError::BadAssignment);
        }
        Ok(PointMap {
            source,
            target,
            assignment,
        })
    }

    pub fn preimage(&self, set: &PointSet) -> PointSet {
        PointSet::from_points(
            self.source.len(),
            (0..self.source.len()).filter(|&x| set.contains(self.assignment[x])),
        )
    }

    /// `self ∘ inner` (apply `inner` first).
    pub fn after(&self, inner: &PointMap) -> Result<PointMap, TopologyError> {
        if inner.target.len() != self.source.len() {
            return Err(TopologyError::BadAssignment);
        }
        PointMap::new(
            inner.source.clone(),
            self.target.clone(),
            inner.assignment.iter().map(|&y| self.assignment[y]).collect(),
        )
    }

    pub fn is_identity(&self) -> bool {
        self.source.len() == self.target.len() && self.assignment.iter().enumerate().all(|(i, &y)| i == y)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ContinuityVerdict {
    pub continuous: bool,
    /// Target open set whose preimage is not open.
    pub witness: Option<PointSet>,
}

/// Preimage check over every target open set (or over the target
/// neighbourhoods when the open family is not materialized).
pub fn is_continuous_map(map: &PointMap) -> ContinuityVerdict {
    let bad = |u: &&PointSet| !map.source.is_open(&map.preimage(u));
    let witness = match map.target.opens() {
        Some(opens) => opens.iter().find(bad).cloned(),
        None => map.target.nbhd.iter().find(bad).cloned(),
    };
    ContinuityVerdict {
        continuous: witness.is_none(),
        witness,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(n: usize, pts: &[usize]) -> PointSet {
        PointSet::from_points(n, pts.iter().copied())
    }

    #[test]
    fn discrete_cube_two_has_all_subsets() {
        let s = FiniteSpace::discrete_cube(2).unwrap();
        assert_eq!(s.len(), 4);
        assert_eq!(s.opens().unwrap().len(), 16);
    }

    #[test]
    fn cube_dimension_guard() {
        assert!(matches!(
            FiniteSpace::discrete_cube(17),
            Err(TopologyError::TooLarge(_))
        ));
        let big = FiniteSpace::discrete_cube(5).unwrap();
        assert!(big.opens().is_none());
        assert_eq!(minimal_open_sets(&big).pi_weight, 32);
    }

    #[test]
    fn sierpinski_opens() {
        let s = FiniteSpace::sierpinski();
        assert_eq!(s.opens().unwrap(), &[set(2, &[]), set(2, &[0]), set(2, &[0, 1])]);
        let verdict = is_pibasis(&s, &PiBasis::new(vec![set(2, &[0])])).unwrap();
        assert!(verdict.holds);
        assert_eq!(minimal_open_sets(&s).family, vec![set(2, &[0])]);
    }

    #[test]
    fn pibasis_witness_is_first_open() {
        let s = FiniteSpace::discrete_cube(2).unwrap();
        let fam = PiBasis::new(vec![set(4, &[0, 1]), set(4, &[2, 3])]);
        let v = is_pibasis(&s, &fam).unwrap();
        assert!(!v.holds);
        assert_eq!(v.witness, Some(set(4, &[0])));
        assert!(is_pibasis(&s, &PiBasis::singletons(4)).unwrap().holds);
    }

    #[test]
    fn pibasis_rejects_bad_members() {
        let s = FiniteSpace::sierpinski();
        assert_eq!(
            is_pibasis(&s, &PiBasis::new(vec![set(2, &[1])])),
            Err(TopologyError::NotOpen(0))
        );
        assert_eq!(
            is_pibasis(&s, &PiBasis::new(vec![set(2, &[])])),
            Err(TopologyError::EmptyMember(0))
        );
    }

    #[test]
    fn custom_rejects_non_topology() {
        let opens = vec![set(3, &[]), set(3, &[0]), set(3, &[1]), set(3, &[0, 1, 2])];
        assert!(matches!(
            FiniteSpace::custom(3, opens),
            Err(TopologyError::InvalidOpens(_))
        ));
    }

    #[test]
    fn text_roundtrip() {
        let s = FiniteSpace::convergent_model(3, 1).unwrap();
        let text = s.to_text().unwrap();
        assert!(text.starts_with("points: 5\n"));
        let back = FiniteSpace::from_text(&text).unwrap();
        assert_eq!(back.opens(), s.opens());
        assert!(FiniteSpace::from_text("points: 2\nzz\n").is_err());
    }

    #[test]
    fn sierpinski_product_corner_is_minimal() {
        let s = FiniteSpace::sierpinski();
        let p = product_space(&s, &s).unwrap();
        assert_eq!(p.len(), 4);
        let corner = set(4, &[0]);
        assert!(p.is_open(&corner));
        assert_eq!(minimal_open_sets(&p).family, vec![corner]);
    }

    #[test]
    fn swap_on_sierpinski_is_not_continuous() {
        let s = FiniteSpace::sierpinski();
        let swap = PointMap::new(s.clone(), s.clone(), vec![1, 0]).unwrap();
        let v = is_continuous_map(&swap);
        assert!(!v.continuous);
        assert_eq!(v.witness, Some(set(2, &[0])));
    }

    #[test]
    fn collapsing_b_onto_a_is_continuous() {
        // preimage of {a} is the whole space, which is open
        let s = FiniteSpace::sierpinski();
        let collapse = PointMap::new(s.clone(), s.clone(), vec![0, 0]).unwrap();
        assert!(is_continuous_map(&collapse).continuous);
    }
}
