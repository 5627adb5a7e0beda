use serde::{Deserialize, Serialize};

use crate::scalar::{Scalar, Strictness, STRICT_SLACK};

use super::model::{norm_of, norm_unchecked, Exponent, SpaceModel};
use super::SpaceError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct Ball<T> {
    pub center: Vec<T>,
    pub radius: T,
}

impl<T: Scalar> Ball<T> {
    pub fn new(center: Vec<T>, radius: T) -> Result<Self, SpaceError> {
        if !(radius > T::zero()) {
            return Err(SpaceError::InvalidParameter(format!(
                "radius {radius} must be positive"
            )));
        }
        Ok(Ball { center, radius })
    }
}

/// Finite family of closed balls meant to cover the unit sphere of `space`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct BallCovering<T> {
    pub space: SpaceModel<T>,
    pub balls: Vec<Ball<T>>,
    /// Largest radius `M`.
    pub radius_bound: T,
    /// `r* = min (‖center‖ - radius)`; positive iff no ball meets the origin.
    pub origin_gap: T,
}

impl<T: Scalar> BallCovering<T> {
    pub fn new(space: SpaceModel<T>, balls: Vec<Ball<T>>) -> Result<Self, SpaceError> {
        if balls.is_empty() {
            return Err(SpaceError::InvalidParameter("covering has no balls".into()));
        }
        space.validate()?;
        let mut radius_bound = T::zero();
        let mut origin_gap = T::infinity();
        for b in &balls {
            let c = norm_of(&space, &b.center)?;
            radius_bound = radius_bound.max(b.radius);
            origin_gap = origin_gap.min(c - b.radius);
        }
        Ok(BallCovering {
            space,
            balls,
            radius_bound,
            origin_gap,
        })
    }

    pub fn len(&self) -> usize {
        self.balls.len()
    }

    pub fn is_empty(&self) -> bool {
        self.balls.is_empty()
    }

    pub fn center_norm(&self, index: usize) -> T {
        norm_unchecked(&self.space, &self.balls[index].center)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(bound = "T: Scalar")]
pub struct Classification<T> {
    pub radius_bound: T,
    pub origin_gap: T,
    /// Every ball misses the origin by more than 1e-9.
    pub admissible: bool,
    pub bcp: bool,
    /// Radii bounded; automatic for a finite family.
    pub sbcp: bool,
    /// Admissible with a uniform gap; at finite scale the gap is `origin_gap`.
    pub ubcp: bool,
}

impl<T: Scalar> Classification<T> {
    /// UBCP with a declared gap: `origin_gap >= declared > 0`.
    pub fn satisfies_gap(&self, declared: T) -> bool {
        self.admissible && declared > T::zero() && self.origin_gap >= declared
    }
}

pub fn classify_covering<T: Scalar>(c: &BallCovering<T>) -> Classification<T> {
    let admissible = c.origin_gap > T::lit(STRICT_SLACK);
    Classification {
        radius_bound: c.radius_bound,
        origin_gap: c.origin_gap,
        admissible,
        bcp: admissible,
        sbcp: admissible && c.radius_bound.is_finite(),
        ubcp: admissible && c.radius_bound.is_finite(),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct CoverCertificate<T> {
    pub point: Vec<T>,
    pub ball_index: usize,
    pub distance: T,
    pub radius: T,
    /// `radius - distance`.
    pub margin: T,
}

impl<T: Scalar> CoverCertificate<T> {
    pub fn strictness(&self) -> Strictness {
        Strictness::of_slack(self.margin)
    }
}

fn certificate<T: Scalar>(c: &BallCovering<T>, v: &[T], index: usize, distance: T) -> CoverCertificate<T> {
    let radius = c.balls[index].radius;
    CoverCertificate {
        point: v.to_vec(),
        ball_index: index,
        distance,
        radius,
        margin: radius - distance,
    }
}

fn distances<'a, T: Scalar>(c: &'a BallCovering<T>, v: &'a [T]) -> impl Iterator<Item = (usize, T)> + 'a {
    c.balls.iter().enumerate().map(move |(i, b)| {
        let diff: Vec<T> = v.iter().zip(&b.center).map(|(x, y)| *x - *y).collect();
        (i, norm_unchecked(&c.space, &diff))
    })
}

/// First ball (in list order) containing `v`.
pub fn certify_point<T: Scalar>(c: &BallCovering<T>, v: &[T]) -> Result<CoverCertificate<T>, SpaceError> {
    check_dim(c, v)?;
    let mut min_excess = T::infinity();
    for (i, d) in distances(c, v) {
        if d <= c.balls[i].radius {
            return Ok(certificate(c, v, i, d));
        }
        min_excess = min_excess.min(d - c.balls[i].radius);
    }
    Err(SpaceError::NotCovered {
        min_excess: min_excess.to_f64_lossy(),
    })
}

/// Ball with the largest margin (first one on ties).
pub fn certify_point_best<T: Scalar>(c: &BallCovering<T>, v: &[T]) -> Result<CoverCertificate<T>, SpaceError> {
    check_dim(c, v)?;
    let (i, d) = distances(c, v)
        .fold(None, |best: Option<(usize, T, T)>, (i, d)| {
            let margin = c.balls[i].radius - d;
            match best {
                Some((_, _, m)) if m >= margin => best,
                _ => Some((i, d, margin)),
            }
        })
        .map(|(i, d, _)| (i, d))
        .expect("nonempty covering");
    if d <= c.balls[i].radius {
        Ok(certificate(c, v, i, d))
    } else {
        Err(SpaceError::NotCovered {
            min_excess: (d - c.balls[i].radius).to_f64_lossy(),
        })
    }
}

fn check_dim<T: Scalar>(c: &BallCovering<T>, v: &[T]) -> Result<(), SpaceError> {
    if v.len() != c.space.dim() {
        return Err(SpaceError::DimensionMismatch {
            expected: c.space.dim(),
            got: v.len(),
        });
    }
    Ok(())
}

/// `(‖sx‖ - ‖y - sx‖, ‖tx‖ - ‖y - tx‖)`; the first never exceeds the second.
pub fn scaling_margin<T: Scalar>(x: &[T], y: &[T], s: T, t: T, space: &SpaceModel<T>) -> Result<(T, T), SpaceError> {
    if !(T::zero() < s && s < t) {
        return Err(SpaceError::InvalidParameter(format!(
            "need 0 < s < t, got s={s}, t={t}"
        )));
    }
    if norm_of(space, x)? == T::zero() {
        return Err(SpaceError::InvalidParameter("x must be nonzero".into()));
    }
    norm_of(space, y)?;
    let margin = |k: T| {
        let kx: Vec<T> = x.iter().map(|&a| a * k).collect();
        let diff: Vec<T> = y.iter().zip(&kx).map(|(&a, &b)| a - b).collect();
        norm_unchecked(space, &kx) - norm_unchecked(space, &diff)
    };
    Ok((margin(s), margin(t)))
}

/// Rescales so every center has norm `2 + 2M + 1` and every radius is
/// `r** - r_star`, where `M` is the radius bound.
pub fn rescale_covering<T: Scalar>(c: &BallCovering<T>, r_star: T) -> Result<BallCovering<T>, SpaceError> {
    let target = T::lit(3.0) + T::lit(2.0) * c.radius_bound;
    rescale_covering_to(c, r_star, target)
}

/// As [`rescale_covering`] with an explicit common center norm `r** > 2 + 2M`.
///
/// A sphere point within `r` of `c` has `‖c‖ - ‖y - c‖ >= ‖c‖ - r >= r_star`;
/// scaling `c` outwards to norm `r**` cannot decrease that margin, so the
/// point lies within `r** - r_star` of the new center.
pub fn rescale_covering_to<T: Scalar>(
    c: &BallCovering<T>,
    r_star: T,
    r_double_star: T,
) -> Result<BallCovering<T>, SpaceError> {
    if r_star < T::zero() || r_star > c.origin_gap {
        return Err(SpaceError::InvalidParameter(format!(
            "r* = {r_star} must lie in [0, origin gap {}]",
            c.origin_gap
        )));
    }
    let two = T::lit(2.0);
    if !(r_double_star > two + two * c.radius_bound) {
        return Err(SpaceError::InvalidParameter(format!(
            "r** = {r_double_star} must exceed 2 + 2M = {}",
            two + two * c.radius_bound
        )));
    }
    let balls = c
        .balls
        .iter()
        .map(|b| {
            let norm = norm_unchecked(&c.space, &b.center);
            let scale = r_double_star / norm;
            Ball {
                center: b.center.iter().map(|&x| x * scale).collect(),
                radius: r_double_star - r_star,
            }
        })
        .collect();
    BallCovering::new(c.space.clone(), balls)
}

/// Standard admissible covering of the unit sphere of `ℓ_p^n`.
///
/// For `p < ∞` the centers are the sign vectors `ε ∈ {±1}^n` (scaled by 2 when
/// `n = 1`); a unit `u` is within `((n-1)s^p + (s-1)^p)^{1/p}` of `s·sign(u)`.
/// For `p = ∞` the centers are `±2e_i` with radius 1.
pub fn standard_covering<T: Scalar>(space: &SpaceModel<T>) -> Result<BallCovering<T>, SpaceError> {
    let SpaceModel::Lp { n, p } = space else {
        return Err(SpaceError::InvalidParameter(
            "standard covering needs an lp space".into(),
        ));
    };
    let n = *n;
    if n == 0 || n > 16 {
        return Err(SpaceError::InvalidParameter(format!("lp dimension {n} outside 1..=16")));
    }
    let two = T::lit(2.0);
    let balls = if p.is_infinite() {
        (0..n)
            .flat_map(|i| {
                [two, -two].into_iter().map(move |s| {
                    let mut c = vec![T::zero(); n];
                    c[i] = s;
                    Ball {
                        center: c,
                        radius: T::one(),
                    }
                })
            })
            .collect()
    } else {
        let s = if n == 1 { two } else { T::one() };
        let pv = p.value();
        let nm1 = T::from_usize(n - 1).expect("small");
        let radius = Exponent::new(pv)?.norm(&[s * nm1.powf(pv.recip()), s - T::one()]);
        (0..1usize << n)
            .map(|signs| Ball {
                center: (0..n).map(|i| if signs >> i & 1 == 1 { -s } else { s }).collect(),
                radius,
            })
            .collect()
    };
    BallCovering::new(space.clone(), balls)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn l2() -> SpaceModel<f64> {
        SpaceModel::lp(2, 2.0)
    }

    #[test]
    fn classify_single_balls() {
        let c = BallCovering::new(l2(), vec![Ball::new(vec![2.0, 0.0], 1.0).unwrap()]).unwrap();
        let k = classify_covering(&c);
        assert!(k.admissible && k.ubcp);
        assert_eq!(k.origin_gap, 1.0);
        let bad = BallCovering::new(l2(), vec![Ball::new(vec![0.5, 0.0], 1.0).unwrap()]).unwrap();
        assert!(!classify_covering(&bad).admissible);
        assert!(Ball::new(vec![1.0, 0.0], 0.0).is_err());
    }

    #[test]
    fn certify_first_hit() {
        let balls = [[2.0, 0.0], [-2.0, 0.0], [0.0, 2.0], [0.0, -2.0]]
            .into_iter()
            .map(|c| Ball::new(c.to_vec(), 1.5).unwrap())
            .collect();
        let c = BallCovering::new(l2(), balls).unwrap();
        let cert = certify_point(&c, &[1.0, 0.0]).unwrap();
        assert_eq!(cert.ball_index, 0);
        assert_eq!(cert.distance, 1.0);
        assert_eq!(cert.margin, 0.5);
        assert!(matches!(
            certify_point(&c, &[0.0, 0.0]),
            Err(SpaceError::NotCovered { .. })
        ));
        let best = certify_point_best(&c, &[0.0, -1.0]).unwrap();
        assert_eq!(best.ball_index, 3);
    }

    #[test]
    fn scaling_margin_examples() {
        let (a, b) = scaling_margin(&[1.0, 0.0], &[0.5, 0.0], 1.0, 2.0, &l2()).unwrap();
        assert_eq!((a, b), (0.5, 0.5));
        let (a, b) = scaling_margin(&[1.0, 0.0], &[0.0, 1.0], 1.0, 2.0, &l2()).unwrap();
        assert!((a - (1.0 - 2f64.sqrt())).abs() < 1e-15);
        assert!((b - (2.0 - 5f64.sqrt())).abs() < 1e-15);
        assert!(a <= b);
        assert!(scaling_margin(&[1.0, 0.0], &[0.0, 1.0], 2.0, 2.0, &l2()).is_err());
        assert!(scaling_margin(&[0.0, 0.0], &[0.0, 1.0], 1.0, 2.0, &l2()).is_err());
    }

    #[test]
    fn rescale_example() {
        let c = BallCovering::new(l2(), vec![Ball::new(vec![1.5, 0.0], 1.0).unwrap()]).unwrap();
        let r = rescale_covering(&c, 0.5).unwrap();
        assert_eq!(r.balls[0].center, vec![5.0, 0.0]);
        assert_eq!(r.balls[0].radius, 4.5);
        let sbcp = rescale_covering(&c, 0.0).unwrap();
        assert_eq!(sbcp.balls[0].radius, 5.0);
        assert!(rescale_covering(&c, 0.6).is_err());
    }

    #[test]
    fn rescale_identity_case() {
        // centers already at norm r** = 10 with radius r** - r* = 3
        let c = BallCovering::new(l2(), vec![Ball::new(vec![0.0, 10.0], 3.0).unwrap()]).unwrap();
        let r = rescale_covering_to(&c, 7.0, 10.0).unwrap();
        assert_eq!(r, c);
    }

    #[test]
    fn standard_coverings_admissible() {
        for s in [
            SpaceModel::<f64>::lp(1, 2.0),
            SpaceModel::lp(2, 2.0),
            SpaceModel::lp(3, 1.0),
            SpaceModel::lp(4, 1.7),
            SpaceModel::lp(3, f64::INFINITY),
        ] {
            let c = standard_covering(&s).unwrap();
            assert!(classify_covering(&c).admissible, "{s:?}");
        }
        let c = standard_covering(&l2()).unwrap();
        assert_eq!(c.radius_bound, 1.0);
        assert!((c.origin_gap - (2f64.sqrt() - 1.0)).abs() < 1e-15);
    }
}
