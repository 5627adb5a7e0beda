use serde::Serialize;

use crate::scalar::{Scalar, STRICT_SLACK};
use crate::spaces::{certify_point_best, norm_of, Ball, BallCovering, SpaceModel};

use super::bump::{classify_outcome, strictly_positive, BumpFamily, SampleOutcome};
use super::CkError;

/// Radius rule for the `C(K, X)` balls.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case", tag = "form", bound = "T: Scalar")]
pub enum CkxForm<T> {
    /// `max{(‖x_t‖ + r_t)/2, 1}`
    Bcp,
    /// `r** - r*/2`, for an X covering with `‖x_t‖ = r**`, `r_t = r** - r*`.
    Ubcp { r_star: T, r_double_star: T },
}

/// Centers `f_n x_t` (bump `n` with sup norm 1 times X-center `t`), ordered
/// bump-major.
pub fn build_ckx_cover<T: Scalar>(
    k: &SpaceModel<T>,
    family: &BumpFamily,
    x_cov: &BallCovering<T>,
    form: CkxForm<T>,
) -> Result<BallCovering<T>, CkError> {
    let SpaceModel::SupGrid { n, mode } = k else {
        return Err(CkError::InvalidParameter("K must be a sup-grid model".into()));
    };
    if family.nodes != *n {
        return Err(CkError::InvalidParameter("bump family over the wrong grid".into()));
    }
    let slack = T::lit(STRICT_SLACK);
    let (one, two) = (T::one(), T::lit(2.0));
    let mut radii = Vec::with_capacity(x_cov.len());
    for (t, b) in x_cov.balls.iter().enumerate() {
        let xn = x_cov.center_norm(t);
        if !(b.radius - one > slack && xn - b.radius > slack) {
            return Err(CkError::InvalidParameter(format!(
                "X ball {t} has radius {} and center norm {xn}; need 1 < r < ‖x‖",
                b.radius
            )));
        }
        let r = match form {
            CkxForm::Bcp => ((xn + b.radius) / two).max(one),
            CkxForm::Ubcp { r_star, r_double_star } => {
                let tol = T::lit(1e-9) * r_double_star;
                if (xn - r_double_star).abs() > tol || (b.radius - (r_double_star - r_star)).abs() > tol {
                    return Err(CkError::InvalidParameter(format!(
                        "X ball {t} is not rescaled to norm {r_double_star} and radius {}",
                        r_double_star - r_star
                    )));
                }
                r_double_star - r_star / two
            }
        };
        radii.push(r);
    }
    let d = x_cov.space.dim();
    let mut balls = Vec::with_capacity(family.len() * x_cov.len());
    for m in 0..family.len() {
        let f: Vec<T> = family.bump(m, one);
        for (t, b) in x_cov.balls.iter().enumerate() {
            let mut center = Vec::with_capacity(n * d);
            for &fi in &f {
                center.extend(b.center.iter().map(|&x| fi * x));
            }
            balls.push(Ball::new(center, radii[t])?);
        }
    }
    let space = SpaceModel::VectorGrid {
        n: *n,
        mode: mode.clone(),
        value: Box::new(x_cov.space.clone()),
    };
    Ok(BallCovering::new(space, balls)?)
}

/// Some X ball `t` contains `x_g = g(τ_0)` (a norm-attaining value) and some
/// member lies in `{τ : ‖g(τ) - x_g‖ < (‖x_t‖ - r_t)/2}`.
pub fn ckx_hypothesis<T: Scalar>(family: &BumpFamily, x_cov: &BallCovering<T>, g: &[T]) -> bool {
    let x = &x_cov.space;
    let d = x.dim();
    let vals: Vec<&[T]> = g.chunks(d).collect();
    let norms: Vec<T> = vals.iter().map(|v| norm_of(x, v).expect("block dim")).collect();
    let top = norms.iter().cloned().fold(T::neg_infinity(), T::max);
    let diff = |a: &[T], b: &[T]| -> T {
        let v: Vec<T> = a.iter().zip(b).map(|(p, q)| *p - *q).collect();
        norm_of(x, &v).expect("block dim")
    };
    (0..vals.len()).filter(|&i| norms[i] == top).any(|tau0| {
        let xg = vals[tau0];
        x_cov.balls.iter().enumerate().any(|(t, b)| {
            if diff(&b.center, xg) > b.radius {
                return false;
            }
            let rad = (x_cov.center_norm(t) - b.radius) / T::lit(2.0);
            family.members.iter().any(|u| u.iter().all(|i| diff(vals[i], xg) < rad))
        })
    })
}

pub fn certify_ckx_sample<T: Scalar>(
    c: &BallCovering<T>,
    family: &BumpFamily,
    x_cov: &BallCovering<T>,
    g: &[T],
) -> Result<SampleOutcome<T>, CkError> {
    classify_outcome(c, g, || ckx_hypothesis(family, x_cov, g))
}

/// Scalar center `sign · m · ‖F_n(·)‖`.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(bound = "T: Scalar")]
pub struct ScalarCertificate<T> {
    pub ball: usize,
    pub m: usize,
    pub sign: i8,
    pub center: Vec<T>,
    pub distance: T,
    /// Open-ball radius: the center's norm.
    pub center_norm: T,
    /// `center_norm - distance`.
    pub margin: T,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(bound = "T: Scalar")]
pub struct CkxTransfer<T> {
    /// Centers `F_n(τ_n)`, radii `r_n`.
    pub x_cover: BallCovering<T>,
    /// `τ_n`, a node where `F_n` attains its norm.
    pub peaks: Vec<usize>,
    /// `‖F_n(·)‖` as a function on the grid.
    pub profiles: Vec<Vec<T>>,
    pub scalar_space: SpaceModel<T>,
    pub m_max: usize,
    /// Fixed unit vector of X used to lift scalar samples.
    pub lift: Vec<T>,
}

/// X covering and scalar centers from a covering of the sphere of `C(K, X)`.
pub fn ckx_transfer<T: Scalar>(c: &BallCovering<T>, m_max: usize) -> Result<CkxTransfer<T>, CkError> {
    let SpaceModel::VectorGrid { n, mode, value } = &c.space else {
        return Err(CkError::InvalidParameter("transfer needs a C(K, X) covering".into()));
    };
    if m_max == 0 {
        return Err(CkError::InvalidParameter("m_max must be >= 1".into()));
    }
    let x = value.as_ref();
    let d = x.dim();
    let mut peaks = Vec::with_capacity(c.len());
    let mut profiles = Vec::with_capacity(c.len());
    let mut balls = Vec::with_capacity(c.len());
    for (i, b) in c.balls.iter().enumerate() {
        let prof: Vec<T> = b.center.chunks(d).map(|v| norm_of(x, v).expect("block dim")).collect();
        let (tau, top) = prof.iter().enumerate().fold(
            (0, T::neg_infinity()),
            |best, (j, &v)| if v > best.1 { (j, v) } else { best },
        );
        if !strictly_positive(top - b.radius) {
            return Err(CkError::InvalidParameter(format!(
                "ball {i} meets the origin: radius {} vs norm {top}",
                b.radius
            )));
        }
        balls.push(Ball::new(b.center[tau * d..(tau + 1) * d].to_vec(), b.radius)?);
        peaks.push(tau);
        profiles.push(prof);
    }
    let mut lift = vec![T::zero(); d];
    lift[0] = T::one();
    let ln = norm_of(x, &lift)?;
    lift.iter_mut().for_each(|v| *v = *v / ln);
    let scalar_space = SpaceModel::SupGrid {
        n: *n,
        mode: mode.clone(),
    };
    Ok(CkxTransfer {
        x_cover: BallCovering::new(x.clone(), balls)?,
        peaks,
        profiles,
        scalar_space,
        m_max,
        lift,
    })
}

impl<T: Scalar> CkxTransfer<T> {
    /// Certifies a unit `f ∈ C(K)` by some `±m‖F_n(·)‖`, `m <= m_max`, with
    /// `‖f - center‖ < ‖center‖`. The ball is chosen as in the proof: the one
    /// covering `f⁺ x` (after flipping `f` so that it reaches +1), then the
    /// smallest working `m`; other balls are tried only if that fails.
    pub fn certify_scalar(&self, c: &BallCovering<T>, f: &[T]) -> Result<ScalarCertificate<T>, CkError> {
        let top = f.iter().cloned().fold(T::neg_infinity(), T::max);
        let bottom = f.iter().cloned().fold(T::infinity(), T::min);
        let (sign, g): (i8, Vec<T>) = if top >= -bottom {
            (1, f.to_vec())
        } else {
            (-1, f.iter().map(|&v| -v).collect())
        };
        let d = self.lift.len();
        let lifted: Vec<T> = g
            .iter()
            .flat_map(|&v| {
                let pos = v.max(T::zero());
                self.lift.iter().map(move |&x| pos * x)
            })
            .collect();
        debug_assert_eq!(lifted.len(), g.len() * d);
        let first = certify_point_best(c, &lifted).ok().map(|cert| cert.ball_index);
        let order = first
            .into_iter()
            .chain((0..self.profiles.len()).filter(|&i| Some(i) != first));
        let mut best_excess = T::infinity();
        for ball in order {
            let prof = &self.profiles[ball];
            let pn = prof.iter().cloned().fold(T::zero(), T::max);
            for m in 1..=self.m_max {
                let mf = T::from_usize(m).expect("small");
                let norm = mf * pn;
                let dist = g
                    .iter()
                    .zip(prof)
                    .fold(T::zero(), |acc, (&a, &b)| acc.max((a - mf * b).abs()));
                if strictly_positive(norm - dist) {
                    let s = T::lit(f64::from(sign));
                    return Ok(ScalarCertificate {
                        ball,
                        m,
                        sign,
                        center: prof.iter().map(|&b| s * mf * b).collect(),
                        distance: dist,
                        center_norm: norm,
                        margin: norm - dist,
                    });
                }
                best_excess = best_excess.min(dist - norm);
            }
        }
        Err(CkError::ScalarTransferExhausted {
            m_max: self.m_max,
            min_excess: best_excess.to_f64_lossy(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spaces::{certify_point, rescale_covering, standard_covering};

    #[test]
    fn two_point_example() {
        let k = SpaceModel::<f64>::sup_grid(2);
        let xcov = BallCovering::new(SpaceModel::lp(2, 2.0), vec![Ball::new(vec![2.0, 0.0], 1.2).unwrap()]).unwrap();
        let c = build_ckx_cover(&k, &BumpFamily::singletons(2), &xcov, CkxForm::Bcp).unwrap();
        assert_eq!(c.balls[0].radius, 1.6);
        let cert = certify_point(&c, &[1.0, 0.0, 1.0, 0.0]).unwrap();
        assert!(cert.distance <= 1.6);
        // g = f_1 · x_t/‖x_t‖
        let g = [1.0, 0.0, 0.0, 0.0];
        let cert = certify_point(&c, &g).unwrap();
        assert!(cert.distance <= cert.radius);
    }

    #[test]
    fn rejects_small_x_radii() {
        let k = SpaceModel::<f64>::sup_grid(2);
        let xcov = standard_covering(&SpaceModel::lp(2, 2.0)).unwrap();
        assert!(build_ckx_cover(&k, &BumpFamily::singletons(2), &xcov, CkxForm::Bcp).is_err());
        let r = rescale_covering(&xcov, xcov.origin_gap).unwrap();
        assert!(build_ckx_cover(&k, &BumpFamily::singletons(2), &r, CkxForm::Bcp).is_ok());
        let form = CkxForm::Ubcp {
            r_star: xcov.origin_gap,
            r_double_star: 5.0,
        };
        let u = build_ckx_cover(&k, &BumpFamily::singletons(2), &r, form).unwrap();
        assert!((u.balls[0].radius - (5.0 - xcov.origin_gap / 2.0)).abs() < 1e-12);
    }

    #[test]
    fn transfer_constant_function() {
        let k = SpaceModel::<f64>::sup_grid(3);
        let xcov = standard_covering(&SpaceModel::lp(2, 2.0)).unwrap();
        let r = rescale_covering(&xcov, xcov.origin_gap).unwrap();
        let c = build_ckx_cover(&k, &BumpFamily::singletons(3), &r, CkxForm::Bcp).unwrap();
        let t = ckx_transfer(&c, 64).unwrap();
        let x = [0.6, 0.8];
        let fx: Vec<f64> = x.iter().cycle().take(6).cloned().collect();
        let n0 = certify_point(&c, &fx).unwrap().ball_index;
        let ctr = &t.x_cover.balls[n0].center;
        let d = ((x[0] - ctr[0]).powi(2) + (x[1] - ctr[1]).powi(2)).sqrt();
        assert!(d <= c.balls[n0].radius);
        let cert = t.certify_scalar(&c, &[1.0, -0.3, 0.2]).unwrap();
        assert!(cert.margin > 0.0);
    }
}
