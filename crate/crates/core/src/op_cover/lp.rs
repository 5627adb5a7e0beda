use std::collections::BTreeSet;

use serde::Serialize;

use crate::scalar::{Scalar, Strictness};
use crate::spaces::{Ball, BallCovering, Exponent, SpaceModel};

use super::net::{odometer, DualBallNet, NetIndex};
use super::norm::{operator_norm, Operator};
use super::OpCoverError;

/// Constants of the `B(X, ℓ_p)` construction for a given `(p, λ)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(bound = "T: Scalar")]
pub struct LpConstants<T> {
    pub p: T,
    pub lambda: T,
    /// `c = (1 - (2λ)^{-p})^{1/p}`
    pub c: T,
    pub window_lo: T,
    pub window_hi: T,
    /// `λ(1+c)/2`
    pub radius: T,
    /// `λ(1-c)/6`
    pub gap_bound: T,
    /// Default `ε = (1-c)/4`.
    pub epsilon: T,
    /// `max{1/2, λ^{1-p}}`
    pub threshold: T,
}

impl<T: Scalar> LpConstants<T> {
    pub fn new(p: T, lambda: T) -> Result<Self, OpCoverError> {
        if !(p > T::one()) || !p.is_finite() {
            return Err(OpCoverError::InvalidParameter(format!("p = {p} must lie in (1, ∞)")));
        }
        if !(lambda > T::one()) || !lambda.is_finite() {
            return Err(OpCoverError::InvalidParameter(format!("λ = {lambda} must exceed 1")));
        }
        let (one, two, three) = (T::one(), T::lit(2.0), T::lit(3.0));
        let c = (one - (two * lambda).powf(-p)).powf(p.recip());
        Ok(LpConstants {
            p,
            lambda,
            c,
            window_lo: (two + c) / three,
            window_hi: (T::lit(4.0) - c) / three,
            radius: lambda * (one + c) / two,
            gap_bound: lambda * (one - c) / T::lit(6.0),
            epsilon: (one - c) / T::lit(4.0),
            threshold: (one / two).max(lambda.powf(one - p)),
        })
    }

    pub fn in_window(&self, norm: T) -> bool {
        self.window_lo < norm && norm < self.window_hi
    }
}

/// `λ Σ x*_{m_i} ⊗ e_i` before and after scaling.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(bound = "T: Scalar")]
pub struct LpCenterCandidate<T> {
    pub rows: Vec<NetIndex>,
    pub prescale_norm: T,
    pub lambda: T,
    pub c: T,
    /// `λ` times the stacked rows, `k×n` row-major.
    pub center: Vec<T>,
}

/// All candidates of rank `k <= k_max` built from `net` (rows drawn with
/// repetition) whose norm lies strictly inside the window.
///
/// `q` is the domain exponent of `X = ℓ_q^n`; net points are read as rows of
/// `ℓ_{q'}`.
pub fn enumerate_lp_centers<T: Scalar>(
    net: &[(NetIndex, Vec<T>)],
    lambda: T,
    p: T,
    q: Exponent<T>,
    k_max: usize,
) -> Result<Vec<LpCenterCandidate<T>>, OpCoverError> {
    let k = LpConstants::new(p, lambda)?;
    if net.is_empty() {
        return Err(OpCoverError::EmptyWindow);
    }
    let n = net[0].1.len();
    let pe = Exponent::new(p).map_err(OpCoverError::Space)?;
    let mut out = Vec::new();
    for rank in 1..=k_max {
        let hi = net.len() as i64 - 1;
        let mut pick = vec![0i64; rank];
        loop {
            let data: Vec<T> = pick.iter().flat_map(|&i| net[i as usize].1.clone()).collect();
            let op = Operator::new(rank, n, data, q, pe)?;
            let norm = operator_norm(&op).value;
            if k.in_window(norm) {
                out.push(LpCenterCandidate {
                    rows: pick.iter().map(|&i| net[i as usize].0.clone()).collect(),
                    prescale_norm: norm,
                    lambda,
                    c: k.c,
                    center: op.scaled(lambda).data().to_vec(),
                });
            }
            if !odometer(&mut pick, 0, hi) {
                break;
            }
        }
    }
    if out.is_empty() {
        return Err(OpCoverError::EmptyWindow);
    }
    Ok(out)
}

/// Audit record of one certified operator.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(bound = "T: Scalar")]
pub struct LpCertificate<T> {
    pub constants: LpConstants<T>,
    /// Smallest truncation whose norm clears the threshold.
    pub t0_first: usize,
    /// Truncation actually used.
    pub t0: usize,
    pub theta: T,
    pub epsilon: T,
    pub row_tolerance: T,
    pub row_errors: Vec<T>,
    pub center: LpCenterCandidate<T>,
    /// Center embedded as an `m×n` matrix.
    pub center_matrix: Vec<T>,
    pub center_norm: T,
    pub distance: T,
    pub radius: T,
    pub gap: T,
    pub distance_check: Strictness,
    pub radius_check: Strictness,
    pub gap_check: Strictness,
    /// Truncations tried before `t0`, with the reason each was passed over.
    pub skipped: Vec<(usize, String)>,
}

impl<T: Scalar> LpCertificate<T> {
    pub fn holds(&self) -> bool {
        [self.distance_check, self.radius_check, self.gap_check]
            .iter()
            .all(|s| *s == Strictness::Verified)
    }
}

/// Certifies a norm-one `T: ℓ_q^n → ℓ_p^m` against the candidate set.
///
/// Tries truncations from the smallest qualifying `t0` upwards and returns
/// the first one whose rows snap to the net, whose candidate lands in the
/// window and whose measured distance is at most `λ(c+ε)`. At `t0 = m`
/// (`θ = 1`) the distance is at most `λ - 1 + λε`, below `λ(c+ε)`.
pub fn certify_lp_operator<T: Scalar>(
    op: &Operator<T>,
    lambda: T,
    net: &DualBallNet<T>,
) -> Result<LpCertificate<T>, OpCoverError> {
    let consts = LpConstants::new(op.p.value(), lambda)?;
    if net.n != op.cols() {
        return Err(OpCoverError::InvalidParameter(format!(
            "net dimension {} for an operator with {} columns",
            net.n,
            op.cols()
        )));
    }
    let norm = operator_norm(op).value;
    if (norm - T::one()).abs() > T::lit(1e-9) {
        return Err(OpCoverError::NotNormalized {
            norm: norm.to_f64_lossy(),
        });
    }
    let m = op.rows();
    let mut thetas = Vec::with_capacity(m);
    for t in 1..=m {
        let th = if t == m {
            norm
        } else {
            operator_norm(&op.truncated(t)).value
        };
        thetas.push(th);
    }
    let t0_first = (1..=m)
        .find(|&t| thetas[t - 1] > consts.threshold)
        .expect("θ_m = 1 clears the threshold");

    let mut skipped = Vec::new();
    let mut last_err = None;
    for t0 in t0_first..=m {
        let theta = thetas[t0 - 1];
        if !(theta > consts.threshold) {
            skipped.push((t0, format!("θ = {theta} below threshold")));
            continue;
        }
        match try_truncation(op, &consts, net, t0, theta) {
            Ok(mut cert) => {
                cert.t0_first = t0_first;
                cert.skipped = skipped;
                return Ok(cert);
            }
            Err(e) => {
                skipped.push((t0, e.to_string()));
                last_err = Some(e);
            }
        }
    }
    Err(last_err.expect("at least one truncation tried"))
}

fn try_truncation<T: Scalar>(
    op: &Operator<T>,
    k: &LpConstants<T>,
    net: &DualBallNet<T>,
    t0: usize,
    theta: T,
) -> Result<LpCertificate<T>, OpCoverError> {
    let (one, lambda) = (T::one(), k.lambda);
    let t0f = T::from_usize(t0).expect("small");
    let tol = (k.epsilon / t0f).min((one - k.c) / (T::lit(3.0) * t0f));
    let mut rows = Vec::with_capacity(t0);
    let mut errors = Vec::with_capacity(t0);
    let mut data = Vec::with_capacity(t0 * op.cols());
    for i in 0..t0 {
        let target: Vec<T> = op.row(i).iter().map(|&x| x / theta).collect();
        let (idx, x, err) = net.nearest(&target);
        if !(err < tol) {
            return Err(OpCoverError::NetTooCoarse {
                required: tol.to_f64_lossy(),
                achieved: err.to_f64_lossy(),
            });
        }
        rows.push(idx);
        errors.push(err);
        data.extend(x);
    }
    let pre = Operator::new(t0, op.cols(), data, op.q, op.p)?;
    let prescale_norm = operator_norm(&pre).value;
    if !k.in_window(prescale_norm) {
        return Err(OpCoverError::WindowMiss {
            norm: prescale_norm.to_f64_lossy(),
            lo: k.window_lo.to_f64_lossy(),
            hi: k.window_hi.to_f64_lossy(),
        });
    }
    let scaled = pre.scaled(lambda);
    let mut full = scaled.data().to_vec();
    full.resize(op.rows() * op.cols(), T::zero());
    let center_op = Operator::new(op.rows(), op.cols(), full, op.q, op.p)?;
    let center_norm = lambda * prescale_norm;
    let distance = operator_norm(&op.minus(&center_op)).value;
    let bound = lambda * (k.c + k.epsilon);
    let distance_check = Strictness::of_slack(bound - distance);
    if distance_check != Strictness::Verified {
        return Err(OpCoverError::BoundViolated {
            distance: distance.to_f64_lossy(),
            bound: bound.to_f64_lossy(),
        });
    }
    let gap = center_norm - k.radius;
    Ok(LpCertificate {
        constants: *k,
        t0_first: t0,
        t0,
        theta,
        epsilon: k.epsilon,
        row_tolerance: tol,
        row_errors: errors,
        center: LpCenterCandidate {
            rows,
            prescale_norm,
            lambda,
            c: k.c,
            center: scaled.data().to_vec(),
        },
        center_matrix: center_op.data().to_vec(),
        center_norm,
        distance,
        radius: k.radius,
        gap,
        distance_check,
        radius_check: Strictness::of_slack(k.radius - distance),
        gap_check: Strictness::of_slack(gap - k.gap_bound),
        skipped: Vec::new(),
    })
}

/// Finite covering of the operator sphere of `B(ℓ_q^n, ℓ_p^m)` by the
/// centers certified for a cube-face grid of the sphere.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(bound = "T: Scalar")]
pub struct LpOperatorCovering<T> {
    pub covering: BallCovering<T>,
    pub constants: LpConstants<T>,
    pub grid_points: usize,
    /// Every unit operator is within this distance of a grid point.
    pub mesh_bound: T,
    /// Smallest `radius - distance` over the grid points.
    pub min_margin: T,
    /// `mesh_bound <= min_margin`: coverage of the whole sphere follows.
    pub coverage_proven: bool,
}

/// Grid with face step `h` on `{‖A‖_max = 1}`, normalized in operator norm,
/// each point certified; centers deduplicated.
pub fn lp_operator_covering<T: Scalar>(
    rows: usize,
    cols: usize,
    q: Exponent<T>,
    p: Exponent<T>,
    lambda: T,
    h: T,
) -> Result<LpOperatorCovering<T>, OpCoverError> {
    let consts = LpConstants::new(p.value(), lambda)?;
    let d = rows * cols;
    let per_axis = (T::lit(2.0) / h).round().to_i64().expect("finite step");
    if per_axis < 1 || (per_axis as f64 + 1.0).powi(d as i32 - 1) * 2.0 * d as f64 > 2e6 {
        return Err(OpCoverError::InvalidParameter(format!(
            "grid step {h} gives too many points for a {rows}x{cols} operator"
        )));
    }
    let step = T::lit(2.0) / T::lit(per_axis as f64);
    let net = DualBallNet::for_window(cols, q.conjugate(), consts.c, rows)?;
    let mut seen = BTreeSet::new();
    let mut balls = Vec::new();
    let mut min_margin = T::infinity();
    let mut points = 0usize;
    for face in 0..d {
        for sign in [T::one(), -T::one()] {
            let mut k = vec![0i64; d - 1];
            loop {
                let mut a = Vec::with_capacity(d);
                let mut it = k.iter();
                for j in 0..d {
                    if j == face {
                        a.push(sign);
                    } else {
                        a.push(-T::one() + step * T::lit(*it.next().expect("d-1") as f64));
                    }
                }
                let raw = Operator::new(rows, cols, a, q, p)?;
                let nrm = operator_norm(&raw).value;
                let unit = raw.scaled(nrm.recip());
                let cert = certify_lp_operator(&unit, lambda, &net)?;
                points += 1;
                min_margin = min_margin.min(cert.radius - cert.distance);
                let key: Vec<i64> = cert
                    .center_matrix
                    .iter()
                    .map(|x| (x.to_f64_lossy() * 1e9).round() as i64)
                    .collect();
                if seen.insert(key) {
                    balls.push(Ball::new(cert.center_matrix.clone(), consts.radius).map_err(OpCoverError::Space)?);
                }
                if !odometer(&mut k, 0, per_axis) {
                    break;
                }
            }
        }
    }
    // unit A: B = A/‖A‖_max lies on a face, its grid point G has |B - G| <= step/2
    // entrywise, so ‖B - G‖ <= (step/2)‖J‖ with J the all-ones matrix; since
    // ‖A‖_max <= 1 the normalized G is within step·‖J‖ of A
    let ones = Operator::new(rows, cols, vec![T::one(); d], q, p)?;
    let mesh_bound = step * operator_norm(&ones).value;
    let space = SpaceModel::operator(rows, cols, q, p);
    let covering = BallCovering::new(space, balls).map_err(OpCoverError::Space)?;
    Ok(LpOperatorCovering {
        covering,
        constants: consts,
        grid_points: points,
        mesh_bound,
        min_margin,
        coverage_proven: mesh_bound <= min_margin,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constants_for_p2_lambda_1_1() {
        let k = LpConstants::<f64>::new(2.0, 1.1).unwrap();
        assert!((k.c - 0.890724).abs() < 1e-6);
        assert!((k.window_lo - 0.963575).abs() < 1e-6);
        assert!((k.window_hi - 1.036425).abs() < 1e-6);
        assert!((k.radius - 1.039898).abs() < 1e-6);
        assert!((k.gap_bound - 0.020034).abs() < 1e-6);
    }

    #[test]
    fn rank_one_basis_certificate() {
        let t = Operator::<f64>::square_exp(vec![vec![1.0, 0.0], vec![0.0, 0.0]], 2.0).unwrap();
        let k = LpConstants::new(2.0, 1.1).unwrap();
        let net = DualBallNet::for_window(2, Exponent::finite(2.0), k.c, 2).unwrap();
        let cert = certify_lp_operator(&t, 1.1, &net).unwrap();
        assert_eq!(cert.t0, 1);
        assert!((cert.distance - 0.1).abs() < 1e-12);
        assert!((cert.center_matrix[0] - 1.1).abs() < 1e-12);
        assert!((cert.gap - 0.060102).abs() < 1e-6);
        assert!(cert.holds());
    }

    #[test]
    fn unnormalized_rejected() {
        let t = Operator::<f64>::square_exp(vec![vec![2.0, 0.0], vec![0.0, 0.0]], 2.0).unwrap();
        let k = LpConstants::new(2.0, 1.1).unwrap();
        let net = DualBallNet::for_window(2, Exponent::finite(2.0), k.c, 2).unwrap();
        assert!(matches!(
            certify_lp_operator(&t, 1.1, &net),
            Err(OpCoverError::NotNormalized { .. })
        ));
    }

    #[test]
    fn enumeration_window() {
        let e = Exponent::<f64>::finite(2.0);
        let net = vec![
            (NetIndex::Basis { coord: 0, sign: 1 }, vec![1.0, 0.0]),
            (NetIndex::Lattice(vec![5, 0]), vec![0.5, 0.0]),
        ];
        let cands = enumerate_lp_centers(&net, 1.1, 2.0, e, 1).unwrap();
        assert_eq!(cands.len(), 1);
        assert_eq!(cands[0].center, vec![1.1, 0.0]);
        let low = vec![(NetIndex::Lattice(vec![5, 0]), vec![0.5, 0.0])];
        assert_eq!(
            enumerate_lp_centers(&low, 1.1, 2.0, e, 1),
            Err(OpCoverError::EmptyWindow)
        );
    }

    #[test]
    fn smallest_truncation_can_miss_the_bound() {
        // diag(0.96, 1): θ_1 = 0.96 clears the threshold but the truncated
        // center leaves the second row uncovered
        let t = Operator::<f64>::square_exp(vec![vec![0.96, 0.0], vec![0.0, 1.0]], 2.0).unwrap();
        let k = LpConstants::new(2.0, 1.05).unwrap();
        let net = DualBallNet::for_window(2, Exponent::finite(2.0), k.c, 2).unwrap();
        let cert = certify_lp_operator(&t, 1.05, &net).unwrap();
        assert_eq!(cert.t0_first, 1);
        assert_eq!(cert.t0, 2);
        assert!(cert.holds());
    }
}
