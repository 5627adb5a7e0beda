use serde::Serialize;

use crate::scalar::{Scalar, STRICT_SLACK};
use crate::seed::rng;
use crate::spaces::{sample_sphere_with, Ball, BallCovering, Exponent, SpaceModel};

use super::net::SphereNet;
use super::norm::{operator_norm, Operator};
use super::OpCoverError;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TransferConfig {
    /// Required `min_n |g(x_n)|`.
    pub separation: f64,
    /// Random functionals tried.
    pub search_budget: usize,
    /// Face step of the sphere nets the norming vectors are snapped to.
    pub net_step: f64,
    pub seed: u64,
}

impl Default for TransferConfig {
    fn default() -> Self {
        TransferConfig {
            separation: 1e-3,
            search_budget: 10_000,
            net_step: 1.0 / 64.0,
            seed: 0x7a2f,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(bound = "T: Scalar")]
pub struct OperatorTransfer<T> {
    /// Covering of the sphere of `Y = ℓ_p^m`.
    pub y_cover: BallCovering<T>,
    /// Covering of the sphere of `X* = ℓ_{q'}^n`.
    pub xdual_cover: BallCovering<T>,
    /// `x_n` with `‖T_n x_n‖ > r_n`.
    pub norming: Vec<Vec<T>>,
    pub g: Vec<T>,
    pub g_separation: T,
    /// `g_n ∈ S_{Y*}` with `‖T_n* g_n‖ > r_n`.
    pub dual_norming: Vec<Vec<T>>,
    pub y: Vec<T>,
    pub y_separation: T,
    /// `r_n/|g(x_n)| < ‖T_n x_n/g(x_n)‖` for every ball of both outputs.
    pub admissible: bool,
}

/// Coverings of `Y` and `X*` from a covering of the operator sphere of
/// `B(X, Y)`, `X = ℓ_q^n`, `Y = ℓ_p^m`.
pub fn operator_cover_transfer<T: Scalar>(
    c: &BallCovering<T>,
    cfg: &TransferConfig,
) -> Result<OperatorTransfer<T>, OpCoverError> {
    let SpaceModel::Operator { m, n, q, p } = c.space else {
        return Err(OpCoverError::InvalidParameter(
            "transfer needs an operator-space covering".into(),
        ));
    };
    let ops: Vec<Operator<T>> = c
        .balls
        .iter()
        .map(|b| Operator::new(m, n, b.center.clone(), q, p))
        .collect::<Result<_, _>>()?;
    let radii: Vec<T> = c.balls.iter().map(|b| b.radius).collect();

    let x_net = SphereNet::new(n, q, T::lit(cfg.net_step))?;
    let mut norming = Vec::with_capacity(ops.len());
    for (i, op) in ops.iter().enumerate() {
        norming.push(norming_vector_over(op, radii[i], &x_net, i)?);
    }
    let xdual = SpaceModel::Lp { n, p: q.conjugate() };
    let (g, g_sep) = separating_functional(&xdual, &norming, cfg, 0)?;

    let y_net = SphereNet::new(m, p.conjugate(), T::lit(cfg.net_step))?;
    let adjoints: Vec<Operator<T>> = ops.iter().map(Operator::adjoint).collect();
    let mut dual_norming = Vec::with_capacity(ops.len());
    for (i, adj) in adjoints.iter().enumerate() {
        dual_norming.push(norming_vector_over(adj, radii[i], &y_net, i)?);
    }
    let yspace = SpaceModel::Lp { n: m, p };
    let (y, y_sep) = separating_functional(&yspace, &dual_norming, cfg, 1)?;

    let mut admissible = true;
    let mut y_balls = Vec::with_capacity(ops.len());
    let mut x_balls = Vec::with_capacity(ops.len());
    for i in 0..ops.len() {
        let gx = dot(&g, &norming[i]);
        let center: Vec<T> = ops[i].apply(&norming[i]).into_iter().map(|v| v / gx).collect();
        let radius = radii[i] / gx.abs();
        admissible &= p.norm(&center) - radius > T::lit(STRICT_SLACK);
        y_balls.push(Ball::new(center, radius)?);

        let gy = dot(&dual_norming[i], &y);
        let center: Vec<T> = adjoints[i]
            .apply(&dual_norming[i])
            .into_iter()
            .map(|v| v / gy)
            .collect();
        let radius = radii[i] / gy.abs();
        admissible &= q.conjugate().norm(&center) - radius > T::lit(STRICT_SLACK);
        x_balls.push(Ball::new(center, radius)?);
    }
    Ok(OperatorTransfer {
        y_cover: BallCovering::new(yspace, y_balls)?,
        xdual_cover: BallCovering::new(xdual, x_balls)?,
        norming,
        g,
        g_separation: g_sep,
        dual_norming,
        y,
        y_separation: y_sep,
        admissible,
    })
}

/// Unit `x` with `‖op x‖ > r`: the ascent maximizer snapped to the net,
/// refining the net a few times, then the maximizer itself.
fn norming_vector_over<T: Scalar>(
    op: &Operator<T>,
    r: T,
    net: &SphereNet<T>,
    index: usize,
) -> Result<Vec<T>, OpCoverError> {
    let est = operator_norm(op);
    let slack = T::lit(STRICT_SLACK);
    let fail = || OpCoverError::NormingFailure {
        index,
        norm: est.value.to_f64_lossy(),
        radius: r.to_f64_lossy(),
    };
    if !(est.value - r > slack) {
        return Err(fail());
    }
    let mut net = net.clone();
    for _ in 0..8 {
        let (_, x) = net.nearest(&est.argmax);
        if op.p.norm(&op.apply(&x)) - r > slack {
            return Ok(x);
        }
        net.step = net.step / T::lit(2.0);
    }
    if op.p.norm(&op.apply(&est.argmax)) - r > slack {
        return Ok(est.argmax);
    }
    Err(fail())
}

/// Seeded random search over the sphere of `space` for a functional whose
/// smallest absolute value on `points` is largest.
fn separating_functional<T: Scalar>(
    space: &SpaceModel<T>,
    points: &[Vec<T>],
    cfg: &TransferConfig,
    stream: u64,
) -> Result<(Vec<T>, T), OpCoverError> {
    let mut rng = rng(cfg.seed ^ stream.wrapping_mul(0x9e37_79b9_7f4a_7c15));
    let mut best: Option<(Vec<T>, T)> = None;
    for _ in 0..cfg.search_budget.max(1) {
        let g = sample_sphere_with(space, &mut rng).point;
        let score = points.iter().map(|x| dot(&g, x).abs()).fold(T::infinity(), T::min);
        if best.as_ref().is_none_or(|b| score > b.1) {
            best = Some((g, score));
        }
    }
    let (g, score) = best.expect("budget >= 1");
    if score < T::lit(cfg.separation) {
        return Err(OpCoverError::SeparationFailure {
            best: score.to_f64_lossy(),
        });
    }
    Ok((g, score))
}

fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |s, (x, y)| s + *x * *y)
}

/// Operator `x ↦ φ(x) y`.
pub fn rank_one_operator<T: Scalar>(phi: &[T], y: &[T], q: Exponent<T>, p: Exponent<T>) -> Operator<T> {
    Operator::rank_one(y, phi, q, p)
}
