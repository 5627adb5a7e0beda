use rand::Rng as _;
use rand_distr::{Distribution, Gamma, StandardNormal};
use serde::Serialize;

use crate::scalar::Scalar;
use crate::seed::{rng, Rng};

use super::model::{norm_unchecked, GridMode, SpaceModel};

/// Unit-sphere sample, with the slope bound it satisfies in Lipschitz grid modes.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(bound = "T: Scalar")]
pub struct SphereSample<T> {
    pub point: Vec<T>,
    pub slope_bound: Option<T>,
}

/// Deterministic sample from the unit sphere of `space`.
pub fn sample_sphere<T: Scalar>(space: &SpaceModel<T>, seed: u64) -> SphereSample<T> {
    sample_sphere_with(space, &mut rng(seed))
}

pub fn sample_sphere_with<T: Scalar>(space: &SpaceModel<T>, rng: &mut Rng) -> SphereSample<T> {
    let (raw, slope_bound) = raw_sample(space, rng);
    let norm = norm_unchecked(space, &raw);
    let point = raw.into_iter().map(|x| x / norm).collect();
    SphereSample { point, slope_bound }
}

/// Nonzero vector to be normalized; Lipschitz modes already have max |v| >= 1/2.
fn raw_sample<T: Scalar>(space: &SpaceModel<T>, rng: &mut Rng) -> (Vec<T>, Option<T>) {
    let lit = T::lit;
    loop {
        let (v, slope) = match space {
            SpaceModel::Lp { n, p } => {
                let v = if p.is_infinite() {
                    (0..*n).map(|_| lit(rng.gen_range(-1.0..=1.0))).collect()
                } else {
                    // density ∝ exp(-|x|^p): |x|^p ~ Gamma(1/p, 1)
                    let pf = p.value().to_f64_lossy();
                    let gamma = Gamma::new(1.0 / pf, 1.0).expect("shape > 0");
                    (0..*n)
                        .map(|_| {
                            let mag: f64 = gamma.sample(rng).powf(1.0 / pf);
                            lit(if rng.gen::<bool>() { mag } else { -mag })
                        })
                        .collect()
                };
                (v, None)
            }
            SpaceModel::SupGrid { n, mode } => match mode {
                GridMode::Discrete => ((0..*n).map(|_| lit(rng.gen_range(-1.0..=1.0))).collect(), None),
                GridMode::Lipschitz { slope } => {
                    let v = lipschitz_walk(*n, slope.to_f64_lossy(), rng);
                    (v.into_iter().map(lit).collect(), Some(*slope + *slope))
                }
            },
            SpaceModel::VectorGrid { n, mode, value } => vector_grid_sample(*n, mode, value, rng),
            SpaceModel::LinfSum { blocks } => {
                let pick = rng.gen_range(0..blocks.len());
                let mut v = Vec::with_capacity(space.dim());
                for (k, b) in blocks.iter().enumerate() {
                    let s = sample_sphere_with(b, rng).point;
                    let r = if k == pick { 1.0 } else { rng.gen::<f64>() };
                    v.extend(s.into_iter().map(|x| x * lit(r)));
                }
                (v, None)
            }
            SpaceModel::Operator { m, n, .. } => {
                let v = (0..m * n).map(|_| lit(StandardNormal.sample(rng))).collect();
                (v, None)
            }
        };
        if norm_unchecked(space, &v) > T::zero() {
            return (v, slope);
        }
    }
}

/// Random walk with increments in `[-slope/n, slope/n]`, redrawn until its
/// sup norm is at least 1/2 (so normalization at most doubles the slope).
fn lipschitz_walk(n: usize, slope: f64, rng: &mut Rng) -> Vec<f64> {
    let step = slope / n as f64;
    loop {
        let mut v = Vec::with_capacity(n);
        let mut x: f64 = rng.gen_range(-1.0..=1.0);
        v.push(x);
        for _ in 1..n {
            x += rng.gen_range(-step..=step);
            v.push(x);
        }
        if v.iter().fold(0.0f64, |m, y| m.max(y.abs())) >= 0.5 {
            return v;
        }
    }
}

fn vector_grid_sample<T: Scalar>(
    n: usize,
    mode: &GridMode<T>,
    value: &SpaceModel<T>,
    rng: &mut Rng,
) -> (Vec<T>, Option<T>) {
    let d = value.dim();
    match mode {
        GridMode::Discrete => {
            let peak = rng.gen_range(0..n);
            let mut v = Vec::with_capacity(n * d);
            for k in 0..n {
                let s = sample_sphere_with(value, rng).point;
                let r = if k == peak { 1.0 } else { rng.gen::<f64>() };
                v.extend(s.into_iter().map(|x| x * T::lit(r)));
            }
            (v, None)
        }
        GridMode::Lipschitz { slope } => loop {
            // one walk per value coordinate, interleaved node-major
            let walks: Vec<Vec<f64>> = (0..d).map(|_| lipschitz_walk(n, slope.to_f64_lossy(), rng)).collect();
            let v: Vec<T> = (0..n).flat_map(|k| walks.iter().map(move |w| T::lit(w[k]))).collect();
            let peak = v
                .chunks(d)
                .map(|blk| norm_unchecked(value, blk))
                .fold(T::zero(), T::max);
            if peak >= T::lit(0.5) {
                return (v, Some(*slope + *slope));
            }
        },
    }
}

/// Largest node-to-node increment times `n - 1` (nodes at `i/(n-1)`).
pub fn realized_slope<T: Scalar>(values: &[T]) -> T {
    let steps = T::from_usize(values.len().saturating_sub(1)).expect("usize fits");
    values.windows(2).map(|w| (w[1] - w[0]).abs()).fold(T::zero(), T::max) * steps
}
