use serde::Serialize;

use crate::scalar::Scalar;
use crate::spaces::Exponent;

use super::OpCoverError;

/// Address of a net point.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum NetIndex {
    /// `step * k` on the coordinate lattice.
    Lattice(Vec<i64>),
    /// `sign * e_coord`.
    Basis { coord: usize, sign: i8 },
    /// Cube-face grid point `face_sign * e_face + step * k` (other coordinates), normalized.
    Face { face: usize, sign: i8, grid: Vec<i64> },
}

/// Implicit net of the closed unit ball of `ℓ_r^n`: lattice points of step
/// `δ/√n` with norm at most 1, together with every `±e_i`.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(bound = "T: Scalar")]
pub struct DualBallNet<T> {
    pub n: usize,
    pub exp: Exponent<T>,
    pub step: T,
}

impl<T: Scalar> DualBallNet<T> {
    pub fn new(n: usize, exp: Exponent<T>, delta: T) -> Result<Self, OpCoverError> {
        if n == 0 || !(delta > T::zero()) {
            return Err(OpCoverError::InvalidParameter(format!(
                "net needs n >= 1 and δ > 0, got n={n}, δ={delta}"
            )));
        }
        let step = delta / T::from_usize(n).expect("small").sqrt();
        Ok(DualBallNet { n, exp, step })
    }

    /// `δ = (1-c)/(6 k_max)`.
    pub fn for_window(n: usize, exp: Exponent<T>, c: T, k_max: usize) -> Result<Self, OpCoverError> {
        let k = T::from_usize(k_max.max(1)).expect("small");
        Self::new(n, exp, (T::one() - c) / (T::lit(6.0) * k))
    }

    pub fn delta(&self) -> T {
        self.step * T::from_usize(self.n).expect("small").sqrt()
    }

    pub fn point(&self, idx: &NetIndex) -> Vec<T> {
        match idx {
            NetIndex::Lattice(k) => k.iter().map(|&ki| self.step * T::lit(ki as f64)).collect(),
            NetIndex::Basis { coord, sign } => {
                let mut e = vec![T::zero(); self.n];
                e[*coord] = T::lit(f64::from(*sign));
                e
            }
            NetIndex::Face { .. } => panic!("face index on a ball net"),
        }
    }

    /// Closest net point to `v` among the rounded lattice point, its
    /// rounding towards zero, and the `±e_i`. Returns the index, the point
    /// and its distance from `v` in the net norm.
    pub fn nearest(&self, v: &[T]) -> (NetIndex, Vec<T>, T) {
        assert_eq!(v.len(), self.n);
        let mut cands = Vec::with_capacity(2 + 2 * self.n);
        let round: Vec<i64> = v.iter().map(|&x| lattice_coord(x / self.step, false)).collect();
        let trunc: Vec<i64> = v.iter().map(|&x| lattice_coord(x / self.step, true)).collect();
        cands.push(NetIndex::Lattice(round));
        cands.push(NetIndex::Lattice(trunc));
        for coord in 0..self.n {
            for sign in [1i8, -1] {
                cands.push(NetIndex::Basis { coord, sign });
            }
        }
        let one = T::one() + T::lit(1e-12);
        let mut best: Option<(NetIndex, Vec<T>, T)> = None;
        for idx in cands {
            let x = self.point(&idx);
            if self.exp.norm(&x) > one {
                continue;
            }
            let diff: Vec<T> = v.iter().zip(&x).map(|(&a, &b)| a - b).collect();
            let d = self.exp.norm(&diff);
            if best.as_ref().is_none_or(|b| d < b.2) {
                best = Some((idx, x, d));
            }
        }
        best.expect("±e_i always lie in the ball")
    }

    /// Every net point, lattice points in lexicographic order then `±e_i`.
    /// Fails when there are more than `limit` lattice points in the box.
    pub fn enumerate(&self, limit: usize) -> Result<Vec<(NetIndex, Vec<T>)>, OpCoverError> {
        let r = (T::one() / self.step).floor().to_i64().expect("finite step");
        let side = (2 * r + 1) as f64;
        if side.powi(self.n as i32) > limit as f64 {
            return Err(OpCoverError::NetTooLarge {
                points: side.powi(self.n as i32),
                limit,
            });
        }
        let mut out = Vec::new();
        let mut k = vec![-r; self.n];
        loop {
            let idx = NetIndex::Lattice(k.clone());
            let x = self.point(&idx);
            if self.exp.norm(&x) <= T::one() + T::lit(1e-12) {
                out.push((idx, x));
            }
            if !odometer(&mut k, -r, r) {
                break;
            }
        }
        for coord in 0..self.n {
            for sign in [1i8, -1] {
                let idx = NetIndex::Basis { coord, sign };
                let x = self.point(&idx);
                if !out.iter().any(|(_, y)| *y == x) {
                    out.push((idx, x));
                }
            }
        }
        Ok(out)
    }
}

fn lattice_coord<T: Scalar>(x: T, toward_zero: bool) -> i64 {
    let r = if toward_zero { x.trunc() } else { x.round() };
    r.to_i64().expect("finite coordinate")
}

/// Advances `k` through `[lo, hi]^n`; false after the last vector.
pub(crate) fn odometer(k: &mut [i64], lo: i64, hi: i64) -> bool {
    for ki in k.iter_mut() {
        if *ki < hi {
            *ki += 1;
            return true;
        }
        *ki = lo;
    }
    false
}

/// Implicit net of the unit sphere of `ℓ_r^n`: points of the cube faces
/// `{‖y‖_∞ = 1}` on a grid of the given step, normalized in `ℓ_r`.
///
/// For `r = 2` a point `x` is within `step·√(n-1)` of its snapped image.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(bound = "T: Scalar")]
pub struct SphereNet<T> {
    pub n: usize,
    pub exp: Exponent<T>,
    pub step: T,
}

impl<T: Scalar> SphereNet<T> {
    pub fn new(n: usize, exp: Exponent<T>, step: T) -> Result<Self, OpCoverError> {
        if n == 0 || !(step > T::zero()) || step > T::one() {
            return Err(OpCoverError::InvalidParameter(format!(
                "sphere net needs n >= 1 and step in (0,1], got n={n}, step={step}"
            )));
        }
        Ok(SphereNet { n, exp, step })
    }

    /// Euclidean sphere net with mesh at most `delta`.
    pub fn euclidean(n: usize, delta: T) -> Result<Self, OpCoverError> {
        let k = T::from_usize(n.saturating_sub(1).max(1)).expect("small").sqrt();
        Self::new(n, Exponent::finite(2.0), (delta / k).min(T::one()))
    }

    /// Guaranteed mesh in the Euclidean case.
    pub fn euclidean_mesh(&self) -> T {
        if self.n == 1 {
            return T::zero();
        }
        self.step * T::from_usize(self.n - 1).expect("small").sqrt()
    }

    pub fn point(&self, idx: &NetIndex) -> Vec<T> {
        let NetIndex::Face { face, sign, grid } = idx else {
            panic!("ball index on a sphere net");
        };
        let mut y = Vec::with_capacity(self.n);
        let mut g = grid.iter();
        for i in 0..self.n {
            if i == *face {
                y.push(T::lit(f64::from(*sign)));
            } else {
                let k = *g.next().expect("grid has n-1 entries");
                y.push((self.step * T::lit(k as f64)).max(-T::one()).min(T::one()));
            }
        }
        let norm = self.exp.norm(&y);
        y.into_iter().map(|v| v / norm).collect()
    }

    /// Snap `v != 0` to the net: project radially to the cube face, round the
    /// free coordinates, normalize.
    pub fn nearest(&self, v: &[T]) -> (NetIndex, Vec<T>) {
        assert_eq!(v.len(), self.n);
        let (face, m) = v
            .iter()
            .enumerate()
            .fold((0, T::zero()), |b, (i, x)| if x.abs() > b.1 { (i, x.abs()) } else { b });
        assert!(m > T::zero(), "cannot snap the zero vector");
        let sign: i8 = if v[face] > T::zero() { 1 } else { -1 };
        let grid = v
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != face)
            .map(|(_, &x)| (x / m / self.step).round().to_i64().expect("finite"))
            .collect();
        let idx = NetIndex::Face { face, sign, grid };
        let x = self.point(&idx);
        (idx, x)
    }
}
