use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::op_cover::{operator_norm, Operator};
use crate::scalar::Scalar;

use super::SpaceError;

/// Norm exponent in `[1, ∞]`. Serializes as a number, or `"inf"`.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct Exponent<T>(T);

impl<T: Scalar> Exponent<T> {
    pub fn new(p: T) -> Result<Self, SpaceError> {
        if p.is_nan() || p < T::one() {
            return Err(SpaceError::InvalidParameter(format!("exponent {p} < 1")));
        }
        Ok(Exponent(p))
    }

    pub fn finite(p: f64) -> Self {
        Self::new(T::lit(p)).expect("exponent >= 1")
    }

    pub fn infinity() -> Self {
        Exponent(T::infinity())
    }

    pub fn value(self) -> T {
        self.0
    }

    pub fn is_infinite(self) -> bool {
        self.0.is_infinite()
    }

    /// Hölder conjugate `p' = p/(p-1)`.
    pub fn conjugate(self) -> Self {
        if self.0.is_infinite() {
            Exponent(T::one())
        } else if self.0 == T::one() {
            Exponent(T::infinity())
        } else {
            Exponent(self.0 / (self.0 - T::one()))
        }
    }

    /// `‖v‖_p`.
    pub fn norm(self, v: &[T]) -> T {
        let p = self.0;
        if p.is_infinite() {
            v.iter().fold(T::zero(), |m, x| m.max(x.abs()))
        } else if p == T::one() {
            v.iter().fold(T::zero(), |s, x| s + x.abs())
        } else if p == T::lit(2.0) {
            v.iter().fold(T::zero(), |s, x| s + *x * *x).sqrt()
        } else {
            // scale by the max entry so |x|^p cannot underflow or overflow
            let m = v.iter().fold(T::zero(), |m, x| m.max(x.abs()));
            if m == T::zero() {
                return T::zero();
            }
            let s = v.iter().fold(T::zero(), |s, x| s + (x.abs() / m).powf(p));
            m * s.powf(p.recip())
        }
    }
}

impl<T: Scalar> fmt::Display for Exponent<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_infinite() {
            write!(f, "inf")
        } else {
            write!(f, "{}", self.0)
        }
    }
}

impl<T: Scalar> Serialize for Exponent<T> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if self.0.is_infinite() {
            s.serialize_str("inf")
        } else {
            self.0.serialize(s)
        }
    }
}

impl<'de, T: Scalar> Deserialize<'de> for Exponent<T> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Num(f64),
            Str(String),
        }
        let p = match Repr::deserialize(d)? {
            Repr::Num(x) => T::lit(x),
            Repr::Str(s) if s == "inf" || s == "infinity" => T::infinity(),
            Repr::Str(s) => return Err(serde::de::Error::custom(format!("bad exponent `{s}`"))),
        };
        Exponent::new(p).map_err(serde::de::Error::custom)
    }
}

/// Admissible node vectors of a sup-norm grid model of `C(K)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum GridMode<T> {
    /// Every node vector; `K` is a discrete space.
    Discrete,
    /// Values of piecewise-linear functions on equispaced nodes of `[0,1]`
    /// with slope at most `slope`.
    Lipschitz { slope: T },
}

/// Finite-dimensional normed space.
///
/// Vectors are flat slices: `VectorGrid` stores one value-space block per
/// node, `LinfSum` concatenates its blocks, `Operator` is row-major `m×n`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SpaceModel<T> {
    Lp {
        n: usize,
        p: Exponent<T>,
    },
    SupGrid {
        n: usize,
        #[serde(flatten)]
        mode: GridMode<T>,
    },
    /// `C(K, X)` over a grid model of `K` with values in `value`.
    VectorGrid {
        n: usize,
        #[serde(flatten)]
        mode: GridMode<T>,
        value: Box<SpaceModel<T>>,
    },
    LinfSum {
        blocks: Vec<SpaceModel<T>>,
    },
    /// `B(ℓ_q^n, ℓ_p^m)` with the induced operator norm.
    Operator {
        m: usize,
        n: usize,
        q: Exponent<T>,
        p: Exponent<T>,
    },
}

impl<T: Scalar> SpaceModel<T> {
    pub fn lp(n: usize, p: f64) -> Self {
        let p = if p.is_infinite() {
            Exponent::infinity()
        } else {
            Exponent::finite(p)
        };
        SpaceModel::Lp { n, p }
    }

    pub fn sup_grid(n: usize) -> Self {
        SpaceModel::SupGrid {
            n,
            mode: GridMode::Discrete,
        }
    }

    pub fn lipschitz_grid(n: usize, slope: T) -> Self {
        SpaceModel::SupGrid {
            n,
            mode: GridMode::Lipschitz { slope },
        }
    }

    pub fn vector_grid(n: usize, value: SpaceModel<T>) -> Self {
        SpaceModel::VectorGrid {
            n,
            mode: GridMode::Discrete,
            value: Box::new(value),
        }
    }

    pub fn operator(m: usize, n: usize, q: Exponent<T>, p: Exponent<T>) -> Self {
        SpaceModel::Operator { m, n, q, p }
    }

    pub fn dim(&self) -> usize {
        match self {
            SpaceModel::Lp { n, .. } | SpaceModel::SupGrid { n, .. } => *n,
            SpaceModel::VectorGrid { n, value, .. } => n * value.dim(),
            SpaceModel::LinfSum { blocks } => blocks.iter().map(SpaceModel::dim).sum(),
            SpaceModel::Operator { m, n, .. } => m * n,
        }
    }

    pub fn validate(&self) -> Result<(), SpaceError> {
        let bad = |msg: String| Err(SpaceError::InvalidParameter(msg));
        match self {
            SpaceModel::Lp { n, .. } | SpaceModel::SupGrid { n, .. } if *n == 0 => bad("dimension must be >= 1".into()),
            SpaceModel::SupGrid {
                mode: GridMode::Lipschitz { slope },
                ..
            }
            | SpaceModel::VectorGrid {
                mode: GridMode::Lipschitz { slope },
                ..
            } if !(*slope > T::zero()) => bad(format!("slope bound {slope} must be positive")),
            SpaceModel::VectorGrid { n, value, .. } => {
                if *n == 0 {
                    return bad("grid needs at least one node".into());
                }
                value.validate()
            }
            SpaceModel::LinfSum { blocks } => {
                if blocks.is_empty() {
                    return bad("empty l-infinity sum".into());
                }
                blocks.iter().try_for_each(SpaceModel::validate)
            }
            SpaceModel::Operator { m, n, .. } if *m == 0 || *n == 0 => bad("operator dimensions must be >= 1".into()),
            _ => Ok(()),
        }
    }

    /// Start offsets of the blocks of a `LinfSum` or `VectorGrid` vector.
    pub fn block_ranges(&self) -> Vec<std::ops::Range<usize>> {
        let dims: Vec<usize> = match self {
            SpaceModel::LinfSum { blocks } => blocks.iter().map(SpaceModel::dim).collect(),
            SpaceModel::VectorGrid { n, value, .. } => vec![value.dim(); *n],
            _ => vec![self.dim()],
        };
        let mut start = 0;
        dims.into_iter()
            .map(|d| {
                let r = start..start + d;
                start += d;
                r
            })
            .collect()
    }
}

/// Norm of `v` in `space`. Operator norms go through [`operator_norm`].
pub fn norm_of<T: Scalar>(space: &SpaceModel<T>, v: &[T]) -> Result<T, SpaceError> {
    if v.len() != space.dim() {
        return Err(SpaceError::DimensionMismatch {
            expected: space.dim(),
            got: v.len(),
        });
    }
    Ok(norm_unchecked(space, v))
}

pub(crate) fn norm_unchecked<T: Scalar>(space: &SpaceModel<T>, v: &[T]) -> T {
    match space {
        SpaceModel::Lp { p, .. } => p.norm(v),
        SpaceModel::SupGrid { .. } => Exponent::<T>::infinity().norm(v),
        SpaceModel::VectorGrid { value, .. } => {
            let d = value.dim();
            v.chunks(d)
                .map(|blk| norm_unchecked(value, blk))
                .fold(T::zero(), T::max)
        }
        SpaceModel::LinfSum { blocks } => {
            let mut start = 0;
            blocks.iter().fold(T::zero(), |acc, b| {
                let d = b.dim();
                let nb = norm_unchecked(b, &v[start..start + d]);
                start += d;
                acc.max(nb)
            })
        }
        SpaceModel::Operator { m, n, q, p } => {
            let op = Operator::new(*m, *n, v.to_vec(), *q, *p).expect("dimension checked");
            operator_norm(&op).value
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lp_norm_values() {
        let s = SpaceModel::<f64>::lp(2, 3.0);
        let v = norm_of(&s, &[1.0, 1.0]).unwrap();
        assert!((v - 2f64.powf(1.0 / 3.0)).abs() < 1e-15);
        let s1 = SpaceModel::<f64>::lp(3, 1.0);
        assert_eq!(norm_of(&s1, &[1.0, -2.0, 0.5]).unwrap(), 3.5);
    }

    #[test]
    fn sup_grid_norm() {
        let s = SpaceModel::<f64>::sup_grid(3);
        assert_eq!(norm_of(&s, &[0.2, -0.9, 0.5]).unwrap(), 0.9);
    }

    #[test]
    fn linf_sum_norm() {
        let s = SpaceModel::LinfSum {
            blocks: vec![SpaceModel::<f64>::lp(2, 2.0), SpaceModel::lp(2, 2.0)],
        };
        assert_eq!(norm_of(&s, &[3.0, 4.0, 1.0, 0.0]).unwrap(), 5.0);
    }

    #[test]
    fn dimension_mismatch() {
        let s = SpaceModel::<f64>::lp(2, 2.0);
        assert_eq!(
            norm_of(&s, &[1.0]),
            Err(SpaceError::DimensionMismatch { expected: 2, got: 1 })
        );
    }

    #[test]
    fn exponent_serde() {
        let s = SpaceModel::<f64>::lp(3, f64::INFINITY);
        let json = serde_json::to_string(&s).unwrap();
        assert_eq!(json, r#"{"kind":"lp","n":3,"p":"inf"}"#);
        let back: SpaceModel<f64> = serde_json::from_str(&json).unwrap();
        assert_eq!(back, s);
        let g = SpaceModel::<f64>::lipschitz_grid(9, 4.0);
        let json = serde_json::to_string(&g).unwrap();
        assert_eq!(json, r#"{"kind":"sup_grid","n":9,"mode":"lipschitz","slope":4.0}"#);
        assert!(serde_json::from_str::<Exponent<f64>>("0.5").is_err());
    }

    #[test]
    fn conjugates() {
        assert_eq!(Exponent::<f64>::finite(2.0).conjugate().value(), 2.0);
        assert_eq!(Exponent::<f64>::finite(3.0).conjugate().value(), 1.5);
        assert!(Exponent::<f64>::finite(1.0).conjugate().is_infinite());
    }

    #[test]
    fn f32_norms_work() {
        let s = SpaceModel::<f32>::lp(2, 2.0);
        assert_eq!(norm_of(&s, &[3.0f32, 4.0]).unwrap(), 5.0f32);
    }
}
