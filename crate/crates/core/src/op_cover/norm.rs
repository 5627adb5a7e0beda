use nalgebra::DMatrix;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::scalar::Scalar;
use crate::seed::rng;
use crate::spaces::Exponent;

use super::OpCoverError;

/// Matrix of `T: ℓ_q^n → ℓ_p^m`, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Operator<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
    pub q: Exponent<T>,
    pub p: Exponent<T>,
}

#[derive(Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
struct OperatorRepr<T> {
    matrix: Vec<Vec<T>>,
    q: Exponent<T>,
    p: Exponent<T>,
}

impl<T: Scalar> Serialize for Operator<T> {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        OperatorRepr {
            matrix: (0..self.rows).map(|i| self.row(i).to_vec()).collect(),
            q: self.q,
            p: self.p,
        }
        .serialize(s)
    }
}

impl<'de, T: Scalar> Deserialize<'de> for Operator<T> {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let r = OperatorRepr::<T>::deserialize(d)?;
        Operator::from_rows(r.matrix, r.q, r.p).map_err(serde::de::Error::custom)
    }
}

impl<T: Scalar> Operator<T> {
    pub fn new(rows: usize, cols: usize, data: Vec<T>, q: Exponent<T>, p: Exponent<T>) -> Result<Self, OpCoverError> {
        if rows == 0 || cols == 0 || data.len() != rows * cols {
            return Err(OpCoverError::InvalidParameter(format!(
                "{} entries for a {rows}x{cols} operator",
                data.len()
            )));
        }
        if data.iter().any(|x| !x.is_finite()) {
            return Err(OpCoverError::InvalidParameter("non-finite entry".into()));
        }
        Ok(Operator { rows, cols, data, q, p })
    }

    pub fn from_rows(rows: Vec<Vec<T>>, q: Exponent<T>, p: Exponent<T>) -> Result<Self, OpCoverError> {
        let m = rows.len();
        let n = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != n) {
            return Err(OpCoverError::InvalidParameter("ragged matrix".into()));
        }
        Self::new(m, n, rows.concat(), q, p)
    }

    /// Same exponent on both sides: `B(ℓ_p^n, ℓ_p^m)`.
    pub fn square_exp(rows: Vec<Vec<T>>, p: f64) -> Result<Self, OpCoverError> {
        let e = if p.is_infinite() {
            Exponent::infinity()
        } else {
            Exponent::finite(p)
        };
        Self::from_rows(rows, e, e)
    }

    pub fn identity(n: usize, q: Exponent<T>, p: Exponent<T>) -> Self {
        let mut data = vec![T::zero(); n * n];
        for i in 0..n {
            data[i * n + i] = T::one();
        }
        Operator {
            rows: n,
            cols: n,
            data,
            q,
            p,
        }
    }

    /// `x ↦ ⟨v, x⟩ u`, an `|u| × |v|` matrix.
    pub fn rank_one(u: &[T], v: &[T], q: Exponent<T>, p: Exponent<T>) -> Self {
        let data = u.iter().flat_map(|&a| v.iter().map(move |&b| a * b)).collect();
        Operator {
            rows: u.len(),
            cols: v.len(),
            data,
            q,
            p,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<T> {
        (0..self.rows).map(|i| self.data[i * self.cols + j]).collect()
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[i * self.cols + j]
    }

    pub fn apply(&self, x: &[T]) -> Vec<T> {
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(x).fold(T::zero(), |s, (a, b)| s + *a * *b))
            .collect()
    }

    pub fn apply_transpose(&self, y: &[T]) -> Vec<T> {
        let mut out = vec![T::zero(); self.cols];
        for (i, &yi) in y.iter().enumerate() {
            for (o, &a) in out.iter_mut().zip(self.row(i)) {
                *o = *o + a * yi;
            }
        }
        out
    }

    /// Adjoint `T*: ℓ_{p'}^m → ℓ_{q'}^n`.
    pub fn adjoint(&self) -> Self {
        let data = (0..self.cols).flat_map(|j| self.column(j)).collect();
        Operator {
            rows: self.cols,
            cols: self.rows,
            data,
            q: self.p.conjugate(),
            p: self.q.conjugate(),
        }
    }

    pub fn scaled(&self, k: T) -> Self {
        Operator {
            data: self.data.iter().map(|&x| x * k).collect(),
            ..self.clone()
        }
    }

    pub fn minus(&self, other: &Operator<T>) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Operator {
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| a - b).collect(),
            ..self.clone()
        }
    }

    /// First `t` rows, as a map into `ℓ_p^t`.
    pub fn truncated(&self, t: usize) -> Self {
        Operator {
            rows: t,
            data: self.data[..t * self.cols].to_vec(),
            ..self.clone()
        }
    }

    pub fn to_f64_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_row_iterator(self.rows, self.cols, self.data.iter().map(|x| x.to_f64_lossy()))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum NormMethod {
    ColumnSums,
    RowDualNorms,
    SingularValue,
    SignVertices,
    DualSignVertices,
    Ascent,
}

/// Value of an induced norm with a unit vector attaining it.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(bound = "T: Scalar")]
pub struct NormEstimate<T> {
    pub value: T,
    pub argmax: Vec<T>,
    pub method: NormMethod,
    /// False when the ascent hit its iteration cap; `value` is still the best found.
    pub converged: bool,
}

#[derive(Clone, Copy, Debug)]
pub struct AscentConfig {
    pub restarts: usize,
    pub max_iter: usize,
    pub tol: f64,
    pub seed: u64,
}

impl Default for AscentConfig {
    fn default() -> Self {
        AscentConfig {
            restarts: 32,
            max_iter: 500,
            tol: 1e-12,
            seed: 0x5eed_0b0d,
        }
    }
}

const MAX_VERTEX_DIM: usize = 16;

/// `sup ‖Tx‖_p` over the `ℓ_q` unit sphere.
///
/// Exact at the corners (`q = 1`: largest column `p`-norm; `p = ∞`: largest
/// row `q'`-norm; `q = p = 2`: top singular value), by vertex enumeration for
/// `q = ∞` or `p = 1` in small dimension, and otherwise by multi-start
/// fixed-point ascent.
pub fn operator_norm<T: Scalar>(op: &Operator<T>) -> NormEstimate<T> {
    let (q, p) = (op.q, op.p);
    if q.value() == T::one() {
        let (j, value) = (0..op.cols)
            .map(|j| (j, p.norm(&op.column(j))))
            .fold((0, T::neg_infinity()), |best, c| if c.1 > best.1 { c } else { best });
        let mut argmax = vec![T::zero(); op.cols];
        argmax[j] = T::one();
        return exact(value, argmax, NormMethod::ColumnSums);
    }
    if p.is_infinite() {
        let qd = q.conjugate();
        let (i, value) = (0..op.rows)
            .map(|i| (i, qd.norm(op.row(i))))
            .fold((0, T::neg_infinity()), |best, c| if c.1 > best.1 { c } else { best });
        return exact(value, norming_vector(op.row(i), q), NormMethod::RowDualNorms);
    }
    if q.value() == T::lit(2.0) && p.value() == T::lit(2.0) {
        let (s, _, v) = top_singular_triple(op);
        return exact(s, v, NormMethod::SingularValue);
    }
    if q.is_infinite() && op.cols <= MAX_VERTEX_DIM {
        let (value, eps) = best_sign_vertex(op.cols, |e| p.norm(&op.apply(e)));
        return exact(value, eps, NormMethod::SignVertices);
    }
    if p.value() == T::one() && op.rows <= MAX_VERTEX_DIM {
        let qd = q.conjugate();
        let (value, eps) = best_sign_vertex(op.rows, |e| qd.norm(&op.apply_transpose(e)));
        let argmax = norming_vector(&op.apply_transpose(&eps), q);
        return exact(value, argmax, NormMethod::DualSignVertices);
    }
    ascent_operator_norm(op, &AscentConfig::default())
}

fn exact<T>(value: T, argmax: Vec<T>, method: NormMethod) -> NormEstimate<T> {
    NormEstimate {
        value,
        argmax,
        method,
        converged: true,
    }
}

fn best_sign_vertex<T: Scalar>(dim: usize, f: impl Fn(&[T]) -> T) -> (T, Vec<T>) {
    let mut best = (T::neg_infinity(), vec![T::one(); dim]);
    // ε and -ε give the same value; fix the last sign
    for signs in 0..1usize << (dim - 1) {
        let e: Vec<T> = (0..dim)
            .map(|i| if signs >> i & 1 == 1 { -T::one() } else { T::one() })
            .collect();
        let v = f(&e);
        if v > best.0 {
            best = (v, e);
        }
    }
    best
}

/// Unit vector `x` in `ℓ_r` with `⟨z, x⟩ = ‖z‖_{r'}`.
pub fn norming_vector<T: Scalar>(z: &[T], r: Exponent<T>) -> Vec<T> {
    let rd = r.conjugate();
    let zn = rd.norm(z);
    if zn == T::zero() {
        let mut e = vec![T::zero(); z.len()];
        e[0] = T::one();
        return e;
    }
    if rd.is_infinite() {
        // r = 1: put all mass on the largest coordinate
        let (k, _) = z.iter().enumerate().fold(
            (0, T::neg_infinity()),
            |b, (i, x)| if x.abs() > b.1 { (i, x.abs()) } else { b },
        );
        let mut e = vec![T::zero(); z.len()];
        e[k] = z[k].signum();
        return e;
    }
    if r.is_infinite() {
        return z
            .iter()
            .map(|x| if *x == T::zero() { T::zero() } else { x.signum() })
            .collect();
    }
    let e = rd.value() - T::one();
    let x: Vec<T> = z.iter().map(|&zi| zi.signum() * (zi.abs() / zn).powf(e)).collect();
    let xn = r.norm(&x);
    x.into_iter().map(|xi| xi / xn).collect()
}

/// `(σ₁, u₁, v₁)` of the matrix.
pub fn top_singular_triple<T: Scalar>(op: &Operator<T>) -> (T, Vec<T>, Vec<T>) {
    let svd = op.to_f64_matrix().svd(true, true);
    let (k, s) = svd
        .singular_values
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |b, (i, &s)| if s > b.1 { (i, s) } else { b });
    let u = svd.u.expect("requested");
    let vt = svd.v_t.expect("requested");
    let ucol = u.column(k).iter().map(|&x| T::lit(x)).collect();
    let vrow = vt.row(k).iter().map(|&x| T::lit(x)).collect();
    (T::lit(s), ucol, vrow)
}

/// Multi-start fixed-point ascent: `x ← J_q*(Aᵀ J_p(Ax))` where `J_r` maps a
/// vector to its unit norming functional. Starts are the coordinate vectors
/// followed by seeded Gaussian vectors.
pub fn ascent_operator_norm<T: Scalar>(op: &Operator<T>, cfg: &AscentConfig) -> NormEstimate<T> {
    let (q, p) = (op.q, op.p);
    let n = op.cols;
    let mut rng = rng(cfg.seed ^ ((op.rows as u64) << 32 | n as u64));
    let tol = T::lit(cfg.tol);
    let mut best: Option<NormEstimate<T>> = None;
    for r in 0..cfg.restarts.max(1) {
        let start: Vec<T> = if r < n {
            let mut e = vec![T::zero(); n];
            e[r] = T::one();
            e
        } else {
            (0..n).map(|_| T::lit(StandardNormal.sample(&mut rng))).collect()
        };
        let sn = q.norm(&start);
        if sn == T::zero() {
            continue;
        }
        let mut x: Vec<T> = start.into_iter().map(|v| v / sn).collect();
        let mut value = p.norm(&op.apply(&x));
        let mut converged = false;
        for _ in 0..cfg.max_iter {
            let y = op.apply(&x);
            if p.norm(&y) == T::zero() {
                converged = true;
                break;
            }
            let z = op.apply_transpose(&norming_vector(&y, p.conjugate()));
            let next = norming_vector(&z, q);
            let next_value = p.norm(&op.apply(&next));
            let delta = (next_value - value).abs();
            if next_value >= value {
                x = next;
                value = next_value;
            }
            if delta <= tol * value.max(T::one()) {
                converged = true;
                break;
            }
        }
        let better = best.as_ref().is_none_or(|b| value > b.value);
        if better {
            best = Some(NormEstimate {
                value,
                argmax: x,
                method: NormMethod::Ascent,
                converged,
            });
        }
    }
    best.unwrap_or(NormEstimate {
        value: T::zero(),
        argmax: vec![T::zero(); n],
        method: NormMethod::Ascent,
        converged: true,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn corner_norms() {
        let a = Operator::<f64>::square_exp(vec![vec![1.0, 2.0], vec![3.0, 4.0]], 1.0).unwrap();
        assert_eq!(operator_norm(&a).value, 6.0);
        let b = Operator::<f64>::square_exp(vec![vec![1.0, 2.0], vec![3.0, 4.0]], f64::INFINITY).unwrap();
        assert_eq!(operator_norm(&b).value, 7.0);
        let d = Operator::<f64>::square_exp(vec![vec![3.0, 0.0], vec![0.0, 1.0]], 2.0).unwrap();
        assert!((operator_norm(&d).value - 3.0).abs() < 1e-12);
    }

    #[test]
    fn argmax_attains_value() {
        let a = Operator::<f64>::square_exp(
            vec![vec![1.0, -2.0, 0.5], vec![0.3, 4.0, -1.0], vec![2.0, 0.0, 1.0]],
            2.5,
        )
        .unwrap();
        let est = operator_norm(&a);
        assert_eq!(est.method, NormMethod::Ascent);
        assert!(est.converged);
        assert!((a.q.norm(&est.argmax) - 1.0).abs() < 1e-12);
        assert!((a.p.norm(&a.apply(&est.argmax)) - est.value).abs() < 1e-12);
    }

    #[test]
    fn ascent_matches_svd_on_fixed_matrix() {
        let a = Operator::<f64>::square_exp(vec![vec![2.0, 1.0], vec![-1.0, 3.0]], 2.0).unwrap();
        let exact = operator_norm(&a).value;
        let asc = ascent_operator_norm(&a, &AscentConfig::default()).value;
        assert!((exact - asc).abs() < 1e-10, "{exact} vs {asc}");
    }

    #[test]
    fn adjoint_has_same_norm() {
        let a = Operator::<f64>::square_exp(vec![vec![1.0, 2.0], vec![0.5, -1.0]], 3.0).unwrap();
        let n1 = operator_norm(&a).value;
        let n2 = operator_norm(&a.adjoint()).value;
        assert!((n1 - n2).abs() < 1e-9, "{n1} vs {n2}");
    }

    #[test]
    fn vertex_cases() {
        // q = ∞, p = 1 on a 2x2 sign pattern
        let a = Operator::<f64>::from_rows(
            vec![vec![1.0, 1.0], vec![1.0, -1.0]],
            Exponent::infinity(),
            Exponent::finite(1.0),
        )
        .unwrap();
        assert_eq!(operator_norm(&a).value, 2.0);
        let b = Operator::<f64>::from_rows(
            vec![vec![1.0, 1.0], vec![1.0, -1.0]],
            Exponent::finite(2.0),
            Exponent::finite(1.0),
        )
        .unwrap();
        let est = operator_norm(&b);
        assert_eq!(est.method, NormMethod::DualSignVertices);
        assert!((est.value - 2.0).abs() < 1e-12);
    }

    #[test]
    fn json_shape() {
        let a = Operator::<f64>::square_exp(vec![vec![1.0, 2.0]], 2.0).unwrap();
        let s = serde_json::to_string(&a).unwrap();
        assert_eq!(s, r#"{"matrix":[[1.0,2.0]],"q":2.0,"p":2.0}"#);
        let back: Operator<f64> = serde_json::from_str(&s).unwrap();
        assert_eq!(back, a);
    }
}
