use serde::Serialize;

use crate::topology::{is_continuous_map, FiniteSpace, PointMap};

use super::CkError;

/// Composition operators of a retraction pair and their exact checks.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ComplementationRecord {
    /// `T_α h = h ∘ α`, `|K| × |L|`.
    pub t_alpha: Vec<Vec<i64>>,
    /// `T_β g = g ∘ β`, `|L| × |K|`.
    pub t_beta: Vec<Vec<i64>>,
    /// `P = T_α T_β`, `|K| × |K|`.
    pub projection: Vec<Vec<i64>>,
    pub product_is_identity: bool,
    /// Sup-norm operator norms (largest absolute row sum).
    pub norm_alpha: i64,
    pub norm_beta: i64,
    pub idempotent: bool,
}

impl ComplementationRecord {
    pub fn holds(&self) -> bool {
        self.product_is_identity && self.norm_alpha == 1 && self.norm_beta == 1 && self.idempotent
    }
}

/// `C(L)` as a 1-complemented subspace of `C(K)` from continuous
/// `α: K → L`, `β: L → K` with `α ∘ β = id_L`.
pub fn complementation_pair(alpha: &PointMap, beta: &PointMap) -> Result<ComplementationRecord, CkError> {
    let (k, l) = (alpha.source.len(), alpha.target.len());
    if beta.source.len() != l || beta.target.len() != k {
        return Err(CkError::InvalidParameter("α: K → L and β: L → K do not match".into()));
    }
    for (name, map) in [("α", alpha), ("β", beta)] {
        let v = is_continuous_map(map);
        if !v.continuous {
            return Err(CkError::NotContinuous {
                map: name.into(),
                witness: v.witness.map(|w| w.to_hex()).unwrap_or_default(),
            });
        }
    }
    if !alpha.after(beta)?.is_identity() {
        return Err(CkError::NotRetraction);
    }
    let t_alpha = selection(k, l, &alpha.assignment);
    let t_beta = selection(l, k, &beta.assignment);
    let product = matmul(&t_beta, &t_alpha);
    let projection = matmul(&t_alpha, &t_beta);
    let id: Vec<Vec<i64>> = (0..l).map(|i| (0..l).map(|j| i64::from(i == j)).collect()).collect();
    Ok(ComplementationRecord {
        product_is_identity: product == id,
        norm_alpha: row_sum_norm(&t_alpha),
        norm_beta: row_sum_norm(&t_beta),
        idempotent: matmul(&projection, &projection) == projection,
        t_alpha,
        t_beta,
        projection,
    })
}

/// Row `i` selects coordinate `map[i]`.
fn selection(rows: usize, cols: usize, map: &[usize]) -> Vec<Vec<i64>> {
    (0..rows)
        .map(|i| (0..cols).map(|j| i64::from(map[i] == j)).collect())
        .collect()
}

pub fn matmul(a: &[Vec<i64>], b: &[Vec<i64>]) -> Vec<Vec<i64>> {
    let inner = b.len();
    let cols = b.first().map_or(0, Vec::len);
    a.iter()
        .map(|row| (0..cols).map(|j| (0..inner).map(|t| row[t] * b[t][j]).sum()).collect())
        .collect()
}

fn row_sum_norm(a: &[Vec<i64>]) -> i64 {
    a.iter().map(|r| r.iter().map(|x| x.abs()).sum()).max().unwrap_or(0)
}

/// The demo pair: `K = convergent_model(N, m)`, `L = discrete_cube(m)`,
/// `α` the projection to the cube coordinate, `β(f) = (f, 0)`.
pub fn convergent_retraction(n_isolated: usize, m: usize) -> Result<(PointMap, PointMap), CkError> {
    let k = FiniteSpace::convergent_model(n_isolated, m)?;
    let l = FiniteSpace::discrete_cube(m)?;
    let cube = 1usize << m;
    let alpha: Vec<usize> = (1..=n_isolated).map(|i| (i - 1) % cube).chain(0..cube).collect();
    let beta: Vec<usize> = (0..cube).map(|f| n_isolated + f).collect();
    Ok((PointMap::new(k.clone(), l.clone(), alpha)?, PointMap::new(l, k, beta)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn convergent_model_pair() {
        let (a, b) = convergent_retraction(4, 2).unwrap();
        let r = complementation_pair(&a, &b).unwrap();
        assert!(r.holds());
        let v: Vec<Vec<i64>> = vec![vec![3], vec![-1], vec![4], vec![1], vec![-5], vec![9], vec![2], vec![6]];
        let once = matmul(&r.projection, &v);
        assert_eq!(matmul(&r.projection, &once), once);
    }

    #[test]
    fn non_retraction_rejected() {
        let (a, _) = convergent_retraction(4, 2).unwrap();
        let k = a.source.clone();
        let l = a.target.clone();
        let bad = PointMap::new(l, k, vec![4, 4, 5, 6]).unwrap();
        assert_eq!(complementation_pair(&a, &bad), Err(CkError::NotRetraction));
    }
}
