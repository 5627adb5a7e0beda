#![allow(dead_code)]

use bcplab::op_cover::Operator;

/// `‖x‖_p` for finite `p`.
pub fn lp_norm(x: &[f64], p: f64) -> f64 {
    x.iter().map(|v| v.abs().powf(p)).sum::<f64>().powf(1.0 / p)
}

/// Brute-force `‖A‖_{p→p}` for `n <= 3` columns: maximises `‖Ax‖_p / ‖x‖_p`
/// over a grid of step `h` on the faces of `[-1, 1]^n`. Every ray through
/// the origin meets a face, so this is a dense net of directions.
pub fn dense_net_norm(a: &Operator<f64>, p: f64, h: f64) -> f64 {
    let n = a.cols();
    assert!((1..=3).contains(&n), "brute force only for n <= 3");
    let steps = (2.0 / h).round() as i64;
    let coord = |k: i64| -1.0 + 2.0 * k as f64 / steps as f64;
    let mut best = 0.0f64;
    let mut x = vec![0.0; n];
    for face in 0..n {
        // opposite faces give negated vectors with equal ratio
        x[face] = 1.0;
        let free: Vec<usize> = (0..n).filter(|&i| i != face).collect();
        let total = (steps + 1).pow(free.len() as u32);
        for idx in 0..total {
            let mut r = idx;
            for &j in &free {
                x[j] = coord(r % (steps + 1));
                r /= steps + 1;
            }
            best = best.max(lp_norm(&a.apply(&x), p) / lp_norm(&x, p));
        }
    }
    best
}

/// Uniform entries in `[-1, 1]`.
pub fn uniform_matrix(rng: &mut bcplab::seed::Rng, rows: usize, cols: usize) -> Vec<f64> {
    use rand::Rng as _;
    (0..rows * cols).map(|_| rng.gen_range(-1.0..=1.0)).collect()
}
