//! Minimal dense symmetric-positive-definite solvers (Cholesky based).
//! The matrices involved are small (n x n kernel matrices or (d+1) x (d+1)
//! normal equations), so a plain O(n^3) implementation is entirely adequate
//! and keeps the numeric path fully deterministic.

/// Lower-triangular Cholesky factor of a symmetric positive-definite matrix,
/// or `None` when the matrix is not numerically positive definite.
pub fn cholesky(a: &[Vec<f64>]) -> Option<Vec<Vec<f64>>> {
    let n = a.len();
    let mut l = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..=i {
            let mut sum = a[i][j];
            for k in 0..j {
                sum -= l[i][k] * l[j][k];
            }
            if i == j {
                if sum <= 0.0 || !sum.is_finite() {
                    return None;
                }
                l[i][j] = sum.sqrt();
            } else {
                l[i][j] = sum / l[j][j];
            }
        }
    }
    Some(l)
}

/// Solve `L y = b` (forward substitution).
pub fn solve_lower(l: &[Vec<f64>], b: &[f64]) -> Vec<f64> {
    let n = b.len();
    let mut y = vec![0.0; n];
    for i in 0..n {
        let mut sum = b[i];
        for k in 0..i {
            sum -= l[i][k] * y[k];
        }
        y[i] = sum / l[i][i];
    }
    y
}

/// Solve `L^T x = y` (back substitution).
pub fn solve_lower_transpose(l: &[Vec<f64>], y: &[f64]) -> Vec<f64> {
    let n = y.len();
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut sum = y[i];
        for k in i + 1..n {
            sum -= l[k][i] * x[k];
        }
        x[i] = sum / l[i][i];
    }
    x
}

/// Solve `A x = b` for symmetric positive-definite `A`.
pub fn solve_spd(a: &[Vec<f64>], b: &[f64]) -> Option<Vec<f64>> {
    let l = cholesky(a)?;
    Some(solve_lower_transpose(&l, &solve_lower(&l, b)))
}

/// Diagonal of `A^{-1}` for symmetric positive-definite `A`.
///
/// Column `i` of the inverse is the solution of `A x = e_i`; only its `i`-th
/// entry is kept.
pub fn spd_inverse_diag(a: &[Vec<f64>]) -> Option<Vec<f64>> {
    let n = a.len();
    let l = cholesky(a)?;
    let mut diag = vec![0.0; n];
    let mut e = vec![0.0; n];
    for i in 0..n {
        e[i] = 1.0;
        let x = solve_lower_transpose(&l, &solve_lower(&l, &e));
        diag[i] = x[i];
        e[i] = 0.0;
    }
    Some(diag)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn matmul_vec(a: &[Vec<f64>], x: &[f64]) -> Vec<f64> {
        a.iter().map(|row| row.iter().zip(x).map(|(r, v)| r * v).sum()).collect()
    }

    #[test]
    fn solve_recovers_known_solution() {
        let a = vec![
            vec![4.0, 1.0, 0.5],
            vec![1.0, 3.0, 0.2],
            vec![0.5, 0.2, 2.0],
        ];
        let x_true = vec![1.0, -2.0, 0.5];
        let b = matmul_vec(&a, &x_true);
        let x = solve_spd(&a, &b).unwrap();
        for (u, v) in x.iter().zip(&x_true) {
            assert!((u - v).abs() < 1e-12);
        }
    }

    #[test]
    fn inverse_diag_matches_full_inverse_by_columns() {
        let a = vec![
            vec![5.0, 1.0, 0.0],
            vec![1.0, 4.0, 0.7],
            vec![0.0, 0.7, 3.0],
        ];
        let diag = spd_inverse_diag(&a).unwrap();
        for i in 0..3 {
            let mut e = vec![0.0; 3];
            e[i] = 1.0;
            let col = solve_spd(&a, &e).unwrap();
            assert!((diag[i] - col[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn indefinite_matrix_is_rejected() {
        let a = vec![vec![1.0, 2.0], vec![2.0, 1.0]];
        assert!(cholesky(&a).is_none());
    }
}
