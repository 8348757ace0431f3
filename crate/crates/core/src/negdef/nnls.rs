//! Active-set nonnegative least squares (Lawson-Hanson).
//!
//! Minimizes `|A x - y|_2` subject to `x >= 0`. The passive-set subproblems
//! are solved by SVD, so near-collinear columns do not blow up the inner
//! solve; a column whose unconstrained coefficient comes back nonpositive
//! on entry is excluded until the dual changes.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct NnlsSolution {
    pub x: DVector<f64>,
    pub residual_norm: f64,
    pub iterations: usize,
}

/// `kkt_tol` is relative to `max_j |A_j| * |y|`.
pub fn nnls(a: &DMatrix<f64>, y: &DVector<f64>, kkt_tol: f64) -> Result<NnlsSolution> {
    let (m, n) = a.shape();
    if m == 0 || n == 0 || y.len() != m {
        return Err(Error::InvalidParameter(format!(
            "nnls: design is {m}x{n}, data has {} entries",
            y.len()
        )));
    }
    if a.iter().chain(y.iter()).any(|v| !v.is_finite()) {
        return Err(Error::Numerical("nnls: non-finite input".into()));
    }

    let col_norm = (0..n).map(|j| a.column(j).norm()).fold(0.0f64, f64::max);
    let threshold = kkt_tol * (col_norm * y.norm()).max(f64::MIN_POSITIVE);
    let max_outer = 3 * n + 10;

    let mut x = DVector::zeros(n);
    let mut passive = vec![false; n];
    let mut excluded = vec![false; n];
    let mut iterations = 0;

    loop {
        let residual = y - a * &x;
        let w = a.transpose() * &residual;
        let candidate = (0..n)
            .filter(|&j| !passive[j] && !excluded[j] && w[j] > threshold)
            .max_by(|&i, &j| w[i].partial_cmp(&w[j]).unwrap());
        let Some(entering) = candidate else { break };
        iterations += 1;
        if iterations > max_outer {
            return Err(Error::Numerical(format!(
                "nnls: no convergence after {max_outer} outer iterations"
            )));
        }

        passive[entering] = true;
        let mut z = solve_passive(a, y, &passive);
        if z[entering] <= 0.0 {
            // Dependent on the current passive set: leave it out until the
            // dual vector moves.
            passive[entering] = false;
            excluded[entering] = true;
            continue;
        }
        excluded.iter_mut().for_each(|e| *e = false);

        for _ in 0..(3 * n + 10) {
            if (0..n).all(|j| !passive[j] || z[j] > 0.0) {
                break;
            }
            let alpha = (0..n)
                .filter(|&j| passive[j] && z[j] <= 0.0)
                .map(|j| x[j] / (x[j] - z[j]))
                .fold(f64::INFINITY, f64::min);
            for j in 0..n {
                x[j] += alpha * (z[j] - x[j]);
                if passive[j] && x[j] <= 0.0 {
                    passive[j] = false;
                    x[j] = 0.0;
                }
            }
            z = solve_passive(a, y, &passive);
        }
        for j in 0..n {
            x[j] = if passive[j] { z[j].max(0.0) } else { 0.0 };
        }
    }

    let residual_norm = (y - a * &x).norm();
    Ok(NnlsSolution {
        x,
        residual_norm,
        iterations,
    })
}

fn solve_passive(a: &DMatrix<f64>, y: &DVector<f64>, passive: &[bool]) -> DVector<f64> {
    let cols: Vec<usize> = (0..passive.len()).filter(|&j| passive[j]).collect();
    let mut z = DVector::zeros(passive.len());
    if cols.is_empty() {
        return z;
    }
    let sub = a.select_columns(&cols);
    let svd = sub.svd(true, true);
    let cutoff = svd.singular_values.max() * f64::EPSILON * (a.nrows().max(cols.len()) as f64);
    let sol = svd.solve(y, cutoff).expect("SVD computed with both factors");
    for (k, &j) in cols.iter().enumerate() {
        z[j] = sol[k];
    }
    z
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unconstrained_optimum_inside_orthant() {
        let a = DMatrix::from_row_slice(3, 2, &[1.0, 0.0, 0.0, 1.0, 1.0, 1.0]);
        let y = DVector::from_vec(vec![1.0, 2.0, 3.0]);
        let s = nnls(&a, &y, 1e-12).unwrap();
        assert!((s.x[0] - 1.0).abs() < 1e-12 && (s.x[1] - 2.0).abs() < 1e-12);
        assert!(s.residual_norm < 1e-12);
    }

    #[test]
    fn active_constraint() {
        // unconstrained solution is (2, -1); NNLS clamps the second to 0
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 1.0]);
        let y = DVector::from_vec(vec![2.0, -1.0]);
        let s = nnls(&a, &y, 1e-12).unwrap();
        assert_eq!(s.x.as_slice(), &[2.0, 0.0]);
        assert!((s.residual_norm - 1.0).abs() < 1e-14);
    }

    #[test]
    fn kkt_conditions_hold() {
        let a = DMatrix::from_fn(8, 5, |i, j| ((i * 7 + j * 3) % 5) as f64 - 1.5 + 0.1 * j as f64);
        let y = DVector::from_fn(8, |i, _| (i as f64).sin());
        let s = nnls(&a, &y, 1e-12).unwrap();
        let w = a.transpose() * (&y - &a * &s.x);
        for j in 0..5 {
            assert!(s.x[j] >= 0.0);
            assert!(w[j] <= 1e-9, "dual {j} = {}", w[j]);
            if s.x[j] > 0.0 {
                assert!(w[j].abs() <= 1e-9);
            }
        }
    }

    #[test]
    fn duplicate_columns_do_not_stall() {
        let a = DMatrix::from_row_slice(3, 3, &[1.0, 1.0, 0.0, 1.0, 1.0, 1.0, 1.0, 1.0, 2.0]);
        let y = DVector::from_vec(vec![1.0, 2.0, 3.0]);
        let s = nnls(&a, &y, 1e-12).unwrap();
        assert!(s.residual_norm < 1e-10);
        assert!((s.x[0] + s.x[1] - 1.0).abs() < 1e-10);
    }
}
