//! Dense Cholesky sampling of Gaussian paths on a grid.
//!
//! Paths are generated in fixed blocks of [`BLOCK_PATHS`]; block `b` draws
//! from stream `b` of the seeded generator, so an ensemble is a function of
//! `(seed, grid, n_paths, process)` alone, whatever the thread count.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use super::process::ProcessSpec;
use super::rng::{RandomSeed, GENERATOR};
use crate::definiteness::check_positive_semidefinite;
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::kernel::{gram, GramMatrix};
use crate::linalg;
use crate::tolerance::ToleranceConfig;

pub const BLOCK_PATHS: usize = 1024;
pub const MAX_GRID: usize = 4096;

/// Jitter multipliers on `mean(diag)`: none, then 1e-12 up to 1e-6.
const JITTER_LADDER: [f64; 8] = [0.0, 1e-12, 1e-11, 1e-10, 1e-9, 1e-8, 1e-7, 1e-6];

#[derive(Debug, Clone)]
pub struct PathEnsemble {
    grid: Grid,
    /// Row-major, `n_paths x grid.len()`.
    paths: Vec<f64>,
    n_paths: usize,
    seed: RandomSeed,
    target: ProcessSpec,
    jitter: f64,
}

impl PathEnsemble {
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn n_paths(&self) -> usize {
        self.n_paths
    }

    pub fn seed(&self) -> RandomSeed {
        self.seed
    }

    pub fn target(&self) -> &ProcessSpec {
        &self.target
    }

    pub fn generator(&self) -> &'static str {
        GENERATOR
    }

    /// Absolute diagonal jitter that was needed for the factorization.
    pub fn jitter(&self) -> f64 {
        self.jitter
    }

    pub fn path(&self, i: usize) -> &[f64] {
        let n = self.grid.len();
        &self.paths[i * n..(i + 1) * n]
    }

    pub fn paths(&self) -> impl Iterator<Item = &[f64]> {
        self.paths.chunks_exact(self.grid.len())
    }

    pub fn raw(&self) -> &[f64] {
        &self.paths
    }
}

/// Lower-triangular `L` with `L L^T = m`, tolerating exactly-dependent
/// rows: a pivot that vanishes to rounding is set to zero provided the rest
/// of its column vanishes too.
fn semidefinite_cholesky(m: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    let n = m.nrows();
    let max_diag = m.diagonal().amax();
    let zero_tol = 8.0 * n as f64 * f64::EPSILON * max_diag;
    let mut l = DMatrix::<f64>::zeros(n, n);
    for j in 0..n {
        let mut d = m[(j, j)];
        for k in 0..j {
            d -= l[(j, k)] * l[(j, k)];
        }
        let mut col: Vec<f64> = ((j + 1)..n)
            .map(|i| {
                let mut v = m[(i, j)];
                for k in 0..j {
                    v -= l[(i, k)] * l[(j, k)];
                }
                v
            })
            .collect();
        if d > zero_tol {
            let root = d.sqrt();
            l[(j, j)] = root;
            for (off, v) in col.iter_mut().enumerate() {
                l[(j + 1 + off, j)] = *v / root;
            }
        } else if d >= -zero_tol && col.iter().all(|v| v.abs() <= zero_tol) {
            col.clear();
        } else {
            return None;
        }
    }
    Some(l)
}

/// Cholesky factor with escalating jitter `eps * mean(diag)`; returns the
/// factor and the absolute jitter used.
pub fn jittered_cholesky(g: &GramMatrix) -> Result<(DMatrix<f64>, f64)> {
    let m = g.entries();
    let n = m.nrows();
    let mean_diag = m.diagonal().sum() / n as f64;
    for eps in JITTER_LADDER {
        let jitter = eps * mean_diag;
        let mut a = m.clone();
        for i in 0..n {
            a[(i, i)] += jitter;
        }
        if let Some(l) = semidefinite_cholesky(&a) {
            return Ok((l, jitter));
        }
    }
    let min_eigenvalue = *linalg::eigenvalues(m)?.last().unwrap();
    Err(Error::JitterExhausted {
        max_jitter: JITTER_LADDER[JITTER_LADDER.len() - 1] * mean_diag,
        min_eigenvalue,
    })
}

/// `n_paths` i.i.d. draws of the centered Gaussian vector with covariance
/// `gram(p, grid)`.
pub fn sample_paths(p: &ProcessSpec, grid: &Grid, n_paths: usize, seed: RandomSeed) -> Result<PathEnsemble> {
    if n_paths == 0 {
        return Err(Error::InvalidParameter("n_paths must be at least 1".into()));
    }
    if grid.len() > MAX_GRID {
        return Err(Error::InvalidParameter(format!(
            "dense sampling is capped at {MAX_GRID} grid points, got {}",
            grid.len()
        )));
    }
    let kernel = p.kernel();
    let g = gram(&kernel, grid)?;
    if let ProcessSpec::Custom(_) = p {
        let verdict = check_positive_semidefinite(&g, &ToleranceConfig::default())?;
        if !verdict.pass {
            return Err(Error::NotPositiveSemidefinite {
                min_eigenvalue: verdict.min_eigenvalue,
            });
        }
    }
    let (l, jitter) = jittered_cholesky(&g)?;
    let n = grid.len();
    let mut paths = vec![0.0; n_paths * n];
    paths
        .par_chunks_mut(BLOCK_PATHS * n)
        .enumerate()
        .for_each(|(block, chunk)| {
            let mut rng = seed.stream(block as u64);
            let mut z = vec![0.0; n];
            for row in chunk.chunks_exact_mut(n) {
                for zi in z.iter_mut() {
                    *zi = rng.sample(StandardNormal);
                }
                for i in 0..n {
                    let mut acc = 0.0;
                    for k in 0..=i {
                        acc += l[(i, k)] * z[k];
                    }
                    row[i] = acc;
                }
            }
        });
    Ok(PathEnsemble {
        grid: grid.clone(),
        paths,
        n_paths,
        seed,
        target: p.clone(),
        jitter,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmpiricalCovariance {
    pub matrix: Vec<Vec<f64>>,
    pub target: Vec<Vec<f64>>,
    pub max_abs_deviation: f64,
    pub n_paths: usize,
}

/// `(1/M) sum x x^T` against the target Gram matrix. With `subtract_mean`
/// the sample mean is removed first (normalized by `M - 1`).
pub fn empirical_covariance(e: &PathEnsemble, subtract_mean: bool) -> Result<EmpiricalCovariance> {
    let m = e.n_paths();
    if m < 2 {
        return Err(Error::InvalidParameter("empirical covariance needs at least 2 paths".into()));
    }
    let n = e.grid().len();
    let mut mean = vec![0.0; n];
    if subtract_mean {
        for path in e.paths() {
            for (acc, v) in mean.iter_mut().zip(path) {
                *acc += v;
            }
        }
        mean.iter_mut().for_each(|v| *v /= m as f64);
    }
    let mut sums = vec![0.0; n * n];
    for path in e.paths() {
        for i in 0..n {
            let xi = path[i] - mean[i];
            for j in i..n {
                sums[i * n + j] += xi * (path[j] - mean[j]);
            }
        }
    }
    let denom = if subtract_mean { (m - 1) as f64 } else { m as f64 };
    let target = gram(&e.target().kernel(), e.grid())?;
    let mut matrix = vec![vec![0.0; n]; n];
    let mut max_abs_deviation = 0.0f64;
    for i in 0..n {
        for j in i..n {
            let v = sums[i * n + j] / denom;
            matrix[i][j] = v;
            matrix[j][i] = v;
            max_abs_deviation = max_abs_deviation.max((v - target.entries()[(i, j)]).abs());
        }
    }
    Ok(EmpiricalCovariance {
        matrix,
        target: target.to_rows(),
        max_abs_deviation,
        n_paths: m,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::{KernelSpec, TabulatedKernel};

    fn grid(p: &[f64]) -> Grid {
        Grid::new(p.to_vec()).unwrap()
    }

    #[test]
    fn rejects_zero_paths() {
        assert!(sample_paths(&ProcessSpec::BrownianTwoSided, &grid(&[1.0]), 0, RandomSeed(1)).is_err());
    }

    #[test]
    fn single_point_variance() {
        let e = sample_paths(&ProcessSpec::BrownianTwoSided, &grid(&[2.0]), 1_000_000, RandomSeed(11)).unwrap();
        let var = e.raw().iter().map(|x| x * x).sum::<f64>() / 1e6;
        // 3 C sqrt(2 / M) with C = 2
        assert!((var - 2.0).abs() <= 3.0 * 2.0 * (2.0f64 / 1e6).sqrt(), "{var}");
    }

    #[test]
    fn fbm_half_matches_brownian_bitwise() {
        let g = grid(&[0.25, 0.5, 1.0, 1.5, 2.0]);
        let a = sample_paths(&ProcessSpec::fractional_brownian(0.5).unwrap(), &g, 3000, RandomSeed(5)).unwrap();
        let b = sample_paths(&ProcessSpec::BrownianTwoSided, &g, 3000, RandomSeed(5)).unwrap();
        assert_eq!(a.raw(), b.raw());
    }

    #[test]
    fn zero_kernel_gives_zero_paths() {
        let g = grid(&[0.0, 1.0, 2.0]);
        let k = KernelSpec::Tabulated(TabulatedKernel::new(g.clone(), DMatrix::zeros(3, 3)).unwrap());
        let e = sample_paths(&ProcessSpec::Custom(k), &g, 50, RandomSeed(3)).unwrap();
        assert!(e.raw().iter().all(|&x| x == 0.0));
        let c = empirical_covariance(&e, false).unwrap();
        assert!(c.matrix.iter().flatten().all(|&x| x == 0.0));
        assert_eq!(c.max_abs_deviation, 0.0);
    }

    #[test]
    fn brownian_through_origin_is_exactly_singular() {
        // C(0, .) = 0 gives a zero row: no jitter needed
        let g = grid(&[0.0, 1.0, 2.0]);
        let (l, jitter) = jittered_cholesky(&gram(&KernelSpec::BrownianTwoSided, &g).unwrap()).unwrap();
        assert_eq!(jitter, 0.0);
        assert!(l.row(0).iter().all(|&v| v == 0.0));
    }

    #[test]
    fn custom_indefinite_is_rejected_before_sampling() {
        let g = grid(&[0.0, 1.0]);
        let m = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        let k = KernelSpec::Tabulated(TabulatedKernel::new(g.clone(), m).unwrap());
        assert!(matches!(
            sample_paths(&ProcessSpec::Custom(k), &g, 10, RandomSeed(1)),
            Err(Error::NotPositiveSemidefinite { .. })
        ));
    }

    #[test]
    fn jitter_exhaustion_reports_min_eigenvalue() {
        let g = GramMatrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 1.0]]).unwrap();
        match jittered_cholesky(&g) {
            Err(Error::JitterExhausted { min_eigenvalue, .. }) => assert!((min_eigenvalue + 1.0).abs() < 1e-12),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn determinism_across_thread_counts() {
        let g = grid(&[0.5, 1.0, 1.5]);
        let p = ProcessSpec::fractional_brownian(0.3).unwrap();
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| sample_paths(&p, &g, 5000, RandomSeed(9)).unwrap())
        };
        assert_eq!(run(1).raw(), run(4).raw());
    }

    #[test]
    fn empirical_covariance_small_case() {
        let g = grid(&[1.0, 2.0, 3.0]);
        let e = sample_paths(&ProcessSpec::BrownianTwoSided, &g, 20_000, RandomSeed(2024)).unwrap();
        let c = empirical_covariance(&e, false).unwrap();
        assert!(c.max_abs_deviation <= 0.15, "{}", c.max_abs_deviation);
        let c = empirical_covariance(&e, true).unwrap();
        assert!(c.max_abs_deviation <= 0.15);
    }
}
