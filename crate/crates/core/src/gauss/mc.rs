//! Monte Carlo checks of the Gaussian field `phi(v) = <v, Z>`,
//! `Z ~ N(0, I)`: its characteristic function, its covariance, and the
//! Fock-space kernels built from `exp(i phi(v))`.
//!
//! Samples are drawn in chunks of [`CHUNK_SAMPLES`], chunk `c` from stream
//! `c`; partial sums are combined in chunk order, so results are
//! bit-identical for any thread count.

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use super::rng::RandomSeed;
use crate::error::{Error, Result};

pub const CHUNK_SAMPLES: usize = 1 << 16;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Estimate {
    Real(f64),
    Complex { re: f64, im: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McReport {
    pub estimate: Estimate,
    pub target: f64,
    pub abs_error: f64,
    pub n_samples: usize,
    /// `3 / sqrt(n)` times the statistic's a-priori bound.
    pub half_width: f64,
    pub pass: bool,
}

impl McReport {
    fn new(estimate: Estimate, target: f64, n_samples: usize, bound: f64) -> Self {
        let abs_error = match estimate {
            Estimate::Real(x) => (x - target).abs(),
            Estimate::Complex { re, im } => (re - target).hypot(im),
        };
        let half_width = 3.0 * bound / (n_samples as f64).sqrt();
        McReport {
            estimate,
            target,
            abs_error,
            n_samples,
            half_width,
            pass: abs_error <= half_width,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FockReport {
    /// `E[conj(e^{i phi(v)}) e^{i phi(w)}]` against `exp(-|v - w|^2 / 2)`.
    pub kernel: McReport,
    /// `E[conj(Gamma(v)) Gamma(w)]` against `exp(<v, w>)`.
    pub normalized: McReport,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn check_inputs(n_samples: usize, vectors: &[&[f64]]) -> Result<()> {
    if n_samples == 0 {
        return Err(Error::InvalidParameter("n_samples must be at least 1".into()));
    }
    let dim = vectors[0].len();
    if dim == 0 {
        return Err(Error::InvalidParameter("vectors must be nonempty".into()));
    }
    for v in vectors {
        if v.len() != dim {
            return Err(Error::InvalidParameter(format!(
                "vectors must share dimension {dim}, got {}",
                v.len()
            )));
        }
        if v.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidParameter("vector entries must be finite".into()));
        }
    }
    Ok(())
}

/// Sum of `f(Z)` over `n` standard normal draws in `dim` dimensions.
fn chunked_sum<const K: usize>(
    dim: usize,
    n: usize,
    seed: RandomSeed,
    f: impl Fn(&[f64]) -> [f64; K] + Sync,
) -> [f64; K] {
    let chunks = n.div_ceil(CHUNK_SAMPLES);
    let partials: Vec<[f64; K]> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = seed.stream(c as u64);
            let len = CHUNK_SAMPLES.min(n - c * CHUNK_SAMPLES);
            let mut z = vec![0.0; dim];
            let mut acc = [0.0; K];
            for _ in 0..len {
                for zi in z.iter_mut() {
                    *zi = rng.sample(StandardNormal);
                }
                for (a, v) in acc.iter_mut().zip(f(&z)) {
                    *a += v;
                }
            }
            acc
        })
        .collect();
    partials.iter().fold([0.0; K], |mut total, p| {
        for (t, v) in total.iter_mut().zip(p) {
            *t += v;
        }
        total
    })
}

fn characteristic_sum(v: &[f64], n: usize, seed: RandomSeed) -> (f64, f64) {
    let [c, s] = chunked_sum(v.len(), n, seed, |z| {
        let phi = dot(v, z);
        [phi.cos(), phi.sin()]
    });
    (c / n as f64, s / n as f64)
}

/// `E exp(i phi(v))` against `exp(-|v|^2 / 2)`.
pub fn mc_characteristic(v: &[f64], n_samples: usize, seed: RandomSeed) -> Result<McReport> {
    check_inputs(n_samples, &[v])?;
    let (re, im) = characteristic_sum(v, n_samples, seed);
    let target = (-0.5 * dot(v, v)).exp();
    Ok(McReport::new(Estimate::Complex { re, im }, target, n_samples, 1.0))
}

/// `E[phi(v) phi(w)]` against `<v, w>`; the bound is the standard deviation
/// of the product, `sqrt(|v|^2 |w|^2 + <v, w>^2)`.
pub fn mc_field_covariance(v: &[f64], w: &[f64], n_samples: usize, seed: RandomSeed) -> Result<McReport> {
    check_inputs(n_samples, &[v, w])?;
    let [sum] = chunked_sum(v.len(), n_samples, seed, |z| [dot(v, z) * dot(w, z)]);
    let target = dot(v, w);
    let bound = (dot(v, v) * dot(w, w) + target * target).sqrt();
    Ok(McReport::new(Estimate::Real(sum / n_samples as f64), target, n_samples, bound))
}

/// Both Fock-space kernels from one set of draws. Per sample,
/// `conj(e^{i phi(v)}) e^{i phi(w)} = e^{i phi(w - v)}`, which is what is
/// averaged.
pub fn mc_fock_kernel(v: &[f64], w: &[f64], n_samples: usize, seed: RandomSeed) -> Result<FockReport> {
    check_inputs(n_samples, &[v, w])?;
    let diff: Vec<f64> = w.iter().zip(v).map(|(a, b)| a - b).collect();
    let (re, im) = characteristic_sum(&diff, n_samples, seed);
    let kernel = McReport::new(
        Estimate::Complex { re, im },
        (-0.5 * dot(&diff, &diff)).exp(),
        n_samples,
        1.0,
    );
    let norm = (0.5 * (dot(v, v) + dot(w, w))).exp();
    let normalized = McReport::new(
        Estimate::Complex {
            re: norm * re,
            im: norm * im,
        },
        dot(v, w).exp(),
        n_samples,
        norm,
    );
    Ok(FockReport { kernel, normalized })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_vector_is_exact() {
        let r = mc_characteristic(&[0.0, 0.0, 0.0], 1000, RandomSeed(1)).unwrap();
        assert_eq!(r.estimate, Estimate::Complex { re: 1.0, im: 0.0 });
        assert_eq!((r.target, r.abs_error), (1.0, 0.0));
        assert!(r.pass);
    }

    #[test]
    fn equal_vectors_are_exact() {
        let v = [0.3, -1.2];
        let r = mc_fock_kernel(&v, &v, 1000, RandomSeed(1)).unwrap();
        assert_eq!(r.kernel.estimate, Estimate::Complex { re: 1.0, im: 0.0 });
        assert_eq!(r.kernel.abs_error, 0.0);
        assert_eq!(r.normalized.abs_error, 0.0);
    }

    #[test]
    fn characteristic_function() {
        let r = mc_characteristic(&[1.0, 0.0, 0.0], 1_000_000, RandomSeed(7)).unwrap();
        assert!((r.target - 0.606_530_659_712_633_4).abs() < 1e-15);
        assert!(r.abs_error <= 0.005, "{r:?}");
    }

    #[test]
    fn field_covariance_of_orthogonal_vectors() {
        let r = mc_field_covariance(&[1.0, 0.0], &[0.0, 1.0], 1_000_000, RandomSeed(8)).unwrap();
        assert_eq!(r.target, 0.0);
        assert!(r.abs_error <= 0.005, "{r:?}");
    }

    #[test]
    fn fock_kernel_orthogonal() {
        let r = mc_fock_kernel(&[1.0, 0.0], &[0.0, 1.0], 1_000_000, RandomSeed(9)).unwrap();
        assert!((r.kernel.target - (-1.0f64).exp()).abs() < 1e-15);
        assert!(r.kernel.abs_error <= 0.005, "{r:?}");
        assert_eq!(r.normalized.target, 1.0);
        assert!(r.normalized.abs_error <= 0.01, "{r:?}");
    }

    #[test]
    fn thread_count_does_not_change_output() {
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| mc_characteristic(&[0.5, 0.5], 300_000, RandomSeed(3)).unwrap())
        };
        assert_eq!(run(1), run(3));
    }

    #[test]
    fn input_validation() {
        assert!(mc_characteristic(&[], 10, RandomSeed(0)).is_err());
        assert!(mc_characteristic(&[1.0], 0, RandomSeed(0)).is_err());
        assert!(mc_fock_kernel(&[1.0], &[1.0, 0.0], 10, RandomSeed(0)).is_err());
    }
}
