//! Acceptance criteria, one line each. Expected values come from closed
//! forms or from independent computations in this file, not from the
//! library's own reference values.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use rpkit::affine::{
    check_cocycle_identity, check_duality, check_theta_equivariance, dilation_correlation, normalized_one_sided, psi_of,
    CocycleSpec,
};
use rpkit::gauss::{
    check_stationary_increments, increment_form, mc_characteristic, mc_fock_kernel, sample_paths, Estimate,
    PathEnsemble, ProcessSpec, RandomSeed,
};
use rpkit::grid::Grid;
use rpkit::kernel::{reflected_gram, KernelSpec, ReflectionSetup};
use rpkit::negdef::{
    check_bernstein, check_reflection_negative, lk_eval, lk_fit, schoenberg_bridge, BernsteinOptions, LkFitOptions,
    LkTriple, PsiSpec,
};
use rpkit::quotient::{hat_contraction, os_quotient};
use rpkit::tolerance::ToleranceConfig;

const ALPHAS: [f64; 8] = [0.0, 0.25, 0.5, 0.75, 1.0, 1.25, 1.5, 2.0];
const LINE_GRID: [f64; 6] = [-2.0, -1.0, -0.5, 0.5, 1.0, 2.0];

type Outcome = (bool, String);

fn grid(p: &[f64]) -> Grid {
    Grid::new(p.to_vec()).unwrap()
}

fn tol() -> ToleranceConfig {
    ToleranceConfig::default()
}

/// Largest quadratic form `c^T M c` over `trials` random unit vectors with
/// zero sum: positive values witness a failure of negative definiteness.
fn max_centered_form(m: &DMatrix<f64>, trials: usize, rng: &mut ChaCha8Rng) -> f64 {
    let n = m.nrows();
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..trials {
        let mut c: Vec<f64> = (0..n).map(|_| rng.random::<f64>() - 0.5).collect();
        let mean = c.iter().sum::<f64>() / n as f64;
        c.iter_mut().for_each(|x| *x -= mean);
        let norm = c.iter().map(|x| x * x).sum::<f64>().sqrt();
        c.iter_mut().for_each(|x| *x /= norm);
        let q: f64 = (0..n).map(|i| (0..n).map(|j| c[i] * m[(i, j)] * c[j]).sum::<f64>()).sum();
        worst = worst.max(q);
    }
    worst
}

fn power_matrix(alpha: f64, pts: &[f64], op: impl Fn(f64, f64) -> f64) -> DMatrix<f64> {
    let psi = |x: f64| if x == 0.0 { 0.0 } else { x.abs().powf(alpha) };
    DMatrix::from_fn(pts.len(), pts.len(), |i, j| psi(op(pts[i], pts[j])))
}

fn criterion_1() -> Outcome {
    let g = grid(&LINE_GRID);
    let positive = [0.5, 1.0, 2.0];
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut ok = true;
    let mut notes = Vec::new();
    for alpha in ALPHAS {
        let expected = alpha <= 1.0;
        let v = check_reflection_negative(&PsiSpec::power(alpha).unwrap(), &g, &tol()).unwrap();
        // independent: concave psi gives midpoint inequality; otherwise a
        // two-point witness c = (1, -1) on {0.5, 2} of the semigroup kernel
        let semi = power_matrix(alpha, &positive, |s, t| s + t);
        let line = power_matrix(alpha, &LINE_GRID, |s, t| s - t);
        let witness = semi[(0, 0)] + semi[(2, 2)] - 2.0 * semi[(0, 2)];
        let sampled = max_centered_form(&semi, 2000, &mut rng).max(max_centered_form(&line, 2000, &mut rng));
        let oracle = if expected { sampled <= 1e-12 } else { witness > 0.0 };
        ok &= v.pass == expected && oracle;
        notes.push(format!("{alpha}:{}", if v.pass { "pass" } else { "fail" }));
    }
    (ok, notes.join(" "))
}

fn criterion_2() -> Outcome {
    let g = Grid::range(0.1, 5.0, 0.1).unwrap();
    let options = BernsteinOptions { h: 0.01, k_max: 8, tol: 1e-7 };
    let line = grid(&LINE_GRID);
    let mut ok = true;
    let mut notes = Vec::new();
    for alpha in ALPHAS {
        let psi = PsiSpec::power(alpha).unwrap();
        let b = check_bernstein(&psi, &g, &options).unwrap();
        let rn = check_reflection_negative(&psi, &line, &tol()).unwrap();
        // for alpha in (1, 2] the k = 2 term -alpha (alpha - 1) t^(alpha - 2) is negative;
        // for alpha <= 1 every (-1)^(k-1) alpha (alpha-1)...(alpha-k+1) is >= 0
        let analytic = alpha <= 1.0;
        ok &= b.pass == rn.pass && b.pass == analytic;
        notes.push(format!(
            "{alpha}:{}{}",
            if b.pass { "pass" } else { "fail" },
            b.failing_order.map(|k| format!("@k={k}")).unwrap_or_default()
        ));
    }
    (ok, notes.join(" "))
}

fn criterion_3() -> Outcome {
    let setup = ReflectionSetup::line(grid(&[0.5, 1.0, 2.0, 4.0])).unwrap();
    let exp = os_quotient(&reflected_gram(&KernelSpec::exponential(1.0).unwrap(), &setup).unwrap(), &tol()).unwrap();
    let setup = ReflectionSetup::line(grid(&[1.0, 2.0, 3.0])).unwrap();
    let bm = os_quotient(&reflected_gram(&KernelSpec::BrownianTwoSided, &setup).unwrap(), &tol()).unwrap();
    // e^{-(s+t)} is the outer product of e^{-s} with itself; C(s, -t) = 0 for s, t > 0
    (exp.rank == 1 && bm.rank == 0, format!("exponential rank {}, brownian rank {}", exp.rank, bm.rank))
}

fn criterion_4() -> Outcome {
    let setup = ReflectionSetup::line(grid(&[0.5, 1.0, 2.0, 4.0])).unwrap();
    let k = KernelSpec::exponential(1.0).unwrap();
    let mut worst = 0.0f64;
    let mut ok = true;
    for s in [0.1, 0.5, 1.0, 2.0] {
        let r = hat_contraction(&k, &setup, s, &tol()).unwrap();
        let err = (r.operator_norm - (-s).exp()).abs();
        worst = worst.max(err);
        ok &= err <= 1e-8 && r.operator_norm <= 1.0 && r.contraction;
    }
    (ok, format!("max |norm - e^-s| = {worst:.2e}"))
}

fn criterion_5() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let b = CocycleSpec::Brownian;
    let (mut cocycle_d, mut theta_d, mut psi_d, mut cov_d) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    let mut ok = true;
    for _ in 0..100 {
        let s = rng.random_range(-10.0..10.0);
        let t = rng.random_range(-10.0..10.0);
        let c = check_cocycle_identity(b, s, t, 1e-14).unwrap();
        let d = check_duality(b, s, t, 1e-14).unwrap();
        let th = check_theta_equivariance(b, t, 1e-14).unwrap();
        let ps = (psi_of(b, s).unwrap() - s.abs()).abs().max((psi_of(b, -t).unwrap() - t.abs()).abs());
        // closed-form Brownian covariance
        let cov = 0.5 * (s.abs() + t.abs() - (s - t).abs());
        cocycle_d = cocycle_d.max(c.distance);
        theta_d = theta_d.max(th.distance);
        psi_d = psi_d.max(ps);
        cov_d = cov_d.max((d.covariance - cov).abs());
        ok &= c.pass && d.pass && th.pass && ps <= 1e-14 && (d.covariance - cov).abs() <= 1e-14;
    }
    (
        ok,
        format!("max distances: cocycle {cocycle_d:.1e}, theta {theta_d:.1e}, psi {psi_d:.1e}, covariance {cov_d:.1e}"),
    )
}

fn criterion_6() -> Outcome {
    let mut worst = 0.0f64;
    for t in [-3.0f64, -1.0, 0.0, 0.5, 2.0] {
        let direct = dilation_correlation(t).unwrap();
        let b1 = normalized_one_sided(1.0).unwrap();
        let via = b1.inner(&normalized_one_sided((-t).exp()).unwrap());
        worst = worst
            .max((direct - (-0.5 * t.abs()).exp()).abs())
            .max((via - (-0.5 * t.abs()).exp()).abs());
    }
    (worst <= 1e-12, format!("max error {worst:.1e}"))
}

fn complex_error(e: Estimate, target: f64) -> f64 {
    match e {
        Estimate::Complex { re, im } => (re - target).hypot(im),
        Estimate::Real(x) => (x - target).abs(),
    }
}

const MC_SEED: u64 = 20_161_018;
const MC_N: usize = 1_000_000;

fn mc_run() -> [Estimate; 3] {
    let a = mc_characteristic(&[1.0, 0.0, 0.0], MC_N, RandomSeed(MC_SEED)).unwrap();
    let b = mc_characteristic(&[0.5, 0.5, 0.0], MC_N, RandomSeed(MC_SEED + 1)).unwrap();
    let f = mc_fock_kernel(&[1.0, 0.0], &[0.0, 1.0], MC_N, RandomSeed(MC_SEED + 2)).unwrap();
    [a.estimate, b.estimate, f.normalized.estimate]
}

fn criterion_7() -> Outcome {
    let [a, b, f] = mc_run();
    let ea = complex_error(a, (-0.5f64).exp());
    let eb = complex_error(b, (-0.25f64).exp());
    let ef = complex_error(f, 0.0f64.exp());
    (
        ea <= 0.005 && eb <= 0.005 && ef <= 0.01,
        format!("errors {ea:.2e}, {eb:.2e} (<= 5e-3); fock {ef:.2e} (<= 1e-2)"),
    )
}

const SAMPLER_SEED: u64 = 42;
const SAMPLER_M: usize = 50_000;
const HURST: f64 = 0.3;

fn sampler_run() -> PathEnsemble {
    let fbm = ProcessSpec::fractional_brownian(HURST).unwrap();
    sample_paths(&fbm, &Grid::range(0.25, 2.0, 0.25).unwrap(), SAMPLER_M, RandomSeed(SAMPLER_SEED)).unwrap()
}

fn criterion_8() -> Outcome {
    let e = sampler_run();
    let pts = e.grid().points().to_vec();
    let n = pts.len();
    let h2 = 2.0 * HURST;
    let fbm_cov = |s: f64, t: f64| 0.5 * (s.powf(h2) + t.powf(h2) - (s - t).abs().powf(h2));
    let mut sums = vec![0.0; n * n];
    for path in e.paths() {
        for i in 0..n {
            for j in 0..n {
                sums[i * n + j] += path[i] * path[j];
            }
        }
    }
    let mut dev = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            dev = dev.max((sums[i * n + j] / SAMPLER_M as f64 - fbm_cov(pts[i], pts[j])).abs());
        }
    }

    let fbm = ProcessSpec::fractional_brownian(HURST).unwrap();
    let line = grid(&[-2.0, -1.25, -0.5, 0.0, 0.25, 1.0, 1.75, 2.0]);
    let stat = check_stationary_increments(&fbm, &line, 1e-12).unwrap();
    let mut closed = 0.0f64;
    for &s in line.points() {
        for &t in line.points() {
            closed = closed.max((increment_form(&fbm, s, t).unwrap() - (s - t).abs().powf(h2)).abs());
        }
    }
    (
        n == 8 && dev <= 0.05 && stat.pass && closed <= 1e-12,
        format!(
            "covariance deviation {dev:.4} (<= 0.05); increments {} over {} comparisons, closed-form error {closed:.1e}",
            if stat.pass { "stationary" } else { "NOT stationary" },
            stat.comparisons
        ),
    )
}

fn criterion_9() -> Outcome {
    let ts = Grid::logspace(0.1, 10.0, 200).unwrap();

    let truth = LkTriple::from_pairs(0.5, 0.25, &[(1.0, 2.0)]).unwrap();
    let clean: Vec<(f64, f64)> = ts.iter().map(|t| (t, lk_eval(&truth, t))).collect();
    let fit = lk_fit(&clean, &[0.1, 0.3, 1.0, 3.0], &LkFitOptions::default()).unwrap();
    let rel = |x: f64, y: f64| (x - y).abs() / y.abs();
    let tr = &fit.triple;
    let round_trip = tr.atoms.len() == 1
        && tr.atoms[0].lambda == 1.0
        && rel(tr.a, 0.5) <= 1e-6
        && rel(tr.b, 0.25) <= 1e-6
        && rel(tr.atoms[0].weight, 2.0) <= 1e-6;

    let alpha: f64 = 0.5;
    let samples: Vec<(f64, f64)> = ts.iter().map(|t| (t, t.powf(alpha))).collect();
    let lambdas = Grid::logspace(0.01, 1000.0, 60).unwrap().into_vec();
    let fit = lk_fit(&samples, &lambdas, &LkFitOptions::default()).unwrap();
    // mass of alpha / Gamma(1 - alpha) lambda^(-1 - alpha) between geometric midpoints
    let gamma = statrs::function::gamma::gamma(1.0 - alpha);
    let ratio = (lambdas[1] / lambdas[0]).sqrt();
    let mut matched = 0;
    for (j, &l) in lambdas.iter().enumerate() {
        let lo = if j == 0 { l / ratio } else { (lambdas[j - 1] * l).sqrt() };
        let hi = if j + 1 == lambdas.len() { l * ratio } else { (l * lambdas[j + 1]).sqrt() };
        let oracle = (lo.powf(-alpha) - hi.powf(-alpha)) / gamma;
        let fitted = fit.triple.atoms.iter().find(|a| a.lambda == l).map_or(0.0, |a| a.weight);
        if (fitted - oracle).abs() <= 0.1 * oracle {
            matched += 1;
        }
    }
    let residual_ok = fit.residual <= 1e-3;
    (
        round_trip && residual_ok && matched == lambdas.len(),
        format!(
            "round trip {}; t^0.5 residual {:.1e} ({}); bins within 10%: {matched}/{} ({})",
            if round_trip { "ok" } else { "FAILED" },
            fit.residual,
            if residual_ok { "ok" } else { "FAILED" },
            lambdas.len(),
            if matched == lambdas.len() { "ok" } else { "FAILED: weights not identifiable, see notes" },
        ),
    )
}

fn min_eigenvalue(m: DMatrix<f64>) -> f64 {
    m.symmetric_eigen().eigenvalues.min()
}

fn criterion_10() -> Outcome {
    let g = grid(&LINE_GRID);
    let lambdas = [0.1, 1.0, 10.0];
    let mut ok = true;
    for psi in [PsiSpec::AbsoluteValue, PsiSpec::power(0.5).unwrap()] {
        ok &= schoenberg_bridge(&psi, &lambdas, &g, &tol()).unwrap().iter().all(|e| e.pass);
    }
    let square = PsiSpec::power(2.0).unwrap();
    let entry = schoenberg_bridge(&square, &[1.0], &g, &tol()).unwrap()[0];
    let rn = check_reflection_negative(&square, &g, &tol()).unwrap();
    let oracle = min_eigenvalue(power_matrix(2.0, &[0.5, 1.0, 2.0], |s, t| s + t).map(|v| (-v).exp()));
    ok &= !entry.semigroup.pass && !rn.nd_on_semigroup && oracle < -1e-3;
    (
        ok,
        format!(
            "|t|, |t|^0.5 pass at lambda 0.1, 1, 10; |t|^2 semigroup min eigenvalue {:.4} (direct {oracle:.4})",
            entry.semigroup.min_eigenvalue
        ),
    )
}

fn criterion_11() -> Outcome {
    let bits = |e: &[Estimate; 3]| -> Vec<u64> {
        e.iter()
            .flat_map(|x| match *x {
                Estimate::Complex { re, im } => vec![re.to_bits(), im.to_bits()],
                Estimate::Real(r) => vec![r.to_bits()],
            })
            .collect()
    };
    let mc_same = bits(&mc_run()) == bits(&mc_run());
    let single = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let mc_threads = bits(&mc_run()) == bits(&single.install(mc_run));

    let raw = |e: &PathEnsemble| e.raw().iter().map(|x| x.to_bits()).collect::<Vec<_>>();
    let (a, b) = (sampler_run(), sampler_run());
    let paths_same = raw(&a) == raw(&b);
    let paths_threads = raw(&a) == raw(&single.install(sampler_run));
    (
        mc_same && mc_threads && paths_same && paths_threads,
        format!(
            "mc repeat {}, mc 1-thread {}, paths repeat {}, paths 1-thread {}",
            mc_same, mc_threads, paths_same, paths_threads
        ),
    )
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 11] = [
        ("reflection negativity of power laws", criterion_1),
        ("Bernstein agrees with reflection negativity", criterion_2),
        ("OS quotient dimensions", criterion_3),
        ("contraction semigroup e^-s", criterion_4),
        ("cocycle exactness", criterion_5),
        ("dilation picture e^-|t|/2", criterion_6),
        ("Monte Carlo second quantization", criterion_7),
        ("sampler fidelity", criterion_8),
        ("Levy-Khintchine round trip", criterion_9),
        ("Schoenberg bridge", criterion_10),
        ("determinism", criterion_11),
    ];
    let mut failed = Vec::new();
    for (i, (title, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let (pass, detail) = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            (false, format!("panicked: {msg}"))
        });
        let secs = start.elapsed().as_secs_f64();
        println!(
            "criterion {:>2} {} {title}: {detail} [{secs:.2} s]",
            i + 1,
            if pass { "PASS" } else { "FAIL" }
        );
        if !pass {
            failed.push(i + 1);
        }
    }
    if failed.is_empty() {
        println!("acceptance: all {} criteria pass", criteria.len());
    } else {
        println!("acceptance: {} of {} criteria fail: {failed:?}", failed.len(), criteria.len());
        std::process::exit(1);
    }
}
