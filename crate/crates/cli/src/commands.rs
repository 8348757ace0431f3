use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

use rpkit::definiteness::{check_negative_definite, check_positive_semidefinite};
use rpkit::error::{Error, Result};
use rpkit::gauss::{self, ProcessSpec, RandomSeed};
use rpkit::grid::Grid;
use rpkit::io::{read_kernel_csv, read_psi_csv, write_paths_csv, PathsSidecar};
use rpkit::kernel::{gram, reflected_gram, GramMatrix, KernelSpec, ReflectionSetup};
use rpkit::negdef::{
    check_bernstein, check_reflection_negative, eval_psi, lk_eval, lk_fit, schoenberg_bridge, BernsteinOptions,
    LkFitOptions, LkTriple, PsiSpec, TabulatedPsi,
};
use rpkit::quotient::{hat_contraction, os_quotient};
use rpkit::tolerance::ToleranceConfig;
use serde::Serialize;
use serde_json::{json, Value};

use crate::args::*;

/// Result of one command before it is wrapped in the envelope.
pub struct Outcome {
    pub pass: bool,
    pub payload: Value,
    /// Rows for `--format csv` when the natural output is a table.
    pub table: Option<Vec<Vec<String>>>,
}

impl Outcome {
    fn verdict(pass: bool, payload: impl Serialize) -> Result<Self> {
        Ok(Outcome {
            pass,
            payload: serde_json::to_value(payload)?,
            table: None,
        })
    }
}

fn missing(flag: &str, what: &str) -> Error {
    Error::InvalidParameter(format!("{flag} is required for {what}"))
}

fn build_kernel(kind: KernelKind, lambda: Option<f64>, hurst: Option<f64>, csv: Option<&Path>) -> Result<KernelSpec> {
    let spec = match kind {
        KernelKind::Exponential => KernelSpec::Exponential {
            lambda: lambda.ok_or_else(|| missing("--lambda", "the exponential kernel"))?,
        },
        KernelKind::Brownian => KernelSpec::BrownianTwoSided,
        KernelKind::Fbm => KernelSpec::fractional_brownian(hurst.ok_or_else(|| missing("--hurst", "fbm"))?)?,
        KernelKind::OneSided => KernelSpec::BrownianOneSided,
        KernelKind::NormalizedOneSided => KernelSpec::NormalizedOneSided,
        KernelKind::GaussianFock => KernelSpec::GaussianFock,
        KernelKind::Tabulated => {
            let path = csv.ok_or_else(|| missing("--kernel-csv", "the tabulated kernel"))?;
            KernelSpec::Tabulated(read_kernel_csv(File::open(path)?)?)
        }
    };
    spec.validate()?;
    Ok(spec)
}

fn kernel_of(a: &KernelArgs) -> Result<KernelSpec> {
    build_kernel(a.kernel, a.lambda, a.hurst, a.kernel_csv.as_deref())
}

pub fn parse_triple(arg: &str) -> Result<LkTriple> {
    let text = match arg.strip_prefix('@') {
        Some(path) => std::fs::read_to_string(path)?,
        None => arg.to_string(),
    };
    Ok(serde_json::from_str(&text)?)
}

fn build_psi(kind: PsiKind, alpha: Option<f64>, triple: Option<&str>, csv: Option<&Path>) -> Result<PsiSpec> {
    match kind {
        PsiKind::Power => PsiSpec::power(alpha.ok_or_else(|| missing("--alpha", "the power function"))?),
        PsiKind::Abs => Ok(PsiSpec::AbsoluteValue),
        PsiKind::Lk => Ok(PsiSpec::Lk(parse_triple(
            triple.ok_or_else(|| missing("--triple", "psi = lk"))?,
        )?)),
        PsiKind::Tabulated => {
            let path = csv.ok_or_else(|| missing("--psi-csv", "the tabulated psi"))?;
            Ok(PsiSpec::Tabulated(TabulatedPsi::new(read_psi_csv(File::open(path)?)?)?))
        }
    }
}

fn psi_of(a: &PsiArgs) -> Result<PsiSpec> {
    build_psi(a.psi, a.alpha, a.triple.as_deref(), a.psi_csv.as_deref())
}

fn psi_difference_matrix(psi: &PsiSpec, grid: &Grid) -> Result<GramMatrix> {
    let rows = grid
        .iter()
        .map(|s| grid.iter().map(|t| eval_psi(psi, s - t)).collect::<Result<Vec<_>>>())
        .collect::<Result<Vec<_>>>()?;
    GramMatrix::from_rows(&rows)
}

pub fn check(cmd: &CheckCommand, tol: &ToleranceConfig) -> Result<Outcome> {
    match cmd {
        CheckCommand::Pd(a) => {
            let v = check_positive_semidefinite(&gram(&kernel_of(&a.kernel)?, &a.grid.grid)?, tol)?;
            Outcome::verdict(v.pass, v)
        }
        CheckCommand::Nd(a) => {
            let g = match (a.psi, a.kernel) {
                (Some(kind), _) => psi_difference_matrix(
                    &build_psi(kind, a.alpha, a.triple.as_deref(), a.psi_csv.as_deref())?,
                    &a.grid.grid,
                )?,
                (None, Some(kind)) => gram(
                    &build_kernel(kind, a.lambda, a.hurst, a.kernel_csv.as_deref())?,
                    &a.grid.grid,
                )?,
                (None, None) => return Err(missing("--psi or --kernel", "check nd")),
            };
            let v = check_negative_definite(&g, tol)?;
            Outcome::verdict(v.pass, v)
        }
        CheckCommand::ReflectionPositive(a) => {
            let setup = ReflectionSetup::new(a.reflection.into(), a.grid.grid.clone())?;
            let v = check_positive_semidefinite(&reflected_gram(&kernel_of(&a.kernel)?, &setup)?, tol)?;
            Outcome::verdict(v.pass, v)
        }
        CheckCommand::ReflectionNegative(a) => {
            let v = check_reflection_negative(&psi_of(&a.psi)?, &a.grid.grid, tol)?;
            Outcome::verdict(v.pass, v)
        }
        CheckCommand::Bernstein(a) => {
            let mut options = BernsteinOptions::for_grid(&a.grid.grid);
            if let Some(h) = a.h {
                options.h = h;
            }
            options.k_max = a.k_max;
            options.tol = a.bernstein_tol;
            let v = check_bernstein(&psi_of(&a.psi)?, &a.grid.grid, &options)?;
            Outcome::verdict(v.pass, json!({ "report": v, "h": options.h, "k_max": options.k_max, "tol": options.tol }))
        }
        CheckCommand::Schoenberg(a) => {
            let entries = schoenberg_bridge(&psi_of(&a.psi)?, &a.lambdas, &a.grid.grid, tol)?;
            let pass = entries.iter().all(|e| e.pass);
            Outcome::verdict(pass, json!({ "pass": pass, "entries": entries }))
        }
    }
}

pub fn quotient(a: &QuotientArgs, tol: &ToleranceConfig) -> Result<Outcome> {
    let spec = kernel_of(&a.kernel)?;
    let setup = ReflectionSetup::new(a.reflection.into(), a.grid.grid.clone())?;
    let q = os_quotient(&reflected_gram(&spec, &setup)?, tol)?;
    let contractions = a
        .shift
        .iter()
        .map(|&s| hat_contraction(&spec, &setup, s, tol))
        .collect::<Result<Vec<_>>>()?;
    let pass = contractions.iter().all(|c| c.contraction);
    Outcome::verdict(
        pass,
        json!({
            "rank": q.rank,
            "eigenvalues": q.eigenvalues,
            "clipped_mass": q.clipped_mass,
            "min_eigenvalue": q.min_eigenvalue,
            "contractions": contractions,
        }),
    )
}

fn process_of(a: &SimulateArgs) -> Result<ProcessSpec> {
    Ok(match a.process {
        ProcessKind::Fbm => ProcessSpec::fractional_brownian(a.hurst.ok_or_else(|| missing("--hurst", "fbm"))?)?,
        ProcessKind::Bm2 => ProcessSpec::BrownianTwoSided,
        ProcessKind::Bm1 => ProcessSpec::BrownianOneSided,
        ProcessKind::Nbm1 => ProcessSpec::NormalizedOneSided,
    })
}

pub fn simulate(a: &SimulateArgs) -> Result<Outcome> {
    let process = process_of(a)?;
    let ensemble = gauss::sample_paths(&process, &a.grid.grid, a.paths, RandomSeed(a.seed))?;
    write_paths_csv(&ensemble, BufWriter::new(File::create(&a.out)?))?;
    let sidecar_path = a.out.with_extension("json");
    let sidecar = rpkit::io::to_canonical_json(&PathsSidecar::new(&ensemble))?;
    std::fs::write(&sidecar_path, sidecar + "\n")?;

    let mut payload = json!({
        "paths_csv": a.out,
        "sidecar": sidecar_path,
        "n_paths": ensemble.n_paths(),
        "grid_size": ensemble.grid().len(),
        "generator": ensemble.generator(),
        "jitter": ensemble.jitter(),
    });
    let mut pass = true;
    if a.validate {
        let emp = gauss::empirical_covariance(&ensemble, false)?;
        if let Some(max) = a.max_deviation {
            pass = emp.max_abs_deviation <= max;
        }
        payload["validation"] = json!({
            "max_abs_deviation": emp.max_abs_deviation,
            "max_deviation": a.max_deviation,
            "n_paths": emp.n_paths,
        });
    }
    Outcome::verdict(pass, payload)
}

pub fn lk(cmd: &LkCommand) -> Result<Outcome> {
    match cmd {
        LkCommand::Eval(a) => {
            let triple = parse_triple(&a.triple)?;
            let values: Vec<(f64, f64)> = a.grid.grid.iter().map(|t| (t, lk_eval(&triple, t))).collect();
            let mut table = vec![vec!["t".to_string(), "psi".to_string()]];
            table.extend(
                values
                    .iter()
                    .map(|&(t, p)| vec![rpkit::io::format_g17(t), rpkit::io::format_g17(p)]),
            );
            let values: Vec<Value> = values.iter().map(|&(t, psi)| json!({ "t": t, "psi": psi })).collect();
            Ok(Outcome {
                pass: true,
                payload: json!({ "triple": triple, "values": values }),
                table: Some(table),
            })
        }
        LkCommand::Fit(a) => {
            let samples = read_psi_csv(File::open(&a.samples)?)?;
            let options = LkFitOptions {
                include_a: !a.no_a,
                include_b: !a.no_b,
                ..LkFitOptions::default()
            };
            let fit = lk_fit(&samples, a.lambda_grid.points(), &options)?;
            let pass = a.max_residual.is_none_or(|m| fit.residual <= m);
            Outcome::verdict(pass, fit)
        }
    }
}

pub fn mc(cmd: &McCommand) -> Result<Outcome> {
    match cmd {
        McCommand::Characteristic(a) => {
            let r = gauss::mc_characteristic(&a.v, a.samples, RandomSeed(a.seed))?;
            Outcome::verdict(r.pass, r)
        }
        McCommand::Covariance(a) => {
            let r = gauss::mc_field_covariance(&a.v, &a.w, a.samples, RandomSeed(a.seed))?;
            Outcome::verdict(r.pass, r)
        }
        McCommand::Fock(a) => {
            let r = gauss::mc_fock_kernel(&a.v, &a.w, a.samples, RandomSeed(a.seed))?;
            Outcome::verdict(r.kernel.pass && r.normalized.pass, r)
        }
    }
}

/// Resolved parameters of a command, echoed in the envelope.
pub fn parameters(cmd: &Command) -> Result<Value> {
    let v = match cmd {
        Command::Check(c) => match c {
            CheckCommand::Pd(a) => serde_json::to_value(a),
            CheckCommand::Nd(a) => serde_json::to_value(a),
            CheckCommand::ReflectionPositive(a) => serde_json::to_value(a),
            CheckCommand::ReflectionNegative(a) => serde_json::to_value(a),
            CheckCommand::Bernstein(a) => serde_json::to_value(a),
            CheckCommand::Schoenberg(a) => serde_json::to_value(a),
        },
        Command::Quotient(a) => serde_json::to_value(a),
        Command::Simulate(a) => serde_json::to_value(a),
        Command::Lk(LkCommand::Eval(a)) => serde_json::to_value(a),
        Command::Lk(LkCommand::Fit(a)) => serde_json::to_value(a),
        Command::Mc(McCommand::Characteristic(a)) => serde_json::to_value(a),
        Command::Mc(McCommand::Covariance(a)) | Command::Mc(McCommand::Fock(a)) => serde_json::to_value(a),
    }?;
    Ok(v)
}
