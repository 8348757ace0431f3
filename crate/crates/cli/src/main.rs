mod args;
mod commands;
mod config;

use std::ffi::OsString;
use std::process::ExitCode;
use std::time::Instant;

use clap::Parser;
use rpkit::error::{Error, Result};
use rpkit::io::to_canonical_json;
use rpkit::tolerance::ToleranceConfig;
use serde::Serialize;
use serde_json::Value;

use args::{Cli, Command, Format, GlobalArgs};
use commands::Outcome;

const EXIT_PASS: u8 = 0;
const EXIT_FAIL: u8 = 1;
const EXIT_USAGE: u8 = 2;

#[derive(Serialize)]
struct VerdictEnvelope<'a> {
    command: &'a str,
    parameters: Value,
    payload: Value,
    pass: bool,
    wall_time: f64,
    version: &'static str,
}

fn tolerance(g: &GlobalArgs) -> Result<ToleranceConfig> {
    let d = ToleranceConfig::default();
    let tol = ToleranceConfig {
        psd_tol: g.psd_tol.unwrap_or(d.psd_tol),
        nd_tol: g.nd_tol.unwrap_or(d.nd_tol),
        rank_tol: g.rank_tol.unwrap_or(d.rank_tol),
        recon_tol: g.recon_tol.unwrap_or(d.recon_tol),
    };
    tol.validate()?;
    Ok(tol)
}

fn dispatch(cmd: &Command, tol: &ToleranceConfig) -> Result<Outcome> {
    match cmd {
        Command::Check(c) => commands::check(c, tol),
        Command::Quotient(a) => commands::quotient(a, tol),
        Command::Simulate(a) => commands::simulate(a),
        Command::Lk(c) => commands::lk(c),
        Command::Mc(c) => commands::mc(c),
    }
}

/// `key,value` rows of a JSON value, nested keys joined with `.`.
fn flatten(prefix: &str, v: &Value, rows: &mut Vec<Vec<String>>) {
    let join = |k: &str| if prefix.is_empty() { k.to_string() } else { format!("{prefix}.{k}") };
    match v {
        Value::Object(m) => m.iter().for_each(|(k, v)| flatten(&join(k), v, rows)),
        Value::Array(a) => a.iter().enumerate().for_each(|(i, v)| flatten(&join(&i.to_string()), v, rows)),
        Value::Number(n) => rows.push(vec![prefix.to_string(), rpkit::io::format_g17(n.as_f64().unwrap_or(f64::NAN))]),
        Value::String(s) => rows.push(vec![prefix.to_string(), s.clone()]),
        Value::Bool(b) => rows.push(vec![prefix.to_string(), b.to_string()]),
        Value::Null => rows.push(vec![prefix.to_string(), String::new()]),
    }
}

fn render_csv(rows: &[Vec<String>]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.write_record(r)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("CSV of UTF-8 fields is UTF-8"))
}

fn run(cli: &Cli) -> Result<bool> {
    if let Some(n) = cli.global.threads {
        if n == 0 {
            return Err(Error::InvalidParameter("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::Numerical(format!("thread pool: {e}")))?;
    }
    let tol = tolerance(&cli.global)?;
    let start = Instant::now();
    let outcome = dispatch(&cli.command, &tol)?;
    let wall_time = start.elapsed().as_secs_f64();

    let mut parameters = commands::parameters(&cli.command)?;
    parameters["tolerance"] = serde_json::to_value(tol)?;
    let text = match cli.global.format {
        Format::Json => {
            let envelope = VerdictEnvelope {
                command: cli.command.name(),
                parameters,
                payload: outcome.payload,
                pass: outcome.pass,
                wall_time,
                version: env!("CARGO_PKG_VERSION"),
            };
            to_canonical_json(&envelope)? + "\n"
        }
        Format::Csv => match &outcome.table {
            Some(rows) => render_csv(rows)?,
            None => {
                let mut rows = vec![vec!["key".to_string(), "value".to_string()]];
                flatten("", &outcome.payload, &mut rows);
                if outcome.payload.get("pass").is_none() {
                    rows.push(vec!["pass".to_string(), outcome.pass.to_string()]);
                }
                render_csv(&rows)?
            }
        },
    };
    match &cli.global.output {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(outcome.pass)
}

fn main() -> ExitCode {
    let argv: Vec<OsString> = std::env::args_os().collect();
    let argv = match config::expand(argv) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("rpkit: error: {e}");
            return ExitCode::from(EXIT_USAGE);
        }
    };
    let cli = Cli::try_parse_from(argv).unwrap_or_else(|e| e.exit());
    match run(&cli) {
        Ok(true) => ExitCode::from(EXIT_PASS),
        Ok(false) => ExitCode::from(EXIT_FAIL),
        Err(e) => {
            eprintln!("rpkit: error: {e}");
            ExitCode::from(if e.is_usage() { EXIT_USAGE } else { EXIT_FAIL })
        }
    }
}
