//! File formats: canonical JSON, tabulated kernel and psi CSV input, and
//! sample path CSV output with its JSON sidecar.

use std::io::{Read, Write};

use nalgebra::DMatrix;
use serde::Serialize;
use serde_json::ser::Formatter;

use crate::error::{Error, Result};
use crate::gauss::process::ProcessSpec;
use crate::gauss::rng::RandomSeed;
use crate::gauss::sampling::PathEnsemble;
use crate::grid::Grid;
use crate::kernel::{KernelSpec, TabulatedKernel};

/// C `%.17g`: 17 significant digits, trailing zeros removed, exponent form
/// outside `1e-4 <= |x| < 1e17`. Non-finite values print as `nan`, `inf`,
/// `-inf`.
pub fn format_g17(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf" } else { "-inf" }.into();
    }
    if x == 0.0 {
        return if x.is_sign_negative() { "-0" } else { "0" }.into();
    }
    let sci = format!("{x:.16e}");
    let (mantissa, exp) = sci.split_once('e').unwrap();
    let exp: i32 = exp.parse().unwrap();
    if (-4..17).contains(&exp) {
        let fixed = format!("{x:.prec$}", prec = (16 - exp) as usize);
        strip_zeros(&fixed).to_string()
    } else {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", strip_zeros(mantissa), exp.abs())
    }
}

fn strip_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

struct CanonicalFormatter;

impl Formatter for CanonicalFormatter {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> std::io::Result<()> {
        writer.write_all(format_g17(value).as_bytes())
    }

    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> std::io::Result<()> {
        self.write_f64(writer, value as f64)
    }
}

/// Compact JSON with object keys sorted and floats in `%.17g`; NaN and
/// infinities become `null`.
pub fn to_canonical_json<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    let value = serde_json::to_value(value)?;
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, CanonicalFormatter);
    value.serialize(&mut ser)?;
    Ok(String::from_utf8(out).expect("serde_json emits UTF-8"))
}

fn parse_cell(cell: &str, what: &str) -> Result<f64> {
    cell.trim()
        .parse::<f64>()
        .map_err(|_| Error::Parse(format!("{what}: cannot parse {cell:?} as a number")))
}

/// Kernel table: the first row holds the grid (its first cell is ignored),
/// every further row starts with its grid point followed by the kernel
/// values on that row.
pub fn read_kernel_csv<R: Read>(reader: R) -> Result<TabulatedKernel> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(false).from_reader(reader);
    let mut records = rdr.records();
    let header = records
        .next()
        .ok_or_else(|| Error::Parse("kernel CSV is empty".into()))??;
    let points = header
        .iter()
        .skip(1)
        .map(|c| parse_cell(c, "kernel CSV header"))
        .collect::<Result<Vec<_>>>()?;
    let grid = Grid::new(points)?;
    let n = grid.len();
    let mut data = Vec::with_capacity(n * n);
    let mut rows = 0;
    for (i, record) in records.enumerate() {
        let record = record?;
        if i >= n {
            return Err(Error::Parse(format!("kernel CSV has more than {n} data rows")));
        }
        if record.len() != n + 1 {
            return Err(Error::Parse(format!(
                "kernel CSV row {} has {} cells, expected {}",
                i + 2,
                record.len(),
                n + 1
            )));
        }
        let label = parse_cell(&record[0], "kernel CSV row label")?;
        let expected = grid.points()[i];
        if (label - expected).abs() > 1e-12 * expected.abs().max(1.0) {
            return Err(Error::Parse(format!(
                "kernel CSV row {} is labelled {label}, header has {expected}",
                i + 2
            )));
        }
        for cell in record.iter().skip(1) {
            data.push(parse_cell(cell, "kernel CSV value")?);
        }
        rows += 1;
    }
    if rows != n {
        return Err(Error::Parse(format!("kernel CSV has {rows} data rows, expected {n}")));
    }
    TabulatedKernel::new(grid, DMatrix::from_row_slice(n, n, &data))
}

/// Two columns `t, psi`. A first row that does not parse is taken as a
/// header and skipped.
pub fn read_psi_csv<R: Read>(reader: R) -> Result<Vec<(f64, f64)>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut out = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        let record = record?;
        if record.len() != 2 {
            return Err(Error::Parse(format!(
                "psi CSV row {} has {} cells, expected 2",
                i + 1,
                record.len()
            )));
        }
        let parsed = (record[0].parse::<f64>(), record[1].parse::<f64>());
        match parsed {
            (Ok(t), Ok(psi)) => out.push((t, psi)),
            _ if i == 0 => continue,
            _ => return Err(Error::Parse(format!("psi CSV row {}: non-numeric cell", i + 1))),
        }
    }
    if out.is_empty() {
        return Err(Error::Parse("psi CSV has no data rows".into()));
    }
    Ok(out)
}

/// Header row of grid points, then one path per row.
pub fn write_paths_csv<W: Write>(ensemble: &PathEnsemble, writer: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(ensemble.grid().iter().map(format_g17))?;
    for path in ensemble.paths() {
        wtr.write_record(path.iter().map(|&x| format_g17(x)))?;
    }
    wtr.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PathsSidecar {
    pub seed: RandomSeed,
    pub process: String,
    pub params: serde_json::Map<String, serde_json::Value>,
    pub n_paths: usize,
}

impl PathsSidecar {
    pub fn new(ensemble: &PathEnsemble) -> Self {
        let mut params = serde_json::Map::new();
        match ensemble.target() {
            ProcessSpec::FractionalBrownian { hurst } => {
                params.insert("hurst".into(), (*hurst).into());
            }
            ProcessSpec::Custom(k) => {
                params.insert("kernel".into(), k.name().into());
                if let KernelSpec::Exponential { lambda } = k {
                    params.insert("lambda".into(), (*lambda).into());
                }
            }
            _ => {}
        }
        PathsSidecar {
            seed: ensemble.seed(),
            process: ensemble.target().name().to_string(),
            params,
            n_paths: ensemble.n_paths(),
        }
    }
}
