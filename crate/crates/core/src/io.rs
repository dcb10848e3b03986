//! CSV and JSON interchange: orbital matrices, spectra, mutual information, tensors,
//! ensemble statistics, superposition descriptions and run manifests.
//!
//! Floats are written with the shortest representation that parses back to the same
//! value.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::experiments::{ExperimentConfig, IndexStats};
use crate::linalg::Matrix;
use crate::rdm::MutualInfoGraph;
use crate::spectra::CutSpectrum;
use crate::tensor::{CorrelatedState, OccupationTensor, PartialIsometry, Term};

pub const STATS_HEADER: &str = "index,mean_log10,std_log10,median_log10,q25_log10,q75_log10,zero_count";
pub const SPECTRUM_HEADER: &str = "cut,index,sigma,prefactor";
pub const TENSOR_HEADER: &str = "bitstring,coefficient";

fn parse_err(line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Parse { line, column, message: message.into() }
}

/// Data rows of a CSV with a header: `(line number, fields)`; blank lines are skipped.
fn data_rows(text: &str, expect_header: &str) -> Result<Vec<(usize, Vec<String>)>> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, header) = lines.next().ok_or_else(|| parse_err(1, 1, "empty input"))?;
    if !expect_header.is_empty() && header.trim() != expect_header {
        return Err(parse_err(1, 1, format!("expected header {expect_header:?}")));
    }
    Ok(lines
        .map(|(i, l)| (i + 1, l.split(',').map(|f| f.trim().to_string()).collect()))
        .collect())
}

fn field<T: std::str::FromStr>(fields: &[String], line: usize, column: usize, what: &str) -> Result<T> {
    let raw = fields
        .get(column - 1)
        .ok_or_else(|| parse_err(line, column, format!("missing {what}")))?;
    raw.parse()
        .map_err(|_| parse_err(line, column, format!("cannot parse {what} from {raw:?}")))
}

fn finite(x: f64, line: usize, column: usize) -> Result<f64> {
    if x.is_finite() {
        Ok(x)
    } else {
        Err(parse_err(line, column, "non-finite value"))
    }
}

/// Dense matrix with a header row of column names.
pub fn parse_matrix_csv(text: &str) -> Result<Matrix> {
    let rows = data_rows(text, "")?;
    let width = text
        .lines()
        .find(|l| !l.trim().is_empty())
        .map(|h| h.split(',').count())
        .unwrap_or(0);
    if rows.is_empty() {
        return Err(parse_err(2, 1, "no data rows"));
    }
    let mut data = Vec::with_capacity(rows.len() * width);
    for (line, fields) in &rows {
        if fields.len() != width {
            return Err(parse_err(
                *line,
                fields.len().min(width) + 1,
                format!("expected {width} fields, found {}", fields.len()),
            ));
        }
        for c in 1..=width {
            data.push(finite(field(fields, *line, c, "number")?, *line, c)?);
        }
    }
    Ok(Matrix::from_row_slice(rows.len(), width, &data))
}

pub fn write_matrix_csv(m: &Matrix, prefix: &str) -> String {
    let mut s = (0..m.ncols()).map(|c| format!("{prefix}{c}")).collect::<Vec<_>>().join(",");
    s.push('\n');
    for r in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols()).map(|c| m[(r, c)].to_string()).collect();
        s.push_str(&row.join(","));
        s.push('\n');
    }
    s
}

pub fn parse_isometry_csv(text: &str) -> Result<PartialIsometry> {
    PartialIsometry::new(parse_matrix_csv(text)?)
}

pub fn write_isometry_csv(u: &PartialIsometry) -> String {
    write_matrix_csv(u.matrix(), "site")
}

pub fn read_isometry(path: &Path) -> Result<PartialIsometry> {
    parse_isometry_csv(&std::fs::read_to_string(path)?)
}

/// Rows `(cut, index, sigma, prefactor)` with 1-based indices; the prefactor column is
/// empty when unknown.
pub fn write_spectra_csv(spectra: &[CutSpectrum]) -> String {
    let mut s = format!("{SPECTRUM_HEADER}\n");
    for sp in spectra {
        let p = sp.prefactor.map(|p| p.to_string()).unwrap_or_default();
        for (j, v) in sp.values.iter().enumerate() {
            let _ = writeln!(s, "{},{},{},{}", sp.cut, j + 1, v, p);
        }
    }
    s
}

/// One parsed spectrum row.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectrumRow {
    pub cut: usize,
    pub index: usize,
    pub sigma: f64,
    pub prefactor: Option<f64>,
}

pub fn parse_spectra_csv(text: &str) -> Result<Vec<SpectrumRow>> {
    data_rows(text, SPECTRUM_HEADER)?
        .into_iter()
        .map(|(line, f)| {
            if f.len() != 4 {
                return Err(parse_err(line, 1, format!("expected 4 fields, found {}", f.len())));
            }
            Ok(SpectrumRow {
                cut: field(&f, line, 1, "cut")?,
                index: field(&f, line, 2, "index")?,
                sigma: finite(field(&f, line, 3, "sigma")?, line, 3)?,
                prefactor: if f[3].is_empty() {
                    None
                } else {
                    Some(finite(field(&f, line, 4, "prefactor")?, line, 4)?)
                },
            })
        })
        .collect()
}

pub fn write_mutual_information_csv(im: &MutualInfoGraph) -> String {
    write_matrix_csv(im.matrix(), "site")
}

pub fn parse_mutual_information_csv(text: &str) -> Result<MutualInfoGraph> {
    MutualInfoGraph::new(parse_matrix_csv(text)?)
}

/// Nonzero coefficients as `(bitstring, coefficient)`, first site leftmost.
pub fn write_tensor_csv(t: &OccupationTensor) -> String {
    let l = t.modes();
    let mut s = format!("{TENSOR_HEADER}\n");
    for (mask, c) in t.coefficients().iter().enumerate() {
        if *c != 0.0 {
            let _ = writeln!(s, "{mask:0l$b},{c}");
        }
    }
    s
}

pub fn parse_tensor_csv(text: &str, modes: usize) -> Result<OccupationTensor> {
    let mut coeffs = vec![0.0; 1usize << modes];
    for (line, f) in data_rows(text, TENSOR_HEADER)? {
        if f.len() != 2 {
            return Err(parse_err(line, 1, format!("expected 2 fields, found {}", f.len())));
        }
        if f[0].len() != modes || !f[0].chars().all(|c| c == '0' || c == '1') {
            return Err(parse_err(line, 1, format!("{:?} is not a {modes}-site bitstring", f[0])));
        }
        let mask = usize::from_str_radix(&f[0], 2).expect("validated bitstring");
        coeffs[mask] = finite(field(&f, line, 2, "coefficient")?, line, 2)?;
    }
    OccupationTensor::from_coefficients(coeffs)
}

pub fn write_stats_csv(rows: &[IndexStats]) -> String {
    let mut s = format!("{STATS_HEADER}\n");
    for r in rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{}",
            r.index, r.mean_log10, r.std_log10, r.median_log10, r.q25_log10, r.q75_log10, r.zero_count
        );
    }
    s
}

pub fn parse_stats_csv(text: &str) -> Result<Vec<IndexStats>> {
    data_rows(text, STATS_HEADER)?
        .into_iter()
        .map(|(line, f)| {
            if f.len() != 7 {
                return Err(parse_err(line, 1, format!("expected 7 fields, found {}", f.len())));
            }
            Ok(IndexStats {
                index: field(&f, line, 1, "index")?,
                mean_log10: field(&f, line, 2, "mean")?,
                std_log10: field(&f, line, 3, "std")?,
                median_log10: field(&f, line, 4, "median")?,
                q25_log10: field(&f, line, 5, "quantile")?,
                q75_log10: field(&f, line, 6, "quantile")?,
                zero_count: field(&f, line, 7, "zero count")?,
            })
        })
        .collect()
}

/// JSON description of a superposition: orbital rows and real-amplitude terms.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateSpec {
    pub orbitals: Vec<Vec<f64>>,
    pub terms: Vec<Term>,
}

pub fn parse_state_json(text: &str) -> Result<CorrelatedState> {
    let v: Value = serde_json::from_str(text)?;
    if let Some(terms) = v.get("terms").and_then(Value::as_array) {
        for (i, t) in terms.iter().enumerate() {
            match t.get("amplitude") {
                Some(Value::Number(_)) => {}
                Some(Value::Array(_)) | Some(Value::Object(_)) => {
                    return Err(Error::Validation(format!(
                        "term {i}: complex amplitudes are not supported"
                    )))
                }
                _ => return Err(Error::Validation(format!("term {i}: amplitude must be a real number"))),
            }
        }
    }
    let spec: StateSpec = serde_json::from_value(v)?;
    CorrelatedState::new(PartialIsometry::from_rows(&spec.orbitals)?, spec.terms)
}

pub fn write_state_json(state: &CorrelatedState) -> Result<String> {
    let m = state.orbitals().matrix();
    let spec = StateSpec {
        orbitals: (0..m.nrows()).map(|r| m.row(r).iter().copied().collect()).collect(),
        terms: state.terms().to_vec(),
    };
    Ok(serde_json::to_string_pretty(&spec)?)
}

/// Output file and its number of data rows.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ManifestFile {
    pub path: String,
    pub rows: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MethodTiming {
    pub method: String,
    pub seconds: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub version: String,
    pub config: ExperimentConfig,
    pub seed: u64,
    pub trial_seeds: Vec<u64>,
    pub timings: Vec<MethodTiming>,
    pub fallbacks: usize,
    pub warnings: Vec<String>,
    pub files: Vec<ManifestFile>,
}

impl RunManifest {
    /// Checks that every listed file exists under `dir` with the declared row count.
    pub fn verify(&self, dir: &Path) -> Result<()> {
        for f in &self.files {
            let text = std::fs::read_to_string(dir.join(&f.path))?;
            let rows = text.lines().filter(|l| !l.trim().is_empty()).count().saturating_sub(1);
            if rows != f.rows {
                return Err(Error::Consistency(format!(
                    "{} has {rows} data rows, manifest says {}",
                    f.path, f.rows
                )));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::random_partial_isometry;

    #[test]
    fn matrix_round_trip_is_exact() {
        let u = random_partial_isometry(3, 7, 2).unwrap();
        let back = parse_isometry_csv(&write_isometry_csv(&u)).unwrap();
        assert_eq!(back.matrix(), u.matrix());
    }

    #[test]
    fn parse_errors_carry_position() {
        let err = parse_matrix_csv("a,b\n1,2\n3,x\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, column: 2, .. }), "{err}");
        let err = parse_matrix_csv("a,b\n1,2\n3\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }));
        assert!(parse_matrix_csv("").is_err());
        assert!(parse_matrix_csv("a,b\n").is_err());
        assert!(parse_matrix_csv("a\nNaN\n").is_err());
    }

    #[test]
    fn spectra_round_trip() {
        let u = random_partial_isometry(2, 5, 2).unwrap();
        let t = crate::tensor::slater_coefficients(&u).unwrap();
        let sp = crate::spectra::cut_spectrum_sectors(&t, 2).unwrap().with_prefactor(0.125);
        let rows = parse_spectra_csv(&write_spectra_csv(&[sp.clone()])).unwrap();
        assert_eq!(rows.len(), 4);
        for (r, v) in rows.iter().zip(&sp.values) {
            assert_eq!(r.sigma, *v);
            assert_eq!(r.prefactor, Some(0.125));
        }
    }

    #[test]
    fn tensor_round_trip() {
        let u = random_partial_isometry(2, 5, 6).unwrap();
        let t = crate::tensor::slater_coefficients(&u).unwrap();
        let text = write_tensor_csv(&t);
        assert!(text.lines().nth(1).unwrap().starts_with("00011,"));
        assert_eq!(parse_tensor_csv(&text, 5).unwrap().coefficients(), t.coefficients());
        assert!(parse_tensor_csv("bitstring,coefficient\n0021,1\n", 4).is_err());
    }

    #[test]
    fn complex_amplitudes_rejected() {
        let json = r#"{"orbitals":[[1,0],[0,1]],"terms":[{"amplitude":[1,0],"orbitals":[0]}]}"#;
        let err = parse_state_json(json).unwrap_err();
        assert!(err.to_string().contains("complex"));
        let ok = r#"{"orbitals":[[1,0],[0,1]],"terms":[{"amplitude":0.6,"orbitals":[0]},{"amplitude":0.8,"orbitals":[1]}]}"#;
        let s = parse_state_json(ok).unwrap();
        assert_eq!(parse_state_json(&write_state_json(&s).unwrap()).unwrap(), s);
    }
}
