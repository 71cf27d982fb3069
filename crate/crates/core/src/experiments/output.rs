//! CSV and JSON artifacts. Every file opens with a comment line carrying the
//! master seed and artifact version, then a header row; JSON carries the same
//! fields under `master_seed`, `version` and `rows`.

use std::io::Write;
use std::path::Path;

use serde::Serialize;

use super::{EstimateResult, ExperimentError, ThresholdPoint, TrajectoryRun};
use crate::analysis::{to_f64, ExactWinTable};

pub const ARTIFACT_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

impl std::str::FromStr for OutputFormat {
    type Err = ExperimentError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            other => Err(ExperimentError::Usage(format!(
                "unknown format {other:?}; expected csv or json"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub eta: f64,
    #[serde(rename = "R")]
    pub residents: usize,
    #[serde(rename = "M")]
    pub mafia: usize,
    pub trials: u64,
    pub wins: u64,
    pub phat: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

impl SweepRow {
    pub fn new(eta: f64, residents: usize, mafia: usize, est: &EstimateResult) -> Self {
        Self {
            eta,
            residents,
            mafia,
            trials: est.trials,
            wins: est.wins,
            phat: est.phat,
            ci_low: est.ci_low,
            ci_high: est.ci_high,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThresholdRow {
    #[serde(rename = "R")]
    pub residents: usize,
    #[serde(rename = "M_half")]
    pub m_half: usize,
    pub method: String,
}

impl From<&ThresholdPoint> for ThresholdRow {
    fn from(p: &ThresholdPoint) -> Self {
        Self {
            residents: p.residents,
            m_half: p.m_half,
            method: p.method.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrajectoryRow {
    pub run: usize,
    pub t: usize,
    #[serde(rename = "R_t")]
    pub residents: usize,
    #[serde(rename = "M_t")]
    pub mafia: usize,
    #[serde(rename = "X_t")]
    pub x: f64,
}

impl TrajectoryRow {
    pub fn rows(run: &TrajectoryRun, window: Option<usize>) -> impl Iterator<Item = TrajectoryRow> + '_ {
        let points = match window {
            Some(len) => run.tail(len),
            None => &run.points[..],
        };
        points.iter().map(move |p| TrajectoryRow {
            run: run.run,
            t: p.t,
            residents: p.residents,
            mafia: p.mafia,
            x: p.x,
        })
    }
}

/// One DP entry: `w` to 15 significant digits plus the exact fraction.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DpRow {
    #[serde(rename = "R")]
    pub residents: usize,
    #[serde(rename = "M")]
    pub mafia: usize,
    pub w: String,
    pub numerator: String,
    pub denominator: String,
}

/// `w` with 15 significant digits, trailing zeros trimmed.
pub fn format_sig15(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    let digits = 14 - x.abs().log10().floor() as i32;
    let s = format!("{:.*}", digits.max(0) as usize, x);
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

/// All entries of an exact table with `R ≤ r_max`, `M ≤ min(R, m_max)`.
pub fn dp_table_rows(table: &ExactWinTable) -> Vec<DpRow> {
    let mut rows = Vec::new();
    for r in 1..=table.r_max() {
        for m in 0..=r.min(table.m_max()) {
            let w = table.get(r, m).expect("in range");
            rows.push(DpRow {
                residents: r,
                mafia: m,
                w: format_sig15(to_f64(w)),
                numerator: w.numer().to_string(),
                denominator: w.denom().to_string(),
            });
        }
    }
    rows
}

/// Serializes rows as CSV or JSON, tagged with the master seed.
pub fn render<T: Serialize>(rows: &[T], format: OutputFormat, master_seed: u64) -> Result<Vec<u8>, ExperimentError> {
    match format {
        OutputFormat::Csv => {
            let mut buf = format!("# master_seed={master_seed} version={ARTIFACT_VERSION}\n").into_bytes();
            {
                let mut w = csv::Writer::from_writer(&mut buf);
                for row in rows {
                    w.serialize(row).map_err(csv_error)?;
                }
                w.flush()?;
            }
            Ok(buf)
        }
        OutputFormat::Json => render_json(&serde_json::json!({
            "master_seed": master_seed,
            "version": ARTIFACT_VERSION,
            "rows": rows,
        })),
    }
}

pub fn render_json<T: Serialize>(value: &T) -> Result<Vec<u8>, ExperimentError> {
    let mut buf = serde_json::to_vec_pretty(value).map_err(|e| ExperimentError::Io(e.into()))?;
    buf.push(b'\n');
    Ok(buf)
}

fn csv_error(e: csv::Error) -> ExperimentError {
    ExperimentError::Io(std::io::Error::other(e))
}

/// Writes through a temporary file in the target directory, then renames.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), ExperimentError> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| ExperimentError::Io(e.error))?;
    Ok(())
}
