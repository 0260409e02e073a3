//! CSV and JSON writers for the command-line verbs.
//!
//! CSV floats use `{:.16e}` so a round trip through text is exact.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::model::ValidationReport;
use crate::regimes::{MechanismSolution, StepShape};
use crate::verify::{OracleReport, VcgReport};

fn sci(x: f64) -> String {
    format!("{x:.16e}")
}

fn ids(v: &[usize]) -> String {
    v.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(";")
}

/// One status-quo point of a sweep. Id lists are `;`-separated global ids.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub g0: f64,
    pub g_star: f64,
    pub regime: String,
    pub coalition: Vec<usize>,
    pub excluded: Vec<usize>,
    pub g_l: f64,
    pub g_h: f64,
    pub payoff: f64,
    /// `ok`, or the failed oracle checks.
    pub status: String,
}

impl SweepRow {
    pub fn new(g0: f64, sol: &MechanismSolution, oracle: Option<&OracleReport>) -> Self {
        let status = match oracle {
            Some(r) if !r.passed() => r.failures().join("; "),
            _ => "ok".into(),
        };
        Self {
            g0,
            g_star: sol.g_star,
            regime: sol.regime.as_str().into(),
            coalition: sol.coalition.clone(),
            excluded: sol.excluded.clone(),
            g_l: sol.thresholds.g_l,
            g_h: sol.thresholds.g_h,
            payoff: sol.payoff,
            status,
        }
    }

    fn record(&self) -> [String; 9] {
        [
            sci(self.g0),
            sci(self.g_star),
            self.regime.clone(),
            ids(&self.coalition),
            ids(&self.excluded),
            sci(self.g_l),
            sci(self.g_h),
            sci(self.payoff),
            self.status.clone(),
        ]
    }
}

pub const SWEEP_HEADER: [&str; 9] = ["g0", "g_star", "regime", "coalition", "excluded", "g_l", "g_h", "payoff", "status"];

pub fn write_sweep_csv<W: Write>(out: W, rows: &[SweepRow]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SWEEP_HEADER)?;
    for r in rows {
        w.write_record(r.record())?;
    }
    w.flush()?;
    Ok(())
}

/// Parses a sweep CSV written by [`write_sweep_csv`].
pub fn read_sweep_csv<R: std::io::Read>(input: R) -> Result<Vec<SweepRow>, String> {
    let mut rd = csv::Reader::from_reader(input);
    let num = |s: &str| s.parse::<f64>().map_err(|e| format!("bad number `{s}`: {e}"));
    let list = |s: &str| -> Result<Vec<usize>, String> {
        s.split(';').filter(|t| !t.is_empty()).map(|t| t.parse().map_err(|e| format!("bad id `{t}`: {e}"))).collect()
    };
    let mut rows = Vec::new();
    for rec in rd.records() {
        let rec = rec.map_err(|e| e.to_string())?;
        if rec.len() != SWEEP_HEADER.len() {
            return Err(format!("expected {} columns, got {}", SWEEP_HEADER.len(), rec.len()));
        }
        rows.push(SweepRow {
            g0: num(&rec[0])?,
            g_star: num(&rec[1])?,
            regime: rec[2].to_string(),
            coalition: list(&rec[3])?,
            excluded: list(&rec[4])?,
            g_l: num(&rec[5])?,
            g_h: num(&rec[6])?,
            payoff: num(&rec[7])?,
            status: rec[8].to_string(),
        });
    }
    Ok(rows)
}

/// Output of `solve`; `verify` reads back the `solution` field.
#[derive(Debug, Clone, Serialize)]
pub struct SolutionRecord<'a> {
    pub validation: &'a ValidationReport,
    pub solution: &'a MechanismSolution,
    pub oracle: &'a OracleReport,
}

#[derive(Debug, Clone, Deserialize)]
pub struct StoredSolution {
    pub solution: MechanismSolution,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepRecord<'a> {
    pub rows: &'a [SweepRow],
    pub shape: &'a StepShape,
}

pub const VCG_HEADER: [&str; 7] = ["epsilon", "g_efficient", "deficit", "delta", "compensation", "gain", "gain_over_eps2"];

pub fn write_vcg_csv<W: Write>(out: W, reports: &[VcgReport]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(VCG_HEADER)?;
    for r in reports {
        let ratio = if r.epsilon > 0.0 { r.gain / (r.epsilon * r.epsilon) } else { f64::NAN };
        w.write_record([r.epsilon, r.g_efficient, r.deficit, r.delta, r.compensation, r.gain, ratio].map(sci))?;
    }
    w.flush()?;
    Ok(())
}
