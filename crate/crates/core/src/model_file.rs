//! JSON model files.
//!
//! ```json
//! {
//!   "economy": {
//!     "theta_a": 0.5, "types": [0.2, 0.8], "quota": 2,
//!     "support": [0.0, 1.0],
//!     "distribution": { "kind": "uniform" },
//!     "technology": { "kind": "log" },
//!     "reservation": { "kind": "linear" },
//!     "g0": 0.0
//!   },
//!   "solver": { "cap": "none", "grid_size": 41, "sweep": "0:2:41" },
//!   "output": { "path": "out.csv", "format": "csv" }
//! }
//! ```
//!
//! `distribution` applies to every agent; `distributions` gives one entry
//! per agent instead. A `tabulated` entry lists density values on an even
//! grid over the support, interpolated linearly and normalized.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::error::MechError;
use crate::mechanism::BunchingCap;
use crate::model::{Curvature, DistSpec, Dynamic, Economy, ReservationProfile, ReservationSpec, TechSpec, Technology, TypeDistribution};
use crate::numerics::linspace;

#[derive(Debug, Error)]
pub enum ModelError {
    /// Unreadable file, malformed JSON, missing field or bad grid spec.
    #[error("{0}")]
    Parse(String),
    /// Well-formed file describing an inadmissible economy.
    #[error(transparent)]
    Invalid(#[from] MechError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DistEntry {
    Uniform,
    TruncatedExponential { rate: f64 },
    TruncatedNormal { mean: f64, sd: f64 },
    Tabulated { density: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReservationEntry {
    #[serde(flatten)]
    pub spec: ReservationSpec,
    /// Declared class; the validator compares it with the profile's shape.
    #[serde(default)]
    pub curvature_tag: Option<Curvature>,
}

fn unit_support() -> (f64, f64) {
    (0.0, 1.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EconomyBlock {
    /// Tax population; defaults to the number of agents.
    #[serde(default)]
    pub n: Option<usize>,
    pub theta_a: f64,
    pub types: Vec<f64>,
    pub quota: usize,
    #[serde(default = "unit_support")]
    pub support: (f64, f64),
    #[serde(default)]
    pub distribution: Option<DistEntry>,
    #[serde(default)]
    pub distributions: Option<Vec<DistEntry>>,
    pub technology: TechSpec,
    pub reservation: ReservationEntry,
    #[serde(default)]
    pub g0: f64,
    #[serde(default)]
    pub dynamic: Option<Dynamic>,
}

fn default_grid() -> usize {
    41
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverBlock {
    #[serde(default)]
    pub cap: BunchingCap,
    /// Oracle grid points per agent.
    #[serde(default = "default_grid")]
    pub grid_size: usize,
    #[serde(default)]
    pub seed: Option<u64>,
    /// Flat tax outside a randomly drawn coalition; enables the draw.
    #[serde(default)]
    pub tau_bar: Option<f64>,
    /// Status-quo grid `start:stop:count`.
    #[serde(default)]
    pub sweep: Option<String>,
    #[serde(default)]
    pub epsilons: Option<Vec<f64>>,
}

impl Default for SolverBlock {
    fn default() -> Self {
        Self { cap: BunchingCap::default(), grid_size: default_grid(), seed: None, tau_bar: None, sweep: None, epsilons: None }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputBlock {
    #[serde(default)]
    pub path: Option<PathBuf>,
    #[serde(default)]
    pub format: Option<Format>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub economy: EconomyBlock,
    #[serde(default)]
    pub solver: SolverBlock,
    #[serde(default)]
    pub output: OutputBlock,
}

impl ModelFile {
    pub fn parse(text: &str) -> Result<Self, ModelError> {
        serde_json::from_str(text).map_err(|e| ModelError::Parse(format!("model file: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self, ModelError> {
        let text = std::fs::read_to_string(path).map_err(|e| ModelError::Parse(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Builds the economy; structural problems are `Invalid`, a missing
    /// distribution is a parse error.
    pub fn economy(&self) -> Result<Economy, ModelError> {
        let b = &self.economy;
        let (lo, hi) = b.support;
        let entries: Vec<DistEntry> = match (&b.distribution, &b.distributions) {
            (Some(_), Some(_)) => {
                return Err(ModelError::Parse("economy: give either `distribution` or `distributions`, not both".into()))
            }
            (Some(d), None) => vec![d.clone(); b.types.len()],
            (None, Some(ds)) => ds.clone(),
            (None, None) => return Err(ModelError::Parse("economy: missing field `distribution`".into())),
        };
        if entries.len() != b.types.len() {
            return Err(ModelError::Parse(format!(
                "economy.distributions: {} entries for {} types",
                entries.len(),
                b.types.len()
            )));
        }
        let dists = entries.iter().map(|d| build_dist(d, lo, hi)).collect::<Result<Vec<_>, _>>()?;
        let mut res = ReservationProfile::from_spec(&b.reservation.spec)?;
        if let Some(tag) = b.reservation.curvature_tag {
            res = res.with_curvature(tag);
        }
        let base = match dists.first() {
            Some(d) => d.clone(),
            None => TypeDistribution::uniform(lo, hi)?,
        };
        let mut econ = Economy::new(b.theta_a, b.types.clone(), base, Technology::from_spec(&b.technology)?, res)
            .with_dists(dists)
            .with_quota(b.quota)
            .with_outside_g(b.g0);
        if let Some(n) = b.n {
            econ = econ.with_population(n);
        }
        if let Some(d) = b.dynamic {
            econ = econ.with_dynamic(d.delta, d.horizon);
        }
        econ.check()?;
        Ok(econ)
    }
}

fn build_dist(entry: &DistEntry, lo: f64, hi: f64) -> Result<TypeDistribution, ModelError> {
    let spec = match entry {
        DistEntry::Uniform => DistSpec::Uniform,
        DistEntry::TruncatedExponential { rate } => DistSpec::TruncatedExponential { rate: *rate },
        DistEntry::TruncatedNormal { mean, sd } => DistSpec::TruncatedNormal { mean: *mean, sd: *sd },
        DistEntry::Tabulated { density } => return tabulated(density, lo, hi),
    };
    Ok(TypeDistribution::from_spec(&spec, lo, hi)?)
}

/// Piecewise-linear density through `values` on an even grid; the cdf is
/// integrated exactly per cell.
fn tabulated(values: &[f64], lo: f64, hi: f64) -> Result<TypeDistribution, ModelError> {
    if values.len() < 2 || values.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
        return Err(ModelError::Parse("tabulated density needs at least two finite nonnegative values".into()));
    }
    let cells = values.len() - 1;
    let h = (hi - lo) / cells as f64;
    let mut cum = vec![0.0];
    for w in values.windows(2) {
        cum.push(cum.last().unwrap() + 0.5 * h * (w[0] + w[1]));
    }
    let mass = *cum.last().unwrap();
    if mass <= 0.0 {
        return Err(ModelError::Parse("tabulated density has zero mass".into()));
    }
    let f: Vec<f64> = values.iter().map(|v| v / mass).collect();
    let cdf_nodes: Vec<f64> = cum.iter().map(|c| c / mass).collect();
    let locate = move |x: f64| -> (usize, f64) {
        let s = ((x - lo) / h).clamp(0.0, cells as f64);
        let k = (s.floor() as usize).min(cells - 1);
        (k, (s - k as f64) * h)
    };
    let fp = f.clone();
    let pdf = move |x: f64| {
        let (k, d) = locate(x);
        fp[k] + (fp[k + 1] - fp[k]) * d / h
    };
    let cdf = move |x: f64| {
        let (k, d) = locate(x);
        let slope = (f[k + 1] - f[k]) / h;
        (cdf_nodes[k] + f[k] * d + 0.5 * slope * d * d).clamp(0.0, 1.0)
    };
    Ok(TypeDistribution::custom(lo, hi, cdf, pdf)?)
}

/// Parses `start:stop:count` into an even grid.
pub fn parse_grid(spec: &str) -> Result<Vec<f64>, ModelError> {
    let bad = || ModelError::Parse(format!("grid `{spec}`: expected start:stop:count"));
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 3 {
        return Err(bad());
    }
    let start: f64 = parts[0].trim().parse().map_err(|_| bad())?;
    let stop: f64 = parts[1].trim().parse().map_err(|_| bad())?;
    let count: usize = parts[2].trim().parse().map_err(|_| bad())?;
    if count == 0 || !(start.is_finite() && stop.is_finite()) || stop < start {
        return Err(bad());
    }
    Ok(linspace(start, stop, count))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{validate_economy, validate::CHECK_LOG_CONCAVE};

    const PROP: &str = r#"{
        "economy": {
            "theta_a": 0.5, "types": [0.8], "quota": 2,
            "distribution": {"kind": "uniform"},
            "technology": {"kind": "log"},
            "reservation": {"kind": "linear"}
        }
    }"#;

    #[test]
    fn minimal_file_builds_the_economy() {
        let m = ModelFile::parse(PROP).unwrap();
        let e = m.economy().unwrap();
        assert_eq!(e.agent_count(), 2);
        assert_eq!(e.g0, 0.0);
        assert_eq!(m.solver.grid_size, 41);
    }

    #[test]
    fn missing_quota_names_the_field() {
        let text = PROP.replace(r#""quota": 2,"#, "");
        let err = ModelFile::parse(&text).unwrap_err();
        assert!(matches!(&err, ModelError::Parse(m) if m.contains("quota")), "{err}");
    }

    #[test]
    fn bimodal_table_fails_log_concavity() {
        let text = PROP.replace(r#"{"kind": "uniform"}"#, r#"{"kind": "tabulated", "density": [2.0, 0.2, 2.0]}"#);
        let e = ModelFile::parse(&text).unwrap().economy().unwrap();
        let v = validate_economy(&e);
        assert!(!v.check(CHECK_LOG_CONCAVE).unwrap().passed);
    }

    #[test]
    fn tabulated_flat_density_is_uniform() {
        let d = tabulated(&[1.0, 1.0, 1.0], 0.0, 2.0).unwrap();
        assert!((d.cdf(0.5) - 0.25).abs() < 1e-15);
        assert!((d.pdf(1.7) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn grid_specs() {
        assert_eq!(parse_grid("0:2:3").unwrap(), vec![0.0, 1.0, 2.0]);
        assert_eq!(parse_grid("0.5:0.5:1").unwrap(), vec![0.5]);
        assert!(parse_grid("0:2").is_err());
        assert!(parse_grid("2:0:5").is_err());
    }
}
