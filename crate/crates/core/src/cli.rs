//! Command-line front end. `run` returns the process exit code:
//! 0 success, 1 I/O failure, 2 parse error, 3 validation or solver
//! failure, 4 oracle failure. `MECH_THREADS` caps the worker pool.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use crate::error::MechError;
use crate::model::{validate_economy, Economy, ValidationReport};
use crate::model_file::{parse_grid, Format, ModelError, ModelFile};
use crate::regimes::{solve, solve_stochastic_coalition, step_segments, sweep_outside_option, SolveOptions};
use crate::report::{write_sweep_csv, write_vcg_csv, SolutionRecord, StoredSolution, SweepRecord, SweepRow};
use crate::verify::{certify, vcg_demo, OracleReport};

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_INVALID: i32 = 3;
pub const EXIT_ORACLE: i32 = 4;

/// Perturbation sizes used by `vcg` when neither flag nor file sets them.
pub const DEFAULT_EPSILONS: [f64; 4] = [1e-1, 1e-2, 1e-3, 1e-4];

#[derive(Debug, Parser)]
#[command(name = "agenda-mech", version, about = "Agenda-setter optimal mechanisms for public goods")]
struct Cli {
    #[command(subcommand)]
    verb: Verb,
}

#[derive(Debug, Subcommand)]
enum Verb {
    /// Solve one economy and certify the result.
    Solve(Common),
    /// Solve across a grid of status-quo levels.
    Sweep(Common),
    /// Re-certify a stored solution against its model.
    Verify {
        #[command(flatten)]
        common: Common,
        /// Solution JSON written by `solve`.
        #[arg(long)]
        solution: PathBuf,
    },
    /// Efficient Groves mechanism and the agenda-setter's deviation gain.
    Vcg(Common),
}

#[derive(Debug, Args)]
struct Common {
    /// Model file (JSON).
    #[arg(long)]
    model: PathBuf,
    /// Status-quo grid `start:stop:count`.
    #[arg(long)]
    grid: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Flat tax paid outside a random coalition.
    #[arg(long = "tau-bar")]
    tau_bar: Option<f64>,
    /// Perturbation size; repeat for a ladder.
    #[arg(long)]
    epsilon: Vec<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

/// Failure carrying its exit code.
struct Fail {
    code: i32,
    msg: String,
}

impl Fail {
    fn new(code: i32, msg: impl Into<String>) -> Self {
        Self { code, msg: msg.into() }
    }
}

impl From<ModelError> for Fail {
    fn from(e: ModelError) -> Self {
        match e {
            ModelError::Parse(m) => Fail::new(EXIT_PARSE, m),
            ModelError::Invalid(m) => Fail::new(EXIT_INVALID, m.to_string()),
        }
    }
}

impl From<MechError> for Fail {
    fn from(e: MechError) -> Self {
        Fail::new(EXIT_INVALID, e.to_string())
    }
}

impl From<io::Error> for Fail {
    fn from(e: io::Error) -> Self {
        Fail::new(EXIT_IO, e.to_string())
    }
}

impl From<csv::Error> for Fail {
    fn from(e: csv::Error) -> Self {
        Fail::new(EXIT_IO, e.to_string())
    }
}

impl From<serde_json::Error> for Fail {
    fn from(e: serde_json::Error) -> Self {
        Fail::new(EXIT_IO, e.to_string())
    }
}

/// Parses `args` (program name first) and runs the verb.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_PARSE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let pool = match thread_pool() {
        Ok(p) => p,
        Err(f) => return report(f),
    };
    match pool.install(|| dispatch(cli.verb)) {
        Ok(code) => code,
        Err(f) => report(f),
    }
}

fn report(f: Fail) -> i32 {
    eprintln!("agenda-mech: {}", f.msg);
    f.code
}

fn thread_pool() -> Result<rayon::ThreadPool, Fail> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var("MECH_THREADS") {
        let n: usize = v.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| {
            Fail::new(EXIT_PARSE, format!("MECH_THREADS must be a positive integer, got `{v}`"))
        })?;
        b = b.num_threads(n);
    }
    b.build().map_err(|e| Fail::new(EXIT_IO, e.to_string()))
}

fn dispatch(verb: Verb) -> Result<i32, Fail> {
    match verb {
        Verb::Solve(c) => cmd_solve(&c),
        Verb::Sweep(c) => cmd_sweep(&c),
        Verb::Verify { common, solution } => cmd_verify(&common, &solution),
        Verb::Vcg(c) => cmd_vcg(&c),
    }
}

/// Loads the model, builds the economy and refuses invalid primitives.
fn load(c: &Common) -> Result<(ModelFile, Economy, ValidationReport), Fail> {
    let model = ModelFile::load(&c.model)?;
    let econ = model.economy()?;
    let validation = validate_economy(&econ);
    if !validation.passed() {
        let names: Vec<String> = validation.failures().iter().map(|f| format!("{} ({})", f.name, f.detail)).collect();
        return Err(Fail::new(EXIT_INVALID, format!("model violates: {}", names.join(", "))));
    }
    Ok((model, econ, validation))
}

struct Sink {
    path: Option<PathBuf>,
    format: Format,
}

impl Sink {
    fn new(c: &Common, model: &ModelFile) -> Self {
        let path = c.out.clone().or_else(|| model.output.path.clone());
        let from_ext = path.as_ref().and_then(|p| match p.extension()?.to_str()? {
            "csv" => Some(Format::Csv),
            _ => None,
        });
        let format = c.format.or(model.output.format).or(from_ext).unwrap_or_default();
        Self { path, format }
    }

    fn write(&self, body: impl FnOnce(&mut dyn Write) -> Result<(), Fail>) -> Result<(), Fail> {
        match &self.path {
            Some(p) => {
                let mut w = BufWriter::new(File::create(p).map_err(|e| Fail::new(EXIT_IO, format!("{}: {e}", p.display())))?);
                body(&mut w)?;
                w.flush()?;
            }
            None => {
                let stdout = io::stdout();
                let mut w = stdout.lock();
                body(&mut w)?;
                w.flush()?;
            }
        }
        Ok(())
    }
}

fn json(w: &mut dyn Write, value: &impl serde::Serialize) -> Result<(), Fail> {
    serde_json::to_writer_pretty(&mut *w, value)?;
    writeln!(w)?;
    Ok(())
}

fn oracle_exit(reports: &[&OracleReport]) -> i32 {
    match reports.iter().find(|r| !r.passed()) {
        Some(r) => {
            eprintln!("agenda-mech: oracle failure: {}", r.failures().join("; "));
            EXIT_ORACLE
        }
        None => EXIT_OK,
    }
}

fn cmd_solve(c: &Common) -> Result<i32, Fail> {
    let (model, econ, validation) = load(c)?;
    let s = &model.solver;
    let sol = match c.tau_bar.or(s.tau_bar) {
        Some(tau) => solve_stochastic_coalition(&econ, c.seed.or(s.seed).unwrap_or(0), tau)?,
        None => solve(&econ, SolveOptions { cap: s.cap })?,
    };
    let oracle = certify(&econ, &sol, s.grid_size)?;
    let sink = Sink::new(c, &model);
    sink.write(|w| match sink.format {
        Format::Json => json(w, &SolutionRecord { validation: &validation, solution: &sol, oracle: &oracle }),
        Format::Csv => Ok(write_sweep_csv(w, &[SweepRow::new(econ.g0, &sol, Some(&oracle))])?),
    })?;
    Ok(oracle_exit(&[&oracle]))
}

fn cmd_sweep(c: &Common) -> Result<i32, Fail> {
    let (model, econ, _) = load(c)?;
    let spec = c
        .grid
        .clone()
        .or_else(|| model.solver.sweep.clone())
        .ok_or_else(|| Fail::new(EXIT_PARSE, "sweep needs --grid or solver.sweep"))?;
    let grid = parse_grid(&spec)?;
    let opts = SolveOptions { cap: model.solver.cap };
    let sols = sweep_outside_option(&econ, &grid, opts)?;
    let oracles: Vec<OracleReport> = sols
        .par_iter()
        .map(|(g0, sol)| certify(&econ.at_outside_g(*g0), sol, model.solver.grid_size))
        .collect::<Result<_, _>>()?;
    let rows: Vec<SweepRow> = sols.iter().zip(&oracles).map(|((g0, sol), o)| SweepRow::new(*g0, sol, Some(o))).collect();
    let sink = Sink::new(c, &model);
    sink.write(|w| match sink.format {
        Format::Csv => Ok(write_sweep_csv(w, &rows)?),
        Format::Json => {
            let pairs: Vec<(f64, f64)> = rows.iter().map(|r| (r.g0, r.g_star)).collect();
            let shape = step_segments(&econ, opts, &pairs)?;
            json(w, &SweepRecord { rows: &rows, shape: &shape })
        }
    })?;
    Ok(oracle_exit(&oracles.iter().collect::<Vec<_>>()))
}

/// Re-checks a stored solution: the economy must match, a fresh solve must
/// reproduce it, and the oracle must pass.
fn cmd_verify(c: &Common, solution: &Path) -> Result<i32, Fail> {
    let (model, econ, _) = load(c)?;
    let text = std::fs::read_to_string(solution).map_err(|e| Fail::new(EXIT_PARSE, format!("{}: {e}", solution.display())))?;
    let stored: StoredSolution =
        serde_json::from_str(&text).map_err(|e| Fail::new(EXIT_PARSE, format!("{}: {e}", solution.display())))?;
    let sol = stored.solution;
    if sol.fingerprint != econ.fingerprint() {
        return Err(Fail::new(EXIT_INVALID, "stored solution belongs to a different economy"));
    }
    let fresh = match &sol.scope {
        Some(_) => None,
        None => Some(solve(&econ, SolveOptions { cap: model.solver.cap })?),
    };
    if let Some(f) = fresh {
        let gap = (f.g_star - sol.g_star).abs();
        if gap > 1e-9 || f.coalition != sol.coalition {
            return Err(Fail::new(
                EXIT_INVALID,
                format!("stored solution disagrees with a fresh solve (g* gap {gap:e}, coalition {:?} vs {:?})", sol.coalition, f.coalition),
            ));
        }
    }
    let oracle = certify(&econ, &sol, model.solver.grid_size)?;
    let sink = Sink::new(c, &model);
    sink.write(|w| json(w, &oracle))?;
    Ok(oracle_exit(&[&oracle]))
}

fn cmd_vcg(c: &Common) -> Result<i32, Fail> {
    let (model, econ, _) = load(c)?;
    let eps: Vec<f64> = if !c.epsilon.is_empty() {
        c.epsilon.clone()
    } else {
        model.solver.epsilons.clone().unwrap_or_else(|| DEFAULT_EPSILONS.to_vec())
    };
    let reports = eps.iter().map(|&e| vcg_demo(&econ, e)).collect::<Result<Vec<_>, _>>()?;
    let sink = Sink::new(c, &model);
    sink.write(|w| match sink.format {
        Format::Csv => Ok(write_vcg_csv(w, &reports)?),
        Format::Json => json(w, &reports),
    })?;
    Ok(EXIT_OK)
}
