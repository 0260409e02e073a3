//! Provision as a function of the status quo, written as CSV to stdout,
//! with the step shape summarised on stderr.

use agenda_mech::model::{Economy, ReservationProfile, Technology, TypeDistribution};
use agenda_mech::numerics::linspace;
use agenda_mech::mechanism::BunchingCap;
use agenda_mech::regimes::{step_segments, sweep_outside_option, SolveOptions};
use agenda_mech::report::{write_sweep_csv, SweepRow};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let unif = TypeDistribution::uniform(0.0, 1.0)?;
    let econ = Economy::new(0.5, vec![0.2, 0.8], unif, Technology::log(), ReservationProfile::linear()).with_quota(2);
    let opts = SolveOptions { cap: BunchingCap::None };
    let grid = linspace(0.0, 2.0, 81);
    let sols = sweep_outside_option(&econ, &grid, opts)?;
    let rows: Vec<SweepRow> = sols.iter().map(|(g0, s)| SweepRow::new(*g0, s, None)).collect();
    write_sweep_csv(std::io::stdout().lock(), &rows)?;
    let pairs: Vec<(f64, f64)> = rows.iter().map(|r| (r.g0, r.g_star)).collect();
    let shape = step_segments(&econ, opts, &pairs)?;
    for s in &shape.segments {
        eprintln!("{:?} on [{:.4}, {:.4}]", s.kind, s.from, s.to);
    }
    for j in &shape.jumps {
        eprintln!("jump at g0 = {:.4}: {:.4} -> {:.4}", j.at, j.from, j.to);
    }
    Ok(())
}
