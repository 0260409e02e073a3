//! Brute-force certification: a solved mechanism passes, a nudged transfer
//! is caught as a profitable misreport.

use agenda_mech::model::{Economy, ReservationProfile, Technology, TypeDistribution};
use agenda_mech::regimes::{solve, SolveOptions};
use agenda_mech::verify::certify;

fn main() -> agenda_mech::Result<()> {
    let unif = TypeDistribution::uniform(0.0, 1.0)?;
    let econ = Economy::new(0.5, vec![0.8, 0.7], unif, Technology::log(), ReservationProfile::linear());
    let sol = solve(&econ, SolveOptions::default())?;
    let clean = certify(&econ, &sol, 41)?;
    println!("solved: passed {}, budget slack {:.1e}", clean.passed(), clean.budget_slack);

    let mut tampered = sol.clone();
    tampered.transfers[1] += 0.01;
    let bad = certify(&econ, &tampered, 41)?;
    println!("tampered: passed {}, worst deviation {:?}", bad.passed(), bad.worst_deviation);
    for f in bad.failures() {
        println!("  {f}");
    }
    Ok(())
}
