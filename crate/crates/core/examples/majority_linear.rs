//! Linear economy under a majority quota: the agenda-setter buys the
//! cheapest coalition, and the chosen coalition can change with the status quo.

use agenda_mech::model::{Economy, ReservationProfile, Technology, TypeDistribution};
use agenda_mech::regimes::{solve, threshold_table, SolveOptions};
use agenda_mech::verify::certify;

fn main() -> agenda_mech::Result<()> {
    let unif = TypeDistribution::uniform(0.0, 1.0)?;
    let econ = Economy::new(0.5, vec![0.2, 0.8, 0.5, 0.6], unif, Technology::log(), ReservationProfile::linear())
        .with_quota(3);
    let table = threshold_table(&econ)?;
    println!("all understate: g_l = {:.6}; all overstate: g_h = {:.6}", table.g_l, table.g_h);
    for g0 in [0.0, 0.4, 1.0, 2.0] {
        let e = econ.at_outside_g(g0);
        let sol = solve(&e, SolveOptions::default())?;
        let report = certify(&e, &sol, 41)?;
        println!(
            "g0 = {g0:.2}: g* = {:.6}, coalition {:?}, excluded {:?}, oracle {}",
            sol.g_star,
            sol.coalition,
            sol.excluded,
            if report.passed() { "pass" } else { "FAIL" }
        );
    }
    Ok(())
}
