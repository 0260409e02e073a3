//! One agent, linear reservation utility, unanimity. Provision clamps the
//! status quo into `[g_l, g_h]`.

use agenda_mech::model::{Economy, ReservationProfile, Technology, TypeDistribution};
use agenda_mech::regimes::{solve, SolveOptions};
use agenda_mech::verify::certify;

fn main() -> agenda_mech::Result<()> {
    let unif = TypeDistribution::uniform(0.0, 1.0)?;
    let base = Economy::new(0.5, vec![0.8], unif, Technology::log(), ReservationProfile::linear());
    println!("{:>6} {:>10} {:>22} {:>8}", "g0", "g*", "regime", "oracle");
    for g0 in [0.0, 0.05, 0.3, 0.8, 1.1, 1.5] {
        let econ = base.at_outside_g(g0);
        let sol = solve(&econ, SolveOptions::default())?;
        let ok = certify(&econ, &sol, 41)?.passed();
        println!("{g0:>6.2} {:>10.6} {:>22} {:>8}", sol.g_star, sol.regime.as_str(), ok);
    }
    let sol = solve(&base, SolveOptions::default())?;
    println!("g_l = {:.6}, g_h = {:.6}", sol.thresholds.g_l, sol.thresholds.g_h);
    Ok(())
}
