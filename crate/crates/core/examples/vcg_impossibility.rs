//! Efficient Groves transfers run a deficit, and a small cut in provision
//! always pays the agenda-setter: gain scales with ε².

use agenda_mech::model::{Economy, ReservationProfile, Technology, TypeDistribution};
use agenda_mech::verify::vcg_demo;

fn main() -> agenda_mech::Result<()> {
    let unif = TypeDistribution::uniform(0.0, 1.0)?;
    let econ = Economy::new(0.5, vec![0.8, 0.7], unif, Technology::log(), ReservationProfile::linear());
    println!("{:>8} {:>12} {:>12} {:>14}", "epsilon", "deficit", "gain", "gain/eps^2");
    for eps in [1e-1, 1e-2, 1e-3, 1e-4] {
        let r = vcg_demo(&econ, eps)?;
        println!("{eps:>8.0e} {:>12.6} {:>12.4e} {:>14.6}", r.deficit, r.gain, r.gain / (eps * eps));
    }
    Ok(())
}
