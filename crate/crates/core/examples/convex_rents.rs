//! Convex reservation utility: inverted-V rents anchored at both ends of
//! the type support.

use agenda_mech::model::{Economy, ReservationProfile, Technology, TypeDistribution};
use agenda_mech::regimes::{solve, SolveOptions};
use agenda_mech::transfers::rent_profile;
use agenda_mech::verify::certify;

fn main() -> agenda_mech::Result<()> {
    let unif = TypeDistribution::uniform(0.0, 1.0)?;
    let g0 = 0.25f64.exp() - 1.0;
    for types in [vec![0.5], vec![0.5, 0.5], vec![0.3, 0.7]] {
        let econ = Economy::new(3.0, types.clone(), unif.clone(), Technology::log(), ReservationProfile::quadratic(8.0)?)
            .with_outside_g(g0);
        let sol = solve(&econ, SolveOptions::default())?;
        let p = rent_profile(&econ, &sol, 1, 201)?;
        let (lo, hi) = (p.rent[0], *p.rent.last().unwrap());
        println!(
            "types {types:?}: g* = {:.6}, rent peak at θ = {:.3}, endpoint rents ({lo:.2e}, {hi:.2e}), oracle {}",
            sol.g_star,
            p.argmax(),
            certify(&econ, &sol, 41)?.passed()
        );
    }
    Ok(())
}
