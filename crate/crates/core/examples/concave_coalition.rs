//! Concave reservation utility: intermediate status quo, V-shaped rents
//! with an interior zero.

use agenda_mech::model::{Economy, ReservationProfile, Technology, TypeDistribution};
use agenda_mech::regimes::{solve, SolveOptions};
use agenda_mech::transfers::rent_profile;

fn main() -> agenda_mech::Result<()> {
    let unif = TypeDistribution::uniform(0.0, 1.0)?;
    let econ = Economy::new(0.5, vec![0.8, 0.3, 0.55], unif, Technology::log(), ReservationProfile::quadratic(-0.8)?)
        .with_outside_g(1.5);
    let sol = solve(&econ, SolveOptions::default())?;
    println!("g* = {:.6} ({}), coalition {:?}", sol.g_star, sol.regime.as_str(), sol.coalition);
    for id in 1..=econ.r() {
        let p = rent_profile(&econ, &sol, id, 201)?;
        println!(
            "agent {id}: anchor {:?}, rent minimised at θ = {:.3}, V-shaped {}, quadrature gap {:.1e}",
            sol.anchors[id - 1],
            p.argmin(),
            p.is_v_shaped(1e-9),
            p.quadrature_gap()
        );
    }
    Ok(())
}
