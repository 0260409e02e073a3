//! Random coalitions with a flat tax, repetition with discounting, and
//! deterministic provision beating lotteries.

use agenda_mech::model::{Economy, ReservationProfile, Technology, TypeDistribution};
use agenda_mech::regimes::{solve, solve_stochastic_coalition, SolveOptions};
use agenda_mech::verify::{certify, dynamic_check, random_lotteries, stochastic_dominance_check};

fn main() -> agenda_mech::Result<()> {
    let unif = TypeDistribution::uniform(0.0, 1.0)?;
    let econ = Economy::new(0.5, vec![0.2, 0.8, 0.5, 0.6], unif, Technology::log(), ReservationProfile::linear())
        .with_quota(3)
        .with_outside_g(0.4);

    for seed in 0..3 {
        let s = solve_stochastic_coalition(&econ, seed, 0.05)?;
        println!("seed {seed}: coalition {:?}, g* = {:.6}, oracle {}", s.coalition, s.g_star, certify(&econ, &s, 41)?.passed());
    }

    let sol = solve(&econ, SolveOptions::default())?;
    let d = dynamic_check(&econ, &sol, 5, 0.9, 41)?;
    println!("T = 5, δ = 0.9: β = {:.4}, total payoff {:.6}, worst gain {:.1e}, passed {}", d.beta, d.total_payoff, d.worst_dynamic_gain, d.passed);

    let lotteries = random_lotteries(7, 200, 5, 3.0);
    let dom = stochastic_dominance_check(&econ, &sol, &lotteries)?;
    let worst = dom.rows.iter().map(|r| r.gap).fold(f64::INFINITY, f64::min);
    println!("{} lotteries, all dominated {}, smallest gap {worst:.3e}", dom.rows.len(), dom.all_dominated);
    Ok(())
}
