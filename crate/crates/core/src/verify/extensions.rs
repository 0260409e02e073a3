use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{MechError, Result};
use crate::model::Economy;
use crate::regimes::{build_mechanism, MechanismSolution};
use crate::solver_core::{sigma, Shadow};

use super::oracle::{check_dsic, ORACLE_TOL};

/// Finite lottery over provision levels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Lottery {
    pub support: Vec<f64>,
    pub probs: Vec<f64>,
}

impl Lottery {
    fn check(&self) -> Result<()> {
        let total: f64 = self.probs.iter().sum();
        let ok = !self.support.is_empty()
            && self.support.len() == self.probs.len()
            && self.support.iter().all(|&g| g >= 0.0 && g.is_finite())
            && self.probs.iter().all(|&p| p >= 0.0)
            && (total - 1.0).abs() < 1e-12;
        if !ok {
            return Err(MechError::Precondition("lottery needs matching nonnegative levels and probabilities summing to 1".into()));
        }
        Ok(())
    }

    fn expect(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.support.iter().zip(&self.probs).map(|(&g, &p)| p * f(g)).sum()
    }
}

/// `count` lotteries with 2 to `max_points` levels in `[0, g_max]`.
pub fn random_lotteries(seed: u64, count: usize, max_points: usize, g_max: f64) -> Vec<Lottery> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let k = rng.random_range(2..=max_points.max(2));
            let support: Vec<f64> = (0..k).map(|_| rng.random_range(0.0..=g_max)).collect();
            let raw: Vec<f64> = (0..k).map(|_| rng.random_range(0.05..1.0)).collect();
            let s: f64 = raw.iter().sum();
            Lottery { support, probs: raw.iter().map(|w| w / s).collect() }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DominanceRow {
    /// Certain level with `φ(g) = E[φ(g̃)]`.
    pub g_certain: f64,
    pub sigma_certain: f64,
    pub sigma_lottery: f64,
    /// `sigma_certain − sigma_lottery`, nonnegative by concavity of φ.
    pub gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DominanceReport {
    pub rows: Vec<DominanceRow>,
    pub all_dominated: bool,
}

/// Compares each lottery with the certain level delivering the same expected
/// benefit, using the virtual surplus of `sol`'s shadow distributions. Every
/// agent's utility depends on provision only through `φ`, so both options
/// give the same incentives and the certain one costs less.
pub fn stochastic_dominance_check(econ: &Economy, sol: &MechanismSolution, lotteries: &[Lottery]) -> Result<DominanceReport> {
    let shadow = Shadow { gammas: sol.gamma.clone() };
    let eval = if sol.scope.is_some() {
        let members: Vec<usize> = sol.coalition.iter().filter(|&&id| id > 0).map(|id| id - 1).collect();
        let mut sub = econ.clone();
        sub.types = members.iter().map(|&i| econ.types[i]).collect();
        sub.dists = members.iter().map(|&i| econ.dists[i].clone()).collect();
        sub
    } else {
        econ.clone()
    };
    let mut rows = Vec::with_capacity(lotteries.len());
    for lot in lotteries {
        lot.check()?;
        let degenerate = lot.support.iter().all(|&g| g == lot.support[0]);
        let g_certain = if degenerate {
            lot.support[0]
        } else {
            econ.tech.phi_inverse(lot.expect(|g| econ.phi(g)))?
        };
        let sigma_certain = sigma(&eval, &shadow, g_certain);
        let sigma_lottery = lot.expect(|g| sigma(&eval, &shadow, g));
        rows.push(DominanceRow { g_certain, sigma_certain, sigma_lottery, gap: sigma_certain - sigma_lottery });
    }
    let all_dominated = rows.iter().all(|r| r.gap >= -1e-12);
    Ok(DominanceReport { rows, all_dominated })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DynamicReport {
    pub horizon: u32,
    pub delta: f64,
    /// `(1 − δ^T)/(1 − δ)`.
    pub beta: f64,
    pub static_payoff: f64,
    /// Discounted sum over periods, accumulated period by period.
    pub total_payoff: f64,
    /// `(agent id, static slack, discounted slack)`.
    pub ir_slack: Vec<(usize, f64, f64)>,
    /// Largest discounted gain from any own-report deviation.
    pub worst_dynamic_gain: f64,
    pub passed: bool,
}

/// Repeats the static solution `horizon` times with discount `delta` and
/// checks payoff scaling, dynamic participation and dynamic IC.
pub fn dynamic_check(econ: &Economy, sol: &MechanismSolution, horizon: u32, delta: f64, grid_size: usize) -> Result<DynamicReport> {
    if horizon == 0 || !(0.0..1.0).contains(&delta) {
        return Err(MechError::Precondition(format!("need T ≥ 1 and δ in [0, 1), got T = {horizon}, δ = {delta}")));
    }
    let beta = (1.0 - delta.powi(horizon as i32)) / (1.0 - delta);
    let weights: Vec<f64> = (0..horizon).map(|t| delta.powi(t as i32)).collect();
    let discounted = |x: f64| weights.iter().map(|w| w * x).sum::<f64>();

    let static_payoff = sol.payoff;
    let total_payoff = discounted(static_payoff);
    let ir_slack: Vec<(usize, f64, f64)> = (1..=econ.r()).map(|id| {
        let s = sol.slack(econ, id);
        (id, s, discounted(s))
    }).collect();
    let mech = build_mechanism(econ, sol)?;
    let dsic = check_dsic(mech.as_ref(), grid_size);
    let worst_dynamic_gain = dsic.worst_deviation.map_or(0.0, |d| discounted(d.gain.max(0.0)));

    let members_ok = ir_slack
        .iter()
        .filter(|(id, _, _)| sol.coalition.contains(id))
        .all(|&(_, _, d)| d >= -ORACLE_TOL * beta);
    let passed = (total_payoff - beta * static_payoff).abs() <= 1e-9
        && members_ok
        && worst_dynamic_gain <= ORACLE_TOL * beta
        && dsic.monotone_ok;
    Ok(DynamicReport { horizon, delta, beta, static_payoff, total_payoff, ir_slack, worst_dynamic_gain, passed })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ReservationProfile, Technology, TypeDistribution};
    use crate::regimes::solve_unanimity_linear;
    use approx::assert_abs_diff_eq;

    fn setup() -> (Economy, MechanismSolution) {
        let e = Economy::new(0.5, vec![0.8], TypeDistribution::uniform(0.0, 1.0).unwrap(), Technology::log(), ReservationProfile::linear());
        let s = solve_unanimity_linear(&e).unwrap();
        (e, s)
    }

    #[test]
    fn degenerate_lottery_is_an_exact_tie() {
        let (e, s) = setup();
        let r = stochastic_dominance_check(&e, &s, &[Lottery { support: vec![0.3, 0.3], probs: vec![0.5, 0.5] }]).unwrap();
        assert_eq!(r.rows[0].gap, 0.0);
    }

    #[test]
    fn two_point_lottery_certainty_equivalent() {
        let (e, s) = setup();
        let r = stochastic_dominance_check(&e, &s, &[Lottery { support: vec![0.0, 1.0], probs: vec![0.5, 0.5] }]).unwrap();
        assert_abs_diff_eq!(r.rows[0].g_certain, 2f64.sqrt() - 1.0, epsilon = 1e-14);
        assert!(r.rows[0].gap > 0.0);
    }

    #[test]
    fn wider_spread_widens_the_gap() {
        let (e, s) = setup();
        let lots: Vec<Lottery> = [0.1, 0.3, 0.5].iter().map(|&w| Lottery { support: vec![0.5 - w, 0.5 + w], probs: vec![0.5, 0.5] }).collect();
        let r = stochastic_dominance_check(&e, &s, &lots).unwrap();
        assert!(r.rows.windows(2).all(|w| w[1].gap >= w[0].gap));
    }

    #[test]
    fn geometric_scaling() {
        let (e, s) = setup();
        let r = dynamic_check(&e, &s, 3, 0.9, 21).unwrap();
        assert_abs_diff_eq!(r.beta, 2.71, epsilon = 1e-12);
        assert!(r.passed);
        for (_, st, dy) in &r.ir_slack {
            assert_abs_diff_eq!(*dy, 2.71 * st, epsilon = 1e-12);
        }
        let one = dynamic_check(&e, &s, 1, 0.0, 21).unwrap();
        assert_eq!(one.beta, 1.0);
        assert_eq!(one.total_payoff, s.payoff);
    }

    #[test]
    fn bad_lottery_is_rejected() {
        let (e, s) = setup();
        let bad = Lottery { support: vec![0.1], probs: vec![0.7] };
        assert!(stochastic_dominance_check(&e, &s, &[bad]).is_err());
    }
}
