//! Concave, convex and negatively sloped reservation profiles.
//!
//! Concave profiles pool every agent's virtual value at a common level `c`
//! that tracks the type where the envelope slope changes sign. Convex
//! profiles use one constant shadow distribution that balances rents at the
//! two window endpoints.

use crate::error::{MechError, Result};
use crate::mechanism::{AllocationRule, BunchingCap, DirectMechanism, Side, Window};
use crate::model::{Curvature, Economy};
use crate::numerics::{monotone_root, SOLVER_TOL};
use crate::solver_core::{gamma_star_constant, type_order, GammaRepresentation};

use super::thresholds::threshold_table;
use super::{finish, Draft, MechanismSolution, Regime, Thresholds};

/// Payoff gap under which two exclusion configurations count as tied.
const TIE_TOL: f64 = 1e-12;

/// Shadow configuration of the whole economy before exclusion.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Profile {
    AllLow,
    AllHigh,
    Pooled { level: f64, crossing: f64 },
    Constant { gamma: f64 },
}

fn require_general(econ: &Economy) -> Result<()> {
    econ.check()?;
    if econ.reservation.curvature() == Curvature::Linear {
        return Err(MechError::InvalidEconomy("general solver called with a linear reservation profile".into()));
    }
    Ok(())
}

/// Theorem-style unanimity solution for non-linear profiles.
pub fn solve_unanimity_general(econ: &Economy) -> Result<MechanismSolution> {
    if econ.quota != econ.agent_count() {
        return Err(MechError::InvalidEconomy(format!(
            "unanimity needs quota {} but economy has quota {}",
            econ.agent_count(),
            econ.quota
        )));
    }
    solve_general(econ, BunchingCap::Efficient)
}

/// Majority solution for non-linear profiles, bunching capped at the
/// efficient level.
pub fn solve_majority_general(econ: &Economy) -> Result<MechanismSolution> {
    solve_general(econ, BunchingCap::Efficient)
}

/// Type where `φ(g) = ∂v̄/∂θ` on a concave profile, clamped to the support.
fn crossing(econ: &Economy, g: f64) -> f64 {
    let (lo, hi) = (econ.theta_lo(), econ.theta_hi());
    let target = econ.phi(g);
    // slope φ(g) − v̄' is nondecreasing in θ when v̄ is concave
    monotone_root(|x| target - econ.v_bar_dtheta(x), lo, hi, SOLVER_TOL)
}

fn pooled_level(econ: &Economy) -> Result<Profile> {
    let (lo, hi) = (econ.theta_lo(), econ.theta_hi());
    let c_min = econ.dists.iter().map(|d| d.hl(lo)).fold(f64::INFINITY, f64::min);
    let c_max = econ.dists.iter().map(|d| d.hh(hi)).fold(f64::NEG_INFINITY, f64::max);
    let level_g = |c: f64| -> Result<f64> {
        let w = econ.theta_a
            + econ
                .types
                .iter()
                .zip(&econ.dists)
                .map(|(&t, d)| c.clamp(d.hl(t), d.hh(t)))
                .sum::<f64>();
        econ.tech.xi(w)
    };
    // custom technologies can fail; surface the first error after the search
    let mut err = None;
    let target = |c: f64, err: &mut Option<MechError>| -> f64 {
        let g = match level_g(c) {
            Ok(g) => g,
            Err(e) => {
                err.get_or_insert(e);
                return c_min;
            }
        };
        let slope = |x: f64| econ.phi(g) - econ.v_bar_dtheta(x);
        if slope(lo) >= 0.0 {
            c_min
        } else if slope(hi) <= 0.0 {
            c_max
        } else {
            crossing(econ, g)
        }
    };
    // c − target(c) is nondecreasing: a larger pool raises g and moves the crossing down
    let c = monotone_root(|c| c - target(c, &mut err), c_min, c_max, SOLVER_TOL);
    if let Some(e) = err {
        return Err(e);
    }
    let g = level_g(c)?;
    Ok(if c <= c_min {
        Profile::AllLow
    } else if c >= c_max {
        Profile::AllHigh
    } else {
        Profile::Pooled { level: c, crossing: crossing(econ, g) }
    })
}

fn constant_profile(econ: &Economy, window: (f64, f64)) -> Result<Profile> {
    let gamma = gamma_star_constant(econ, window)?;
    Ok(if gamma >= 1.0 {
        Profile::AllLow
    } else if gamma <= 0.0 {
        Profile::AllHigh
    } else {
        Profile::Constant { gamma }
    })
}

fn profile(econ: &Economy) -> Result<Profile> {
    match econ.reservation.curvature() {
        Curvature::Concave => pooled_level(econ),
        Curvature::Convex => constant_profile(econ, (econ.theta_lo(), econ.theta_hi())),
        Curvature::NegativeSlope => Ok(Profile::AllLow),
        Curvature::Linear => unreachable!("linear profiles are routed to the threshold solver"),
    }
}

fn gammas(econ: &Economy, p: Profile) -> Vec<GammaRepresentation> {
    econ.dists
        .iter()
        .map(|d| match p {
            Profile::AllLow => GammaRepresentation::PointMassAtLow,
            Profile::AllHigh => GammaRepresentation::PointMassAtHigh,
            Profile::Pooled { level, .. } => GammaRepresentation::pooled(d, level),
            Profile::Constant { gamma } => GammaRepresentation::Constant { gamma },
        })
        .collect()
}

fn regime_of(p: Profile) -> Regime {
    match p {
        Profile::AllLow => Regime::UnderstateInterior,
        Profile::AllHigh => Regime::OverstateInterior,
        Profile::Pooled { .. } | Profile::Constant { .. } => Regime::Countervailing,
    }
}

pub(crate) fn solve_general(econ: &Economy, cap: BunchingCap) -> Result<MechanismSolution> {
    require_general(econ)?;
    let table = threshold_table(econ)?;
    let thresholds = Thresholds { g_l: table.g_l, g_h: table.g_h };
    let p = profile(econ)?;
    let r = econ.r();

    if econ.quota == econ.agent_count() {
        let gm = gammas(econ, p);
        let cutoffs = match p {
            Profile::Pooled { crossing, .. } => vec![crossing],
            _ => Vec::new(),
        };
        let mech = DirectMechanism::new(econ.clone(), AllocationRule::Shadow { gammas: gm.clone() }, vec![Window::Full; r]);
        return finish(
            econ,
            &mech,
            Draft {
                regime: regime_of(p),
                coalition: (0..=r).collect(),
                cutoff_types: cutoffs,
                gamma: gm,
                thresholds,
                alternatives: Vec::new(),
            },
        );
    }

    match p {
        Profile::AllLow => bunch(econ, cap, Side::Low, thresholds),
        Profile::AllHigh => bunch(econ, cap, Side::High, thresholds),
        Profile::Pooled { .. } => exclude_interior(econ, p, thresholds),
        Profile::Constant { .. } => exclude_tails(econ, p, thresholds),
    }
}

/// Uniform-sign majority: order-statistic bunching on one side.
fn bunch(econ: &Economy, cap: BunchingCap, side: Side, thresholds: Thresholds) -> Result<MechanismSolution> {
    let r = econ.r();
    let slots = econ.quota - 1;
    let excluded = econ.agent_count() - econ.quota;
    let rule = AllocationRule::Bunched { side, slots, excluded, cap };
    let mech_probe = DirectMechanism::new(econ.clone(), rule.clone(), vec![Window::Full; r]);
    let lv = mech_probe.order_stat_levels(&econ.types, slots, excluded, cap);
    let mut order = type_order(&econ.types);
    let (window, gamma, cutoff, regime) = match side {
        Side::Low => {
            // descending, ties to the lower index as in the order-statistic rule
            order.sort_by(|&a, &b| econ.types[b].total_cmp(&econ.types[a]).then(a.cmp(&b)));
            (Window::AboveOthersCut { slots }, GammaRepresentation::PointMassAtLow, lv.cutoff_low, Regime::UnderstateInterior)
        }
        Side::High => (Window::BelowOthersCut { slots }, GammaRepresentation::PointMassAtHigh, lv.cutoff_high, Regime::OverstateInterior),
    };
    let mut members: Vec<usize> = order[..slots].iter().map(|&j| j + 1).collect();
    members.sort_unstable();
    let mut coalition = vec![0];
    coalition.extend(members);
    let mech = DirectMechanism::new(econ.clone(), rule, vec![window; r]);
    finish(
        econ,
        &mech,
        Draft { regime, coalition, cutoff_types: vec![cutoff], gamma: vec![gamma; r], thresholds, alternatives: Vec::new() },
    )
}

/// Picks the highest-payoff candidate; ties go to the first and the rest are
/// recorded as alternatives.
fn pick_best(cands: Vec<(String, MechanismSolution)>) -> Result<MechanismSolution> {
    let best = cands
        .iter()
        .enumerate()
        .fold(None::<usize>, |acc, (k, (_, s))| match acc {
            Some(b) if cands[b].1.payoff >= s.payoff - TIE_TOL => Some(b),
            _ => Some(k),
        })
        .ok_or_else(|| MechError::Precondition("no admissible coalition".into()))?;
    let top = cands[best].1.payoff;
    let alternatives: Vec<String> = cands
        .iter()
        .enumerate()
        .filter(|(k, (_, s))| *k != best && (s.payoff - top).abs() <= TIE_TOL)
        .map(|(_, (label, _))| label.clone())
        .collect();
    let mut sol = cands.into_iter().nth(best).map(|c| c.1).expect("index in range");
    sol.alternatives = alternatives;
    Ok(sol)
}

/// Concave majority: exclude a block of `n − q` agents contiguous in type
/// order and commit to rents on the complement of the gap they span.
fn exclude_interior(econ: &Economy, p: Profile, thresholds: Thresholds) -> Result<MechanismSolution> {
    let r = econ.r();
    let e = econ.agent_count() - econ.quota;
    let order = type_order(&econ.types);
    let (lo, hi) = (econ.theta_lo(), econ.theta_hi());
    let gm = gammas(econ, p);
    let rule = AllocationRule::Shadow { gammas: gm.clone() };
    let mut cands = Vec::new();
    for start in 0..=(r - e) {
        let block = &order[start..start + e];
        let theta_p = if start == 0 { lo } else { econ.types[order[start - 1]] };
        let theta_q = if start + e == r { hi } else { econ.types[order[start + e]] };
        let mut parts = Vec::new();
        if theta_p > lo || start > 0 {
            parts.push((lo, theta_p));
        }
        if theta_q < hi || start + e < r {
            parts.push((theta_q, hi));
        }
        let mut coalition: Vec<usize> = (0..r).filter(|j| !block.contains(j)).map(|j| j + 1).collect();
        coalition.insert(0, 0);
        let window = if parts.is_empty() { Window::Full } else { Window::Intervals { parts } };
        let mech = DirectMechanism::new(econ.clone(), rule.clone(), vec![window; r]);
        let sol = finish(
            econ,
            &mech,
            Draft {
                regime: Regime::Countervailing,
                coalition,
                cutoff_types: vec![theta_p, theta_q],
                gamma: gm.clone(),
                thresholds,
                alternatives: Vec::new(),
            },
        )?;
        cands.push((format!("exclusion interval ({theta_p}, {theta_q})"), sol));
    }
    pick_best(cands)
}

/// Convex majority: keep `q − 1` agents contiguous in type order, exclude
/// both tails and balance rents on the kept interval.
fn exclude_tails(econ: &Economy, p: Profile, thresholds: Thresholds) -> Result<MechanismSolution> {
    let r = econ.r();
    let m = econ.quota - 1;
    let order = type_order(&econ.types);
    let mut cands = Vec::new();
    let blocks: Vec<Option<usize>> = if m == 0 { vec![None] } else { (0..=(r - m)).map(Some).collect() };
    for start in blocks {
        let (window, members, local) = match start {
            None => (Window::Full, Vec::new(), p),
            Some(s) => {
                let a = econ.types[order[s]];
                let b = econ.types[order[s + m - 1]];
                // a single kept type leaves nothing to balance
                let local = if b - a < 1e-12 { p } else { constant_profile(econ, (a, b))? };
                let mut ids: Vec<usize> = order[s..s + m].iter().map(|&j| j + 1).collect();
                ids.sort_unstable();
                (Window::Intervals { parts: vec![(a, b)] }, ids, local)
            }
        };
        let gm = gammas(econ, local);
        let mut coalition = vec![0];
        coalition.extend(&members);
        let cutoffs = match &window {
            Window::Intervals { parts } => vec![parts[0].0, parts[0].1],
            _ => Vec::new(),
        };
        let label = format!("kept interval {cutoffs:?}");
        let mech = DirectMechanism::new(econ.clone(), AllocationRule::Shadow { gammas: gm.clone() }, vec![window; r]);
        let sol = finish(
            econ,
            &mech,
            Draft {
                regime: regime_of(local),
                coalition,
                cutoff_types: cutoffs,
                gamma: gm,
                thresholds,
                alternatives: Vec::new(),
            },
        )?;
        cands.push((label, sol));
    }
    pick_best(cands)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ReservationProfile, Technology, TypeDistribution};
    use crate::regimes::{solve, solve_unanimity_linear, SolveOptions, IR_TOL};
    use approx::assert_abs_diff_eq;

    fn unif() -> TypeDistribution {
        TypeDistribution::uniform(0.0, 1.0).unwrap()
    }

    fn quad(types: Vec<f64>, b: f64, g0: f64) -> Economy {
        Economy::new(0.5, types, unif(), Technology::log(), ReservationProfile::quadratic(b).unwrap()).with_outside_g(g0)
    }

    #[test]
    fn zero_status_quo_matches_linear_understate_branch() {
        let lin = Economy::new(0.5, vec![0.8, 0.3], unif(), Technology::log(), ReservationProfile::linear());
        let base = solve_unanimity_linear(&lin).unwrap();
        for b in [-0.8, 0.8] {
            let s = solve_unanimity_general(&quad(vec![0.8, 0.3], b, 0.0)).unwrap();
            assert_eq!(s.regime, Regime::UnderstateInterior);
            assert_abs_diff_eq!(s.g_star, base.g_star, epsilon = 1e-12);
            for (a, b) in s.transfers.iter().zip(&base.transfers) {
                assert_abs_diff_eq!(a, b, epsilon = 1e-8);
            }
        }
    }

    #[test]
    fn concave_high_status_quo_overstates_everywhere() {
        let e = quad(vec![0.8, 0.3], -0.5, 50.0);
        let s = solve_unanimity_general(&e).unwrap();
        assert_eq!(s.regime, Regime::OverstateInterior);
        assert_abs_diff_eq!(s.g_star, s.thresholds.g_h, epsilon = 1e-12);
    }

    #[test]
    fn concave_intermediate_pools_at_the_crossing() {
        let e = quad(vec![0.8, 0.3, 0.55], -0.8, 1.5);
        let s = solve_unanimity_general(&e).unwrap();
        assert_eq!(s.regime, Regime::Countervailing);
        assert!(s.g_star > s.thresholds.g_l && s.g_star < s.thresholds.g_h);
        for (g, d) in s.gamma.iter().zip(&e.dists) {
            assert!(g.is_valid_cdf(d, 201));
        }
        for id in 1..=3 {
            assert!(s.slack(&e, id) >= -IR_TOL);
        }
    }

    #[test]
    fn convex_single_agent_binds_at_both_ends() {
        // v̄'' = 8φ(g°) = 2 exceeds the own-axis slope of φ(g), so rents form an inverted V
        let e = Economy::new(3.0, vec![0.5], unif(), Technology::log(), ReservationProfile::quadratic(8.0).unwrap())
            .with_outside_g(0.25f64.exp_m1());
        let s = solve_unanimity_general(&e).unwrap();
        assert_eq!(s.regime, Regime::Countervailing);
        let a = &s.anchors[0];
        assert!(a.iter().any(|x| x.abs() < 1e-9) && a.iter().any(|x| (x - 1.0).abs() < 1e-9), "{a:?}");
    }

    #[test]
    fn negative_slope_always_understates() {
        let res = ReservationProfile::negative_slope(0.5, 1.0).unwrap();
        let e = Economy::new(0.5, vec![0.8], unif(), Technology::log(), res).with_outside_g(1.0);
        let s = solve_unanimity_general(&e).unwrap();
        assert_eq!(s.regime, Regime::UnderstateInterior);
        assert_abs_diff_eq!(s.g_star, 0.1, epsilon = 1e-12);
    }

    #[test]
    fn majority_at_full_quota_equals_unanimity() {
        let e = quad(vec![0.8, 0.3], 0.8, 0.4);
        assert_eq!(solve_majority_general(&e).unwrap(), solve_unanimity_general(&e).unwrap());
    }

    #[test]
    fn majority_coalitions_respect_quota() {
        for (b, g0) in [(-0.8, 1.5), (0.8, 0.6), (-0.5, 0.0), (0.5, 50.0)] {
            let e = quad(vec![0.1, 0.35, 0.5, 0.7, 0.9], b, g0).with_quota(3);
            let s = solve(&e, SolveOptions::default()).unwrap();
            assert_eq!(s.coalition.len(), 3, "b={b} g0={g0}");
            assert!(s.excluded.len() <= 3);
            for &id in &s.coalition[1..] {
                assert!(s.slack(&e, id) >= -IR_TOL, "b={b} g0={g0} id={id}");
            }
        }
    }
}
