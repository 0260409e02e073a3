//! Linear reservation profile: threshold rules for unanimity and majority.

use crate::error::{MechError, Result};
use crate::mechanism::{AllocationRule, BunchingCap, DirectMechanism, Window};
use crate::model::{Curvature, Economy};
use crate::solver_core::GammaRepresentation;

use super::{finish, Draft, MechanismSolution, Regime, Thresholds};

/// Slack when comparing the status quo to a threshold.
const BOUNDARY_TOL: f64 = 1e-12;

fn require_linear(econ: &Economy) -> Result<()> {
    econ.check()?;
    if econ.reservation.curvature() != Curvature::Linear {
        return Err(MechError::InvalidEconomy(format!(
            "linear solver called with a {} reservation profile",
            econ.reservation.curvature()
        )));
    }
    Ok(())
}

/// Threshold rule at `q = n`.
pub fn solve_unanimity_linear(econ: &Economy) -> Result<MechanismSolution> {
    if econ.quota != econ.agent_count() {
        return Err(MechError::InvalidEconomy(format!(
            "unanimity needs quota {} but economy has quota {}",
            econ.agent_count(),
            econ.quota
        )));
    }
    solve_linear(econ, BunchingCap::Efficient)
}

/// Threshold rule for any quota, capped at the efficient level.
pub fn solve_majority_linear(econ: &Economy) -> Result<MechanismSolution> {
    solve_linear(econ, BunchingCap::Efficient)
}

/// Value of coalition `members` (global ids, agenda-setter excluded) for the
/// public good: `θ_a + (n − q)·min θ + Σ hazard_low` on the low side and
/// `θ_a + (n − q)·max θ + Σ hazard_high` on the high side.
pub fn coalition_value(econ: &Economy, members: &[usize], high: bool) -> f64 {
    let excluded = (econ.agent_count() - econ.quota) as f64;
    let types: Vec<f64> = members.iter().map(|&id| econ.types[id - 1]).collect();
    let cut = if types.is_empty() {
        if high {
            econ.theta_lo()
        } else {
            econ.theta_hi()
        }
    } else if high {
        types.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    } else {
        types.iter().cloned().fold(f64::INFINITY, f64::min)
    };
    let hazard: f64 = members
        .iter()
        .map(|&id| {
            let d = &econ.dists[id - 1];
            let t = econ.types[id - 1];
            if high {
                d.hh(t)
            } else {
                d.hl(t)
            }
        })
        .sum();
    econ.theta_a + excluded * cut + hazard
}

fn top_slots(types: &[f64], m: usize, descending: bool) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..types.len()).collect();
    if descending {
        idx.sort_by(|&a, &b| types[b].total_cmp(&types[a]).then(a.cmp(&b)));
    } else {
        idx.sort_by(|&a, &b| types[a].total_cmp(&types[b]).then(a.cmp(&b)));
    }
    let mut ids: Vec<usize> = idx[..m].iter().map(|&j| j + 1).collect();
    ids.sort_unstable();
    ids
}

pub(crate) fn solve_linear(econ: &Economy, cap: BunchingCap) -> Result<MechanismSolution> {
    require_linear(econ)?;
    let r = econ.r();
    let slots = econ.quota - 1;
    let excluded = econ.agent_count() - econ.quota;
    let rule = AllocationRule::Linear { slots, excluded, cap };
    let probe = DirectMechanism::new(econ.clone(), rule.clone(), vec![Window::Full; r]);
    let lv = probe.order_stat_levels(&econ.types, slots, excluded, cap);
    let (g_l, g_h, g0) = (lv.g_low, lv.g_high, econ.g0);

    // thresholds carry rounding from ξ; a status quo within BOUNDARY_TOL sits on the boundary
    let regime = if g_l <= g_h {
        if g0 < g_l - BOUNDARY_TOL {
            Regime::UnderstateInterior
        } else if g0 > g_h + BOUNDARY_TOL {
            Regime::OverstateInterior
        } else {
            Regime::OutsideOption
        }
    } else if g0 <= g_l {
        Regime::NonMonotoneLow
    } else {
        Regime::NonMonotoneHigh
    };

    let low = matches!(regime, Regime::UnderstateInterior | Regime::NonMonotoneLow);
    let high = matches!(regime, Regime::OverstateInterior | Regime::NonMonotoneHigh);
    let (window, members, cutoffs, gamma) = if low {
        (
            Window::AboveOthersCut { slots },
            top_slots(&econ.types, slots, true),
            vec![lv.cutoff_low],
            GammaRepresentation::PointMassAtLow,
        )
    } else if high {
        (
            Window::BelowOthersCut { slots },
            top_slots(&econ.types, slots, false),
            vec![lv.cutoff_high],
            GammaRepresentation::PointMassAtHigh,
        )
    } else {
        // every coalition is optimal here; the lexicographically smallest wins
        ((Window::Full), (1..=slots).collect(), Vec::new(), GammaRepresentation::PointMassAtLow)
    };
    let gamma = if regime == Regime::OutsideOption {
        econ.types
            .iter()
            .zip(&econ.dists)
            .map(|(&t, d)| GammaRepresentation::Constant { gamma: d.cdf(t) })
            .collect()
    } else {
        vec![gamma; r]
    };

    let mut coalition = vec![0];
    coalition.extend(members);
    let mech = DirectMechanism::new(econ.clone(), rule, vec![window; r]);
    finish(
        econ,
        &mech,
        Draft {
            regime,
            coalition,
            cutoff_types: cutoffs,
            gamma,
            thresholds: Thresholds { g_l, g_h },
            alternatives: Vec::new(),
        },
    )
}
