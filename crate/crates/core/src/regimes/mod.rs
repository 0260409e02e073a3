//! Top-level solvers for unanimity and majority rule, the stochastic
//! coalition variant, and status-quo sweeps.

pub mod general;
pub mod linear;
pub mod stochastic;
pub mod sweep;
pub mod thresholds;

use serde::{Deserialize, Serialize};

use crate::error::{MechError, Result};
use crate::mechanism::{AllocationRule, BunchingCap, DirectMechanism, Mechanism, Window};
use crate::model::{Curvature, Economy};
use crate::solver_core::{partition_types, sigma, GammaRepresentation, Partition, Shadow};

pub use general::{solve_majority_general, solve_unanimity_general};
pub use linear::{coalition_value, solve_majority_linear, solve_unanimity_linear};
pub use stochastic::{solve_stochastic_coalition, StochasticMechanism};
pub use sweep::{step_segments, sweep_outside_option, Jump, Segment, SegmentKind, StepShape};
pub use thresholds::{threshold_table, ThresholdStep, ThresholdTable};

/// Slack below which a participation constraint counts as violated.
pub const IR_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    UnderstateInterior,
    OutsideOption,
    OverstateInterior,
    NonMonotoneLow,
    NonMonotoneHigh,
    /// Understating and overstating agents coexist.
    Countervailing,
}

impl Regime {
    pub fn as_str(&self) -> &'static str {
        match self {
            Regime::UnderstateInterior => "understate_interior",
            Regime::OutsideOption => "outside_option",
            Regime::OverstateInterior => "overstate_interior",
            Regime::NonMonotoneLow => "non_monotone_low",
            Regime::NonMonotoneHigh => "non_monotone_high",
            Regime::Countervailing => "countervailing",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Thresholds {
    pub g_l: f64,
    pub g_h: f64,
}

/// Agents outside a randomly drawn coalition pay a flat tax.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scope {
    /// Global ids of the screened coalition members.
    pub members: Vec<usize>,
    pub tau_bar: f64,
}

/// Solver output at the realized profile. Agent ids are global: 0 is the
/// agenda-setter, `k ≥ 1` is `types[k − 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MechanismSolution {
    pub g_star: f64,
    pub regime: Regime,
    pub coalition: Vec<usize>,
    pub excluded: Vec<usize>,
    pub bunched: Vec<usize>,
    pub cutoff_types: Vec<f64>,
    pub partition: Partition,
    /// Shadow distribution per screened agent.
    pub gamma: Vec<GammaRepresentation>,
    /// `transfers[0]` is the agenda-setter's residual payment.
    pub transfers: Vec<f64>,
    pub thresholds: Thresholds,
    /// Ex-post agenda-setter payoff `θ_aφ(g) − t_a`.
    pub payoff: f64,
    /// Pointwise virtual surplus `σ(θ, γ, g)` at the realized profile.
    pub virtual_surplus: f64,
    /// Types along each agent's own axis where participation binds.
    pub anchors: Vec<Vec<f64>>,
    /// Excluded agents not pooled at the cutoff transfer, with their slack.
    pub participation_deficits: Vec<(usize, f64)>,
    /// Equally good configurations the tie-break passed over.
    pub alternatives: Vec<String>,
    pub rule: AllocationRule,
    pub windows: Vec<Window>,
    pub scope: Option<Scope>,
    pub fingerprint: String,
}

impl MechanismSolution {
    /// Participation slack `θ_iφ(g) − t_i − v̄(θ_i)` of global agent `id ≥ 1`.
    pub fn slack(&self, econ: &Economy, id: usize) -> f64 {
        let t = econ.types[id - 1];
        t * econ.phi(self.g_star) - self.transfers[id] - econ.v_bar(t)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SolveOptions {
    pub cap: BunchingCap,
}

/// Dispatches on curvature and quota.
pub fn solve(econ: &Economy, opts: SolveOptions) -> Result<MechanismSolution> {
    econ.check()?;
    match econ.reservation.curvature() {
        Curvature::Linear => linear::solve_linear(econ, opts.cap),
        _ => general::solve_general(econ, opts.cap),
    }
}

/// Rebuilds the committed mechanism behind a stored solution.
pub fn build_mechanism(econ: &Economy, sol: &MechanismSolution) -> Result<Box<dyn Mechanism + Send>> {
    if econ.fingerprint() != sol.fingerprint {
        return Err(MechError::Precondition("solution was computed for a different economy".into()));
    }
    match &sol.scope {
        None => Ok(Box::new(DirectMechanism::new(econ.clone(), sol.rule.clone(), sol.windows.clone()))),
        Some(scope) => Ok(Box::new(StochasticMechanism::from_parts(
            econ,
            scope,
            sol.rule.clone(),
            sol.windows.clone(),
        )?)),
    }
}

pub(crate) struct Draft {
    pub regime: Regime,
    pub coalition: Vec<usize>,
    pub cutoff_types: Vec<f64>,
    pub gamma: Vec<GammaRepresentation>,
    pub thresholds: Thresholds,
    pub alternatives: Vec<String>,
}

/// Evaluates a committed mechanism at the realized profile and assembles
/// the solution record.
pub(crate) fn finish(econ: &Economy, mech: &DirectMechanism, draft: Draft) -> Result<MechanismSolution> {
    let types = &econ.types;
    let g = mech.allocation(types);
    let mut transfers = vec![0.0; econ.r() + 1];
    let mut anchors = Vec::with_capacity(econ.r());
    for i in 0..econ.r() {
        transfers[i + 1] = mech.transfer(i, types);
        anchors.push(binding_types(mech, i));
    }
    transfers[0] = g - transfers[1..].iter().sum::<f64>();
    let virtual_surplus = sigma(econ, &Shadow { gammas: draft.gamma.clone() }, g);
    let mut sol = MechanismSolution {
        g_star: g,
        regime: draft.regime,
        coalition: draft.coalition,
        excluded: Vec::new(),
        bunched: Vec::new(),
        cutoff_types: draft.cutoff_types,
        partition: partition_types(econ, g)?,
        gamma: draft.gamma,
        transfers,
        thresholds: draft.thresholds,
        payoff: 0.0,
        virtual_surplus,
        anchors,
        participation_deficits: Vec::new(),
        alternatives: draft.alternatives,
        rule: mech.rule.clone(),
        windows: mech.windows.clone(),
        scope: None,
        fingerprint: econ.fingerprint(),
    };
    sol.payoff = econ.theta_a * econ.phi(g) - sol.transfers[0];
    classify_exclusion(econ, mech, &mut sol);
    Ok(sol)
}

/// Points of agent `agent`'s window where its rent is zero.
fn binding_types(mech: &DirectMechanism, agent: usize) -> Vec<f64> {
    let types = &mech.econ.types;
    let (argmin, _) = mech.rent_floor(agent, types);
    let mut pts = vec![argmin];
    for (a, b) in mech.window_parts(agent, types) {
        pts.push(a);
        pts.push(b);
    }
    pts.sort_by(f64::total_cmp);
    pts.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    let t = mech.transfers_along(agent, types, &pts);
    let e = &mech.econ;
    pts.iter()
        .zip(t)
        .filter(|(x, tx)| {
            let mut r = types.clone();
            r[agent] = **x;
            let u = **x * e.phi(mech.allocation(&r)) - tx - e.v_bar(**x);
            u.abs() < 1e-7
        })
        .map(|(x, _)| *x)
        .collect()
}

fn classify_exclusion(econ: &Economy, mech: &DirectMechanism, sol: &mut MechanismSolution) {
    for id in 1..=econ.r() {
        if sol.coalition.contains(&id) {
            continue;
        }
        let slack = sol.slack(econ, id);
        if slack >= -IR_TOL {
            continue;
        }
        sol.excluded.push(id);
        let i = id - 1;
        let own = econ.types[i];
        // transfer at the nearest window edge is the cutoff transfer
        let edge = mech
            .window_parts(i, &econ.types)
            .iter()
            .flat_map(|&(a, b)| [a, b])
            .min_by(|a, b| (a - own).abs().total_cmp(&(b - own).abs()));
        let pooled = edge.is_some_and(|c| {
            let t = mech.transfers_along(i, &econ.types, &[own, c]);
            (t[0] - t[1]).abs() <= IR_TOL
        });
        if pooled {
            sol.bunched.push(id);
        } else {
            sol.participation_deficits.push((id, slack));
        }
    }
}
