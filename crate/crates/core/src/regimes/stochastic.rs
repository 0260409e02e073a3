//! Randomly drawn coalitions: screening happens only inside the drawn
//! coalition and every other agent pays a flat tax.

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{MechError, Result};
use crate::mechanism::{AllocationRule, DirectMechanism, Mechanism, Window};
use crate::model::Economy;
use crate::solver_core::partition_types;

use super::{solve, MechanismSolution, Regime, Scope, SolveOptions, Thresholds, IR_TOL};

/// Mechanism on the full report vector that delegates to a unanimity
/// mechanism over the drawn members.
#[derive(Debug, Clone)]
pub struct StochasticMechanism {
    pub econ: Economy,
    pub inner: DirectMechanism,
    /// 0-based indices into the report vector, ascending.
    pub members: Vec<usize>,
    pub tau_bar: f64,
}

/// Economy restricted to `members` (0-based); keeps the tax population and
/// requires unanimity inside.
fn sub_economy(econ: &Economy, members: &[usize]) -> Economy {
    let mut sub = econ.clone();
    sub.types = members.iter().map(|&i| econ.types[i]).collect();
    sub.dists = members.iter().map(|&i| econ.dists[i].clone()).collect();
    sub.quota = members.len() + 1;
    sub
}

fn check_tau(tau_bar: f64) -> Result<()> {
    if !(tau_bar >= 0.0 && tau_bar.is_finite()) {
        return Err(MechError::InvalidEconomy(format!("flat tax must be finite and nonnegative, got {tau_bar}")));
    }
    Ok(())
}

impl StochasticMechanism {
    pub fn from_parts(econ: &Economy, scope: &Scope, rule: AllocationRule, windows: Vec<Window>) -> Result<Self> {
        check_tau(scope.tau_bar)?;
        if scope.members.iter().any(|&id| id == 0 || id > econ.r()) {
            return Err(MechError::InvalidEconomy("coalition member outside the economy".into()));
        }
        let members: Vec<usize> = scope.members.iter().map(|&id| id - 1).collect();
        let sub = sub_economy(econ, &members);
        Ok(Self { econ: econ.clone(), inner: DirectMechanism::new(sub, rule, windows), members, tau_bar: scope.tau_bar })
    }

    fn project(&self, reports: &[f64]) -> Vec<f64> {
        self.members.iter().map(|&i| reports[i]).collect()
    }
}

impl Mechanism for StochasticMechanism {
    fn agents(&self) -> usize {
        self.econ.r()
    }

    fn support(&self) -> (f64, f64) {
        (self.econ.theta_lo(), self.econ.theta_hi())
    }

    fn realized(&self) -> &[f64] {
        &self.econ.types
    }

    fn theta_a(&self) -> f64 {
        self.econ.theta_a
    }

    fn phi(&self, g: f64) -> f64 {
        self.econ.phi(g)
    }

    fn reservation(&self, _agent: usize, theta: f64) -> f64 {
        self.econ.v_bar(theta)
    }

    fn allocation(&self, reports: &[f64]) -> f64 {
        self.inner.allocation(&self.project(reports))
    }

    fn transfers_along(&self, agent: usize, reports: &[f64], own: &[f64]) -> Vec<f64> {
        match self.members.iter().position(|&i| i == agent) {
            Some(local) => self.inner.transfers_along(local, &self.project(reports), own),
            None => vec![self.tau_bar; own.len()],
        }
    }
}

/// Quota 1: nobody is screened and the agenda-setter posts its own optimum.
/// Only the fields read by the caller are filled.
fn setter_alone(econ: &Economy) -> Result<MechanismSolution> {
    let g = econ.tech.xi(econ.theta_a)?;
    let regime = if econ.g0 < g {
        Regime::UnderstateInterior
    } else if econ.g0 > g {
        Regime::OverstateInterior
    } else {
        Regime::OutsideOption
    };
    Ok(MechanismSolution {
        g_star: g,
        regime,
        coalition: vec![0],
        excluded: Vec::new(),
        bunched: Vec::new(),
        cutoff_types: Vec::new(),
        partition: Default::default(),
        gamma: Vec::new(),
        transfers: vec![g],
        thresholds: Thresholds { g_l: g, g_h: g },
        payoff: econ.theta_a * econ.phi(g) - g,
        virtual_surplus: econ.theta_a * econ.phi(g) - g,
        anchors: Vec::new(),
        participation_deficits: Vec::new(),
        alternatives: Vec::new(),
        rule: AllocationRule::Posted { g },
        windows: Vec::new(),
        scope: None,
        fingerprint: String::new(),
    })
}

/// Draws `q − 1` members uniformly without replacement from `seed`, solves
/// unanimity among them, and charges everyone else `tau_bar`.
pub fn solve_stochastic_coalition(econ: &Economy, seed: u64, tau_bar: f64) -> Result<MechanismSolution> {
    econ.check()?;
    check_tau(tau_bar)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut members = sample(&mut rng, econ.r(), econ.quota - 1).into_vec();
    members.sort_unstable();

    let sub = sub_economy(econ, &members);
    let inner = if members.is_empty() { setter_alone(econ)? } else { solve(&sub, SolveOptions::default())? };
    let ids: Vec<usize> = members.iter().map(|&i| i + 1).collect();
    let scope = Scope { members: ids.clone(), tau_bar };
    let mech = StochasticMechanism::from_parts(econ, &scope, inner.rule.clone(), inner.windows.clone())?;

    let g = inner.g_star;
    let mut transfers = vec![tau_bar; econ.r() + 1];
    let mut anchors = vec![Vec::new(); econ.r()];
    for (local, &i) in members.iter().enumerate() {
        transfers[i + 1] = inner.transfers[local + 1];
        anchors[i] = inner.anchors[local].clone();
    }
    transfers[0] = mech.agenda_transfer(&econ.types);

    let mut coalition = vec![0];
    coalition.extend(&ids);
    let mut sol = MechanismSolution {
        g_star: g,
        regime: inner.regime,
        coalition,
        excluded: Vec::new(),
        bunched: Vec::new(),
        cutoff_types: inner.cutoff_types,
        partition: partition_types(econ, g)?,
        gamma: inner.gamma,
        transfers,
        thresholds: inner.thresholds,
        payoff: 0.0,
        virtual_surplus: inner.virtual_surplus,
        anchors,
        participation_deficits: Vec::new(),
        alternatives: Vec::new(),
        rule: inner.rule,
        windows: inner.windows,
        scope: Some(scope),
        fingerprint: econ.fingerprint(),
    };
    sol.payoff = econ.theta_a * econ.phi(g) - sol.transfers[0];
    for id in 1..=econ.r() {
        if ids.contains(&id) {
            continue;
        }
        let slack = sol.slack(econ, id);
        if slack < -IR_TOL {
            sol.excluded.push(id);
            sol.participation_deficits.push((id, slack));
        }
    }
    Ok(sol)
}
