use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{MechError, Result};
use crate::mechanism::Mechanism;
use crate::model::Economy;
use crate::numerics::linspace;
use crate::regimes::{build_mechanism, MechanismSolution};

/// Oracle tolerance; sits above the transfer (1e-9) and solver (1e-10) layers.
pub const ORACLE_TOL: f64 = 1e-8;
/// Points per agent dimension in the deviation scan.
pub const DEFAULT_GRID: usize = 41;

/// Most profitable misreport found for one agent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Deviation {
    /// 0-based position in the report vector.
    pub agent: usize,
    pub true_type: f64,
    pub misreport: f64,
    pub gain: f64,
}

/// Adjacent own reports where provision falls.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonotoneViolation {
    pub agent: usize,
    pub lower_report: f64,
    pub upper_report: f64,
    pub drop: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IrSlack {
    pub agent: usize,
    pub slack: f64,
    /// Only coalition members are required to have nonnegative slack.
    pub required: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleReport {
    pub dsic_ok: bool,
    pub worst_deviation: Option<Deviation>,
    pub monotone_ok: bool,
    pub first_monotone_violation: Option<MonotoneViolation>,
    pub ir_ok: bool,
    pub ir_report: Vec<IrSlack>,
    /// `t_a + Σ tᵢ − g` at the realized profile.
    pub budget_slack: f64,
    pub tolerance: f64,
}

impl OracleReport {
    pub fn passed(&self) -> bool {
        self.dsic_ok && self.monotone_ok && self.ir_ok && self.budget_slack >= -self.tolerance
    }

    /// Human-readable list of failed checks.
    pub fn failures(&self) -> Vec<String> {
        let mut out = Vec::new();
        if !self.dsic_ok {
            out.push(format!("dsic: {:?}", self.worst_deviation));
        }
        if !self.monotone_ok {
            out.push(format!("monotonicity: {:?}", self.first_monotone_violation));
        }
        if !self.ir_ok {
            let bad: Vec<&IrSlack> = self.ir_report.iter().filter(|s| s.required && s.slack < -self.tolerance).collect();
            out.push(format!("participation: {bad:?}"));
        }
        if self.budget_slack < -self.tolerance {
            out.push(format!("budget: slack {}", self.budget_slack));
        }
        out
    }
}

/// Per-agent deviation scan at the realized profile of the others.
struct Scan {
    worst: Deviation,
    monotone: Option<MonotoneViolation>,
}

fn scan_agent(mech: &dyn Mechanism, agent: usize, grid: &[f64]) -> Scan {
    let base = mech.realized().to_vec();
    // the realized type joins the grid so stored transfers are exercised
    let mut grid = grid.to_vec();
    if let Err(k) = grid.binary_search_by(|x| x.total_cmp(&base[agent])) {
        grid.insert(k, base[agent]);
    }
    let grid = grid.as_slice();
    let t = mech.transfers_along(agent, &base, grid);
    let phis: Vec<f64> = grid
        .iter()
        .map(|&x| {
            let mut r = base.clone();
            r[agent] = x;
            mech.phi(mech.allocation(&r))
        })
        .collect();
    let mut worst = Deviation { agent, true_type: grid[0], misreport: grid[0], gain: f64::NEG_INFINITY };
    for (a, &truth) in grid.iter().enumerate() {
        let honest = truth * phis[a] - t[a];
        for (b, &lie) in grid.iter().enumerate() {
            let gain = truth * phis[b] - t[b] - honest;
            if gain > worst.gain {
                worst = Deviation { agent, true_type: truth, misreport: lie, gain };
            }
        }
    }
    // φ is increasing, so a drop in φ along the grid is a drop in provision
    let monotone = (1..grid.len()).find(|&k| phis[k] < phis[k - 1] - ORACLE_TOL).map(|k| MonotoneViolation {
        agent,
        lower_report: grid[k - 1],
        upper_report: grid[k],
        drop: phis[k - 1] - phis[k],
    });
    Scan { worst, monotone }
}

/// Own-report deviation scan on a `grid_size` grid for every agent, plus
/// monotonicity of provision in each own report.
pub fn check_dsic(mech: &dyn Mechanism, grid_size: usize) -> OracleReport {
    let (lo, hi) = mech.support();
    let grid = linspace(lo, hi, grid_size.max(5));
    let scans: Vec<Scan> = (0..mech.agents()).into_par_iter().map(|i| scan_agent(mech, i, &grid)).collect();
    let worst = scans.iter().map(|s| s.worst).max_by(|a, b| a.gain.total_cmp(&b.gain));
    let first_monotone_violation = scans.iter().find_map(|s| s.monotone);
    OracleReport {
        dsic_ok: worst.is_none_or(|w| w.gain <= ORACLE_TOL),
        worst_deviation: worst,
        monotone_ok: first_monotone_violation.is_none(),
        first_monotone_violation,
        ir_ok: true,
        ir_report: Vec::new(),
        budget_slack: budget_slack(mech),
        tolerance: ORACLE_TOL,
    }
}

/// Participation slack of every agent at the realized profile; `coalition`
/// holds 0-based positions of agents whose slack must be nonnegative.
pub fn check_participation(mech: &dyn Mechanism, coalition: &[usize]) -> OracleReport {
    let types = mech.realized();
    let phi = mech.phi(mech.allocation(types));
    let ir_report: Vec<IrSlack> = (0..mech.agents())
        .map(|i| IrSlack {
            agent: i,
            slack: types[i] * phi - mech.transfer(i, types) - mech.reservation(i, types[i]),
            required: coalition.contains(&i),
        })
        .collect();
    OracleReport {
        dsic_ok: true,
        worst_deviation: None,
        monotone_ok: true,
        first_monotone_violation: None,
        ir_ok: ir_report.iter().all(|s| !s.required || s.slack >= -ORACLE_TOL),
        ir_report,
        budget_slack: budget_slack(mech),
        tolerance: ORACLE_TOL,
    }
}

/// `t_a + Σ tᵢ − g`; the agenda-setter's residual payment makes it zero.
pub fn budget_slack(mech: &dyn Mechanism) -> f64 {
    let types = mech.realized();
    let paid: f64 = (0..mech.agents()).map(|i| mech.transfer(i, types)).sum();
    mech.agenda_transfer(types) + paid - mech.allocation(types)
}

/// Committed mechanism whose payments at the realized profile are the ones
/// stored in a solution, so a tampered record shows up as a deviation.
struct Pinned<'a> {
    inner: &'a dyn Mechanism,
    /// `stored[0]` is the agenda-setter.
    stored: &'a [f64],
}

impl Pinned<'_> {
    fn at_realized(&self, agent: usize, reports: &[f64], own: f64) -> bool {
        let real = self.inner.realized();
        own == real[agent] && reports.iter().zip(real).enumerate().all(|(j, (r, t))| j == agent || r == t)
    }
}

impl Mechanism for Pinned<'_> {
    fn agents(&self) -> usize {
        self.inner.agents()
    }
    fn support(&self) -> (f64, f64) {
        self.inner.support()
    }
    fn realized(&self) -> &[f64] {
        self.inner.realized()
    }
    fn theta_a(&self) -> f64 {
        self.inner.theta_a()
    }
    fn phi(&self, g: f64) -> f64 {
        self.inner.phi(g)
    }
    fn reservation(&self, agent: usize, theta: f64) -> f64 {
        self.inner.reservation(agent, theta)
    }
    fn allocation(&self, reports: &[f64]) -> f64 {
        self.inner.allocation(reports)
    }
    fn transfers_along(&self, agent: usize, reports: &[f64], own: &[f64]) -> Vec<f64> {
        let mut t = self.inner.transfers_along(agent, reports, own);
        for (k, &x) in own.iter().enumerate() {
            if self.at_realized(agent, reports, x) {
                t[k] = self.stored[agent + 1];
            }
        }
        t
    }
    fn agenda_transfer(&self, reports: &[f64]) -> f64 {
        if reports == self.inner.realized() {
            self.stored[0]
        } else {
            self.inner.agenda_transfer(reports)
        }
    }
}

/// All oracle checks for a stored solution: deviations, monotonicity,
/// participation of coalition members, and the budget. Payments at the
/// realized profile are taken from `sol.transfers`, not recomputed.
pub fn certify(econ: &Economy, sol: &MechanismSolution, grid_size: usize) -> Result<OracleReport> {
    let built = build_mechanism(econ, sol)?;
    if sol.transfers.len() != built.agents() + 1 {
        return Err(MechError::Precondition(format!(
            "solution lists {} transfers for {} agents and the agenda-setter",
            sol.transfers.len(),
            built.agents()
        )));
    }
    let pinned = Pinned { inner: built.as_ref(), stored: &sol.transfers };
    let mech: &dyn Mechanism = &pinned;
    let mut report = check_dsic(mech, grid_size);
    let members: Vec<usize> = sol.coalition.iter().filter(|&&id| id > 0).map(|id| id - 1).collect();
    let ir = check_participation(mech, &members);
    report.ir_ok = ir.ir_ok;
    report.ir_report = ir.ir_report;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ReservationProfile, Technology, TypeDistribution};
    use crate::regimes::solve_unanimity_linear;

    fn setup() -> (Economy, MechanismSolution) {
        let e = Economy::new(0.5, vec![0.8, 0.3], TypeDistribution::uniform(0.0, 1.0).unwrap(), Technology::log(), ReservationProfile::linear())
            .with_outside_g(0.5);
        let s = solve_unanimity_linear(&e).unwrap();
        (e, s)
    }

    #[test]
    fn untouched_solution_passes() {
        let (e, s) = setup();
        assert!(certify(&e, &s, 41).unwrap().passed());
    }

    #[test]
    fn tampered_transfer_is_caught_either_way() {
        let (e, s) = setup();
        for bump in [0.01, -0.01] {
            let mut bad = s.clone();
            bad.transfers[1] += bump;
            let r = certify(&e, &bad, 41).unwrap();
            assert!(!r.passed(), "bump {bump} went unnoticed");
            assert!(!r.dsic_ok);
        }
    }

    #[test]
    fn truncated_transfer_list_is_rejected() {
        let (e, mut s) = setup();
        s.transfers.pop();
        assert!(certify(&e, &s, 41).is_err());
    }
}
