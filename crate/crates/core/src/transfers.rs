//! Envelope transfers, information-rent profiles and the agenda-setter's
//! payoff, evaluated at the realized profile.

use serde::{Deserialize, Serialize};

use crate::error::{MechError, Result};
use crate::mechanism::{DirectMechanism, Mechanism};
use crate::model::Economy;
use crate::numerics::{adaptive_simpson, cumulative_trapezoid, linspace};
use crate::regimes::{build_mechanism, MechanismSolution};

const QUAD_TOL: f64 = 1e-13;
const QUAD_DEPTH: u32 = 40;

fn agent_index(econ: &Economy, id: usize) -> Result<usize> {
    if id == 0 || id > econ.r() {
        return Err(MechError::Precondition(format!("agent id {id} is not a screened agent")));
    }
    Ok(id - 1)
}

/// Rent window of global agent `id` at the realized profile.
fn window(econ: &Economy, sol: &MechanismSolution, i: usize) -> Vec<(f64, f64)> {
    match &sol.scope {
        Some(_) => vec![(econ.theta_lo(), econ.theta_hi())],
        None => DirectMechanism::new(econ.clone(), sol.rule.clone(), sol.windows.clone()).window_parts(i, &econ.types),
    }
}

/// `θφ(g(θ, θ₋ᵢ)) − v̄(anchor) − ∫_anchor^θ φ(g(x, θ₋ᵢ)) dx`: participation
/// binds exactly at `anchor`.
fn anchored(econ: &Economy, mech: &dyn Mechanism, i: usize, theta: f64, anchor: f64) -> f64 {
    let mut r = econ.types.clone();
    let phi_at = |x: f64| {
        let mut r = econ.types.clone();
        r[i] = x;
        econ.phi(mech.allocation(&r))
    };
    r[i] = theta;
    let own = theta * econ.phi(mech.allocation(&r));
    own - econ.v_bar(anchor) - adaptive_simpson(&phi_at, anchor, theta, QUAD_TOL, QUAD_DEPTH)
}

/// Transfer of agent `id` reporting `theta_i` when rents are anchored at the
/// bottom of its window (the support minimum or the cutoff type).
pub fn transfer_understate(econ: &Economy, sol: &MechanismSolution, id: usize, theta_i: f64) -> Result<f64> {
    let i = agent_index(econ, id)?;
    econ.dists[i].in_support(theta_i)?;
    let mech = build_mechanism(econ, sol)?;
    let anchor = window(econ, sol, i).iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
    Ok(anchored(econ, mech.as_ref(), i, theta_i, anchor))
}

/// Mirror of [`transfer_understate`], anchored at the top of the window.
pub fn transfer_overstate(econ: &Economy, sol: &MechanismSolution, id: usize, theta_i: f64) -> Result<f64> {
    let i = agent_index(econ, id)?;
    econ.dists[i].in_support(theta_i)?;
    let mech = build_mechanism(econ, sol)?;
    let anchor = window(econ, sol, i).iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
    Ok(anchored(econ, mech.as_ref(), i, theta_i, anchor))
}

/// Rent `U(θ) − v̄(θ)` of one agent along its own type, the others fixed at
/// their realized types.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RentProfile {
    pub grid: Vec<f64>,
    /// Rent from the mechanism's own transfers.
    pub rent: Vec<f64>,
    /// Envelope slope `φ(g) − ∂v̄/∂θ`.
    pub slope: Vec<f64>,
    /// Rent rebuilt by trapezoid integration of the slope from the bottom.
    pub integrated: Vec<f64>,
}

impl RentProfile {
    pub fn argmin(&self) -> f64 {
        let k = (0..self.rent.len()).min_by(|&a, &b| self.rent[a].total_cmp(&self.rent[b])).unwrap_or(0);
        self.grid[k]
    }

    pub fn argmax(&self) -> f64 {
        let k = (0..self.rent.len()).max_by(|&a, &b| self.rent[a].total_cmp(&self.rent[b])).unwrap_or(0);
        self.grid[k]
    }

    /// Largest gap between direct and integrated rents.
    pub fn quadrature_gap(&self) -> f64 {
        self.rent.iter().zip(&self.integrated).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }

    /// Nonincreasing up to the minimum, nondecreasing after, with the
    /// minimum strictly inside the grid.
    pub fn is_v_shaped(&self, tol: f64) -> bool {
        let k = self.grid.iter().position(|&x| x == self.argmin()).unwrap_or(0);
        let interior = k > 0 && k + 1 < self.rent.len();
        interior
            && self.rent[..=k].windows(2).all(|w| w[1] <= w[0] + tol)
            && self.rent[k..].windows(2).all(|w| w[1] >= w[0] - tol)
    }

    /// Nondecreasing up to the maximum, nonincreasing after, with the
    /// maximum strictly inside the grid.
    pub fn is_inverted_v(&self, tol: f64) -> bool {
        let k = self.grid.iter().position(|&x| x == self.argmax()).unwrap_or(0);
        let interior = k > 0 && k + 1 < self.rent.len();
        interior
            && self.rent[..=k].windows(2).all(|w| w[1] >= w[0] - tol)
            && self.rent[k..].windows(2).all(|w| w[1] <= w[0] + tol)
    }
}

/// Rent profile of global agent `id` on `grid_size` points of the support.
pub fn rent_profile(econ: &Economy, sol: &MechanismSolution, id: usize, grid_size: usize) -> Result<RentProfile> {
    if grid_size < 3 {
        return Err(MechError::Precondition("rent profile needs at least 3 grid points".into()));
    }
    let i = agent_index(econ, id)?;
    let mech = build_mechanism(econ, sol)?;
    let grid = linspace(econ.theta_lo(), econ.theta_hi(), grid_size);
    let t = mech.transfers_along(i, &econ.types, &grid);
    let mut rent = Vec::with_capacity(grid_size);
    let mut slope = Vec::with_capacity(grid_size);
    let mut r = econ.types.clone();
    for (&x, tx) in grid.iter().zip(&t) {
        r[i] = x;
        let phi = econ.phi(mech.allocation(&r));
        rent.push(x * phi - tx - econ.v_bar(x));
        slope.push(phi - econ.v_bar_dtheta(x));
    }
    let integrated = cumulative_trapezoid(&grid, &slope).into_iter().map(|v| v + rent[0]).collect();
    Ok(RentProfile { grid, rent, slope, integrated })
}

/// `θ_aφ(g*) − t_a` with `t_a = g* − Σ tᵢ`.
pub fn agenda_setter_payoff(econ: &Economy, sol: &MechanismSolution) -> f64 {
    let paid: f64 = sol.transfers[1..].iter().sum();
    econ.theta_a * econ.phi(sol.g_star) - (sol.g_star - paid)
}
