use serde::{Deserialize, Serialize};

use crate::error::{MechError, Result};
use crate::model::Economy;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VcgReport {
    /// First-best provision `Σθ − 1` over all agents including the agenda-setter.
    pub g_efficient: f64,
    /// Pure Groves transfers `−Σ_{j≠i} θ_jφ(g)`, agenda-setter first.
    pub transfers: Vec<f64>,
    /// `g − Σ tᵢ`: cost left uncovered.
    pub deficit: f64,
    pub epsilon: f64,
    /// Cut in provision `Σθᵢ(e^{ε/θ_j} − 1)` with `j` the lowest type.
    pub delta: f64,
    /// Compensation paid so no agent loses, `Σ(θᵢ/θ_j)ε`.
    pub compensation: f64,
    /// `delta − compensation`: what the agenda-setter saves.
    pub gain: f64,
}

/// Groves mechanism at the efficient level and the perturbation showing the
/// agenda-setter prefers to deviate from it. Requires `φ = ln(1 + g)`.
pub fn vcg_demo(econ: &Economy, epsilon: f64) -> Result<VcgReport> {
    econ.check()?;
    if !econ.tech.is_log() {
        return Err(MechError::Precondition("the VCG construction needs φ(g) = ln(1 + g)".into()));
    }
    if !(epsilon >= 0.0 && epsilon.is_finite()) {
        return Err(MechError::Precondition(format!("perturbation size must be finite and nonnegative, got {epsilon}")));
    }
    let mut thetas = vec![econ.theta_a];
    thetas.extend(&econ.types);
    let total: f64 = thetas.iter().sum();
    if total <= 1.0 {
        return Err(MechError::Precondition("efficient provision is zero; no transfers to perturb".into()));
    }
    let g = total - 1.0;
    let phi = econ.phi(g);
    let transfers: Vec<f64> = thetas.iter().map(|&t| -(total - t) * phi).collect();
    let deficit = g - transfers.iter().sum::<f64>();

    let lowest = thetas.iter().cloned().fold(f64::INFINITY, f64::min);
    if lowest <= 0.0 {
        return Err(MechError::Precondition("perturbation needs strictly positive types".into()));
    }
    let x = epsilon / lowest;
    let delta: f64 = thetas.iter().map(|t| t * x.exp_m1()).sum();
    let compensation: f64 = thetas.iter().map(|t| t * x).sum();
    // Σθᵢ(e^x − 1 − x), summed directly to avoid cancellation
    let gain: f64 = thetas.iter().map(|t| t * (x.exp_m1() - x)).sum();
    Ok(VcgReport { g_efficient: g, transfers, deficit, epsilon, delta, compensation, gain })
}
