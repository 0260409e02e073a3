//! Screening engine: envelope slopes, type partitions, shadow
//! distributions γ and the virtual-surplus maximizer ξ.

use serde::{Deserialize, Serialize};

use crate::error::{MechError, Result};
use crate::model::{Curvature, Economy, ReservationProfile, Technology, TypeDistribution};
use crate::numerics::{bisect, linspace, MAX_BISECTION_ITERS};

/// Envelope slopes within this band count as zero.
pub const EPS_L: f64 = 1e-7;
/// Panels for the composite Simpson rule behind `R(γ)`.
pub const R_PANELS: usize = 400;
const GAMMA_TOL: f64 = 1e-12;

/// `dU/dθ = φ(g) − ∂v̄/∂θ(θ, g°)`.
pub fn envelope_slope(theta_i: f64, g: f64, g_circ: f64, res: &ReservationProfile, tech: &Technology) -> f64 {
    tech.phi(g) - res.v_bar_dtheta(theta_i, g_circ, tech)
}

/// Agents (global ids) by sign of the envelope slope.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Partition {
    /// slope < 0: overstating types
    pub k: Vec<usize>,
    /// slope = 0: participation may bind
    pub l: Vec<usize>,
    /// slope > 0: understating types
    pub m: Vec<usize>,
}

impl Partition {
    pub fn len(&self) -> usize {
        self.k.len() + self.l.len() + self.m.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Agents sorted by ascending realized type; ties keep index order.
pub fn type_order(types: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..types.len()).collect();
    idx.sort_by(|&a, &b| types[a].total_cmp(&types[b]).then(a.cmp(&b)));
    idx
}

pub fn partition_types(econ: &Economy, g: f64) -> Result<Partition> {
    let mut part = Partition::default();
    let mut rank = vec![0u8; econ.r()];
    for (i, &t) in econ.types.iter().enumerate() {
        let s = envelope_slope(t, g, econ.g0, &econ.reservation, &econ.tech);
        if s < -EPS_L {
            part.k.push(i + 1);
            rank[i] = 0;
        } else if s > EPS_L {
            part.m.push(i + 1);
            rank[i] = 2;
        } else {
            part.l.push(i + 1);
            rank[i] = 1;
        }
    }
    let curvature = econ.reservation.curvature();
    let order = type_order(&econ.types);
    let violation = order.windows(2).find(|w| {
        let (a, b) = (rank[w[0]], rank[w[1]]);
        let strictly_higher = econ.types[w[1]] > econ.types[w[0]];
        match curvature {
            Curvature::Concave => strictly_higher && b < a,
            Curvature::Convex => strictly_higher && b > a,
            _ => false,
        }
    });
    if let Some(w) = violation {
        return Err(MechError::ContiguityViolation { curvature: curvature.to_string(), agent: w[1] + 1 });
    }
    Ok(part)
}

/// Shadow distribution γ over one agent's types.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GammaRepresentation {
    /// γ ≡ 1: participation binds at the bottom.
    PointMassAtLow,
    /// γ = 0 below the top: participation binds at the top.
    PointMassAtHigh,
    /// Jump from 0 to 1 at `theta_star`.
    InteriorMass { theta_star: f64 },
    /// γ constant below the top.
    Constant { gamma: f64 },
    /// `(from, to, γ)` on `[from, to)`.
    Piecewise { pieces: Vec<(f64, f64, f64)> },
    /// γ = 0 below `lower`, `F + f·(θ − level)` on `[lower, upper]`, 1 above:
    /// the virtual value is pooled at `level` on the middle interval.
    Pooled { lower: f64, upper: f64, level: f64 },
}

impl GammaRepresentation {
    /// Pooled representation for a common pooling level `c`.
    pub fn pooled(dist: &TypeDistribution, c: f64) -> Self {
        let (lo, hi) = (dist.theta_lo(), dist.theta_hi());
        // hh(θ) ≤ c below `lower`, hl(θ) ≥ c above `upper`
        let lower = if dist.hh(lo) >= c {
            lo
        } else if dist.hh(hi) <= c {
            hi
        } else {
            bisect(|x| dist.hh(x) - c, lo, hi, 1e-13, MAX_BISECTION_ITERS).unwrap_or(lo)
        };
        let upper = if dist.hl(lo) >= c {
            lo
        } else if dist.hl(hi) <= c {
            hi
        } else {
            bisect(|x| dist.hl(x) - c, lo, hi, 1e-13, MAX_BISECTION_ITERS).unwrap_or(hi)
        };
        GammaRepresentation::Pooled { lower, upper, level: c }
    }

    /// γ(θ); equals 1 at the top of the support.
    pub fn value(&self, dist: &TypeDistribution, theta: f64) -> f64 {
        if theta >= dist.theta_hi() {
            return 1.0;
        }
        match self {
            GammaRepresentation::PointMassAtLow => 1.0,
            GammaRepresentation::PointMassAtHigh => 0.0,
            GammaRepresentation::InteriorMass { theta_star } => {
                if theta >= *theta_star {
                    1.0
                } else {
                    0.0
                }
            }
            GammaRepresentation::Constant { gamma } => *gamma,
            GammaRepresentation::Piecewise { pieces } => pieces
                .iter()
                .find(|(a, b, _)| theta >= *a && theta < *b)
                .map(|p| p.2)
                .unwrap_or(1.0),
            GammaRepresentation::Pooled { level, .. } => {
                let (hl, hh) = (dist.hl(theta), dist.hh(theta));
                if hh <= *level {
                    0.0
                } else if hl >= *level {
                    1.0
                } else {
                    (dist.cdf(theta) + dist.pdf(theta) * (theta - level)).clamp(0.0, 1.0)
                }
            }
        }
    }

    /// Virtual value `θ − (γ(θ) − F)/f`, using the left limit of γ at the top.
    pub fn weight(&self, dist: &TypeDistribution, theta: f64) -> f64 {
        match self {
            GammaRepresentation::PointMassAtLow => dist.hl(theta),
            GammaRepresentation::PointMassAtHigh => dist.hh(theta),
            GammaRepresentation::InteriorMass { theta_star } => {
                if theta >= *theta_star {
                    dist.hl(theta)
                } else {
                    dist.hh(theta)
                }
            }
            GammaRepresentation::Constant { gamma } => dist.vv(theta, *gamma),
            GammaRepresentation::Piecewise { pieces } => {
                let g = pieces
                    .iter()
                    .find(|(a, b, _)| theta >= *a && theta < *b)
                    .or_else(|| pieces.last().filter(|p| theta >= p.1))
                    .map(|p| p.2)
                    .unwrap_or(1.0);
                dist.vv(theta, g)
            }
            GammaRepresentation::Pooled { level, .. } => level.clamp(dist.hl(theta), dist.hh(theta)),
        }
    }

    /// γ is a cdf on the grid: values in [0, 1], nondecreasing, 1 at the top.
    pub fn is_valid_cdf(&self, dist: &TypeDistribution, grid_size: usize) -> bool {
        let grid = linspace(dist.theta_lo(), dist.theta_hi(), grid_size.max(3));
        let vals: Vec<f64> = grid.iter().map(|&x| self.value(dist, x)).collect();
        let in_range = vals.iter().all(|v| (-1e-12..=1.0 + 1e-12).contains(v));
        let monotone = vals.windows(2).all(|w| w[1] >= w[0] - 1e-9);
        in_range && monotone && (vals[vals.len() - 1] - 1.0).abs() < 1e-12
    }
}

/// Per-agent shadow distributions (`gammas[k]` belongs to agent `k + 1`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Shadow {
    pub gammas: Vec<GammaRepresentation>,
}

impl Shadow {
    pub fn uniform(gamma: GammaRepresentation, r: usize) -> Self {
        Self { gammas: vec![gamma; r] }
    }

    /// `θ_a + Σ_i (θ_i − (γ_i(θ_i) − F_i)/f_i)` at the realized profile.
    pub fn total_weight(&self, econ: &Economy) -> f64 {
        econ.theta_a
            + econ
                .types
                .iter()
                .zip(&econ.dists)
                .zip(&self.gammas)
                .map(|((&t, d), gm)| gm.weight(d, t))
                .sum::<f64>()
    }
}

/// Pointwise virtual surplus `W·φ(g) − g`.
pub fn sigma(econ: &Economy, shadow: &Shadow, g: f64) -> f64 {
    shadow.total_weight(econ) * econ.phi(g) - g
}

pub fn xi_argmax(econ: &Economy, shadow: &Shadow) -> Result<f64> {
    econ.tech.xi(shadow.total_weight(econ))
}

/// Utilitarian first-best level solving `Σθ·φ'(g) = 1`.
pub fn efficient_level(econ: &Economy) -> Result<f64> {
    econ.tech.xi(econ.theta_a + econ.types.iter().sum::<f64>())
}

/// Integrand samples of `R_i(γ)` for one agent on a window.
struct RKernel {
    hl: Vec<f64>,
    hh: Vec<f64>,
    vbar: Vec<f64>,
    coef: Vec<f64>,
}

impl RKernel {
    fn new(econ: &Economy, agent: usize, window: (f64, f64)) -> Self {
        let (a, b) = window;
        let n = R_PANELS;
        let nodes = linspace(a, b, n + 1);
        let h = (b - a) / n as f64;
        let d = &econ.dists[agent];
        let coef = (0..=n)
            .map(|k| {
                let w = if k == 0 || k == n {
                    1.0
                } else if k % 2 == 1 {
                    4.0
                } else {
                    2.0
                };
                w * h / 3.0
            })
            .collect();
        Self {
            hl: nodes.iter().map(|&x| d.hl(x)).collect(),
            hh: nodes.iter().map(|&x| d.hh(x)).collect(),
            vbar: nodes.iter().map(|&x| econ.v_bar_dtheta(x)).collect(),
            coef,
        }
    }

    /// `∫ φ(ξ(base + w_γ(x))) − v̄'(x) dx` with `w_γ = γ·hl + (1−γ)·hh`.
    fn eval(&self, tech: &Technology, base: f64, gamma: f64) -> Result<f64> {
        let mut acc = 0.0;
        for k in 0..self.coef.len() {
            let w = base + gamma * self.hl[k] + (1.0 - gamma) * self.hh[k];
            acc += self.coef[k] * (tech.phi(tech.xi(w)?) - self.vbar[k]);
        }
        Ok(acc)
    }
}

fn check_window(econ: &Economy, window: (f64, f64)) -> Result<()> {
    let (a, b) = window;
    if !(a < b) || a < econ.theta_lo() - 1e-12 || b > econ.theta_hi() + 1e-12 {
        return Err(MechError::Precondition(format!("window [{a}, {b}] is not inside the support")));
    }
    Ok(())
}

/// Three-branch solution of a decreasing `R` on `[lo, hi]`.
fn solve_decreasing<F>(mut r: F, lo: f64, hi: f64) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    let probes: Vec<f64> = linspace(lo, hi, 5);
    let mut vals = [0.0; 5];
    for (v, &p) in vals.iter_mut().zip(&probes) {
        *v = r(p)?;
    }
    let scale = 1e-9 * (1.0 + vals[0].abs().max(vals[4].abs()));
    if vals.windows(2).any(|w| w[1] > w[0] + scale) {
        return Err(MechError::BracketFailure { lo, hi, f_lo: vals[0], f_hi: vals[4] });
    }
    if vals[4] >= 0.0 {
        return Ok(hi);
    }
    if vals[0] <= 0.0 {
        return Ok(lo);
    }
    let mut err = None;
    let g = bisect(
        |x| match r(x) {
            Ok(v) => v,
            Err(e) => {
                err = Some(e);
                0.0
            }
        },
        lo,
        hi,
        GAMMA_TOL,
        MAX_BISECTION_ITERS,
    )?;
    match err {
        Some(e) => Err(e),
        None => Ok(g),
    }
}

/// Admissible range of a constant γ on a window: `[F(a), F(b)]`, which is
/// `[0, 1]` on the full support.
pub fn gamma_bounds(econ: &Economy, window: (f64, f64)) -> (f64, f64) {
    let lo = econ.dists.iter().map(|d| d.cdf(window.0)).fold(f64::INFINITY, f64::min);
    let hi = econ.dists.iter().map(|d| d.cdf(window.1)).fold(f64::NEG_INFINITY, f64::max);
    (lo, hi)
}

/// Common constant γ with `Σ_i R_i(γ) = 0`. `R_i` integrates agent i's
/// envelope slope across the window with the other agents held at their
/// realized virtual values.
pub fn gamma_star_constant(econ: &Economy, theta_window: (f64, f64)) -> Result<f64> {
    if econ.reservation.curvature() != Curvature::Convex {
        return Err(MechError::Precondition("constant shadow distribution needs a convex profile".into()));
    }
    econ.check()?;
    check_window(econ, theta_window)?;
    let kernels: Vec<RKernel> = (0..econ.r()).map(|i| RKernel::new(econ, i, theta_window)).collect();
    let total = |gamma: f64| -> Result<f64> {
        let weights: Vec<f64> = econ.types.iter().zip(&econ.dists).map(|(&t, d)| d.vv(t, gamma)).collect();
        let all: f64 = econ.theta_a + weights.iter().sum::<f64>();
        let mut acc = 0.0;
        for (i, k) in kernels.iter().enumerate() {
            acc += k.eval(&econ.tech, all - weights[i], gamma)?;
        }
        Ok(acc)
    };
    let (lo, hi) = gamma_bounds(econ, theta_window);
    solve_decreasing(total, lo, hi)
}

/// `R_i(γ)` for agent index `i` (0-based) with every other agent at its
/// realized virtual value under `gammas`.
pub fn rent_residual(econ: &Economy, gammas: &[f64], agent: usize, window: (f64, f64), gamma: f64) -> Result<f64> {
    let kernel = RKernel::new(econ, agent, window);
    let base = econ.theta_a
        + econ
            .types
            .iter()
            .zip(&econ.dists)
            .zip(gammas)
            .enumerate()
            .filter(|(j, _)| *j != agent)
            .map(|(_, ((&t, d), &g))| d.vv(t, g))
            .sum::<f64>();
    kernel.eval(&econ.tech, base, gamma)
}
