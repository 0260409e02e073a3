//! Committed direct mechanisms: an allocation rule over report profiles
//! plus envelope transfers normalized on committed rent windows.
//!
//! Agent `i` (0-based index into the report vector) pays
//! `t_i(x) = x·φ(g(x)) − Φ_i(x) − v̄(θ_lo) + m_i`, where
//! `Φ_i(x) = ∫_{θ_lo}^x φ(g(y, r_{−i})) dy` and `m_i` is the minimum of
//! `J_i = Φ_i − v̄ + v̄(θ_lo)` over agent i's window. The rent is then
//! `J_i − m_i`: zero at the window's binding type and nonnegative across
//! the window. `m_i` never depends on agent i's own report.

use serde::{Deserialize, Serialize};

use crate::model::Economy;
use crate::numerics::adaptive_simpson;
use crate::solver_core::GammaRepresentation;

/// Tolerance handed to adaptive Simpson per integration segment.
const QUAD_TOL: f64 = 1e-13;
const QUAD_DEPTH: u32 = 40;
/// Samples per window interval when locating rent minima.
const MIN_SAMPLES: usize = 96;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BunchingCap {
    /// Provision never crosses the efficient level in bunching regimes.
    #[default]
    Efficient,
    /// Plain threshold formulas.
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Low,
    High,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AllocationRule {
    /// Order-statistic thresholds `g_L`, `g_H` with the status-quo branch:
    /// `g_L` if `g° ≤ g_L`, otherwise `min(g°, g_H)`.
    Linear { slots: usize, excluded: usize, cap: BunchingCap },
    /// One side of the order-statistic rule, ignoring the status quo.
    Bunched { side: Side, slots: usize, excluded: usize, cap: BunchingCap },
    /// `g = ξ(θ_a + Σ_i w_i(r_i))` with committed shadow distributions.
    Shadow { gammas: Vec<GammaRepresentation> },
    /// Report-independent level.
    Posted { g: f64 },
}

/// Rent window of one agent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Window {
    Full,
    /// `[c, θ_hi]` with `c` the `slots`-th largest report among the others
    /// (`θ_lo` if there are fewer others than slots, `θ_hi` if `slots = 0`).
    AboveOthersCut { slots: usize },
    /// `[θ_lo, c]` with `c` the `slots`-th smallest report among the others.
    BelowOthersCut { slots: usize },
    Intervals { parts: Vec<(f64, f64)> },
}

/// Threshold levels of the order-statistic rule at one report profile.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrderStatLevels {
    pub g_low: f64,
    pub g_high: f64,
    pub cutoff_low: f64,
    pub cutoff_high: f64,
}

/// What a verifier needs from a direct mechanism. Agents are indexed
/// 0-based by position in the report vector.
pub trait Mechanism: Sync {
    fn agents(&self) -> usize;
    fn support(&self) -> (f64, f64);
    fn realized(&self) -> &[f64];
    fn theta_a(&self) -> f64;
    fn phi(&self, g: f64) -> f64;
    fn reservation(&self, agent: usize, theta: f64) -> f64;
    fn allocation(&self, reports: &[f64]) -> f64;
    /// Transfers of `agent` when it reports each point of `own` and the
    /// others report as in `reports`.
    fn transfers_along(&self, agent: usize, reports: &[f64], own: &[f64]) -> Vec<f64>;

    fn transfer(&self, agent: usize, reports: &[f64]) -> f64 {
        self.transfers_along(agent, reports, &[reports[agent]])[0]
    }

    /// Residual payment of the agenda-setter; the resource constraint binds.
    fn agenda_transfer(&self, reports: &[f64]) -> f64 {
        let paid: f64 = (0..self.agents()).map(|i| self.transfer(i, reports)).sum();
        self.allocation(reports) - paid
    }
}

/// Mechanism built from an economy, an allocation rule and rent windows.
#[derive(Debug, Clone)]
pub struct DirectMechanism {
    pub econ: Economy,
    pub rule: AllocationRule,
    pub windows: Vec<Window>,
}

fn desc_order(reports: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..reports.len()).collect();
    idx.sort_by(|&a, &b| reports[b].total_cmp(&reports[a]).then(a.cmp(&b)));
    idx
}

fn asc_order(reports: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..reports.len()).collect();
    idx.sort_by(|&a, &b| reports[a].total_cmp(&reports[b]).then(a.cmp(&b)));
    idx
}

impl DirectMechanism {
    pub fn new(econ: Economy, rule: AllocationRule, windows: Vec<Window>) -> Self {
        Self { econ, rule, windows }
    }

    fn xi(&self, w: f64) -> f64 {
        // built-in technologies are closed form; custom ones were checked at solve time
        self.econ.tech.xi(w).unwrap_or(0.0)
    }

    pub fn efficient_at(&self, reports: &[f64]) -> f64 {
        self.xi(self.econ.theta_a + reports.iter().sum::<f64>())
    }

    /// Uncapped and capped order-statistic thresholds at a profile.
    pub fn order_stat_levels(&self, reports: &[f64], slots: usize, excluded: usize, cap: BunchingCap) -> OrderStatLevels {
        let e = &self.econ;
        let m = slots.min(reports.len());
        let desc = desc_order(reports);
        let cutoff_low = if m == 0 { e.theta_hi() } else { reports[desc[m - 1]] };
        let w_low = e.theta_a
            + excluded as f64 * cutoff_low
            + desc[..m].iter().map(|&j| e.dists[j].hl(reports[j])).sum::<f64>();
        let asc = asc_order(reports);
        let cutoff_high = if m == 0 { e.theta_lo() } else { reports[asc[m - 1]] };
        let w_high = e.theta_a
            + excluded as f64 * cutoff_high
            + asc[..m].iter().map(|&j| e.dists[j].hh(reports[j])).sum::<f64>();
        let (mut g_low, mut g_high) = (self.xi(w_low), self.xi(w_high));
        if cap == BunchingCap::Efficient {
            let eff = self.efficient_at(reports);
            g_low = g_low.min(eff);
            g_high = g_high.max(eff);
        }
        OrderStatLevels { g_low, g_high, cutoff_low, cutoff_high }
    }

    fn alloc(&self, reports: &[f64]) -> f64 {
        match &self.rule {
            AllocationRule::Linear { slots, excluded, cap } => {
                let lv = self.order_stat_levels(reports, *slots, *excluded, *cap);
                let g0 = self.econ.g0;
                if g0 <= lv.g_low {
                    lv.g_low
                } else {
                    g0.min(lv.g_high)
                }
            }
            AllocationRule::Bunched { side, slots, excluded, cap } => {
                let lv = self.order_stat_levels(reports, *slots, *excluded, *cap);
                match side {
                    Side::Low => lv.g_low,
                    Side::High => lv.g_high,
                }
            }
            AllocationRule::Shadow { gammas } => {
                let w = self.econ.theta_a
                    + reports
                        .iter()
                        .zip(&self.econ.dists)
                        .zip(gammas)
                        .map(|((&x, d), gm)| gm.weight(d, x))
                        .sum::<f64>();
                self.xi(w)
            }
            AllocationRule::Posted { g } => *g,
        }
    }

    fn phi_along(&self, agent: usize, reports: &[f64], x: f64) -> f64 {
        let mut r = reports.to_vec();
        r[agent] = x;
        self.econ.phi(self.alloc(&r))
    }

    fn slope_along(&self, agent: usize, reports: &[f64], x: f64) -> f64 {
        self.phi_along(agent, reports, x) - self.econ.v_bar_dtheta(x)
    }

    /// Intervals making up agent `agent`'s window at the others' reports.
    pub fn window_parts(&self, agent: usize, reports: &[f64]) -> Vec<(f64, f64)> {
        let (lo, hi) = (self.econ.theta_lo(), self.econ.theta_hi());
        let others = || reports.iter().enumerate().filter(|(j, _)| *j != agent).map(|(_, &x)| x);
        match &self.windows[agent] {
            Window::Full => vec![(lo, hi)],
            Window::AboveOthersCut { slots } => {
                let mut o: Vec<f64> = others().collect();
                o.sort_by(|a, b| b.total_cmp(a));
                let c = if *slots == 0 {
                    hi
                } else if o.len() < *slots {
                    lo
                } else {
                    o[*slots - 1]
                };
                vec![(c, hi)]
            }
            Window::BelowOthersCut { slots } => {
                let mut o: Vec<f64> = others().collect();
                o.sort_by(f64::total_cmp);
                let c = if *slots == 0 {
                    lo
                } else if o.len() < *slots {
                    hi
                } else {
                    o[*slots - 1]
                };
                vec![(lo, c)]
            }
            Window::Intervals { parts } => parts.clone(),
        }
    }

    /// `Φ_i` at sorted points `xs`, integrating segment by segment from `θ_lo`.
    fn cumulative_phi(&self, agent: usize, reports: &[f64], xs: &[f64]) -> Vec<f64> {
        let mut out = Vec::with_capacity(xs.len());
        let mut acc = 0.0;
        let mut prev = self.econ.theta_lo();
        let f = |y: f64| self.phi_along(agent, reports, y);
        for &x in xs {
            if x > prev {
                acc += adaptive_simpson(&f, prev, x, QUAD_TOL, QUAD_DEPTH);
                prev = x;
            }
            out.push(acc);
        }
        out
    }

    /// Binding types of agent `agent`'s window and `m_i = min_W J_i`.
    pub fn rent_floor(&self, agent: usize, reports: &[f64]) -> (f64, f64) {
        let parts = self.window_parts(agent, reports);
        let mut cands: Vec<f64> = Vec::new();
        for &(a, b) in &parts {
            cands.push(a);
            cands.push(b);
            if b <= a {
                continue;
            }
            let step = (b - a) / MIN_SAMPLES as f64;
            let mut xa = a;
            let mut sa = self.slope_along(agent, reports, xa);
            for k in 1..=MIN_SAMPLES {
                let xb = if k == MIN_SAMPLES { b } else { a + step * k as f64 };
                let sb = self.slope_along(agent, reports, xb);
                if sa < 0.0 && sb >= 0.0 {
                    let (mut l, mut r) = (xa, xb);
                    for _ in 0..60 {
                        let mid = 0.5 * (l + r);
                        if self.slope_along(agent, reports, mid) < 0.0 {
                            l = mid;
                        } else {
                            r = mid;
                        }
                    }
                    cands.push(0.5 * (l + r));
                }
                xa = xb;
                sa = sb;
            }
        }
        // the committed realized type is a legitimate extra candidate
        let own = self.econ.types[agent];
        if parts.iter().any(|&(a, b)| own >= a && own <= b) {
            cands.push(own);
        }
        cands.sort_by(f64::total_cmp);
        cands.dedup();
        let phis = self.cumulative_phi(agent, reports, &cands);
        let v_lo = self.econ.v_bar(self.econ.theta_lo());
        let mut best = (cands[0], f64::INFINITY);
        for (x, p) in cands.iter().zip(phis) {
            let j = p - self.econ.v_bar(*x) + v_lo;
            if j < best.1 {
                best = (*x, j);
            }
        }
        best
    }
}

impl Mechanism for DirectMechanism {
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
        self.alloc(reports)
    }

    fn transfers_along(&self, agent: usize, reports: &[f64], own: &[f64]) -> Vec<f64> {
        let (_, floor) = self.rent_floor(agent, reports);
        let v_lo = self.econ.v_bar(self.econ.theta_lo());
        let mut order: Vec<usize> = (0..own.len()).collect();
        order.sort_by(|&a, &b| own[a].total_cmp(&own[b]));
        let sorted: Vec<f64> = order.iter().map(|&k| own[k]).collect();
        let phis = self.cumulative_phi(agent, reports, &sorted);
        let mut out = vec![0.0; own.len()];
        for (pos, &k) in order.iter().enumerate() {
            let x = own[k];
            out[k] = x * self.phi_along(agent, reports, x) - phis[pos] - v_lo + floor;
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ReservationProfile, Technology, TypeDistribution};
    use approx::assert_abs_diff_eq;

    fn econ(types: Vec<f64>, g0: f64) -> Economy {
        Economy::new(0.5, types, TypeDistribution::uniform(0.0, 1.0).unwrap(), Technology::log(), ReservationProfile::linear())
            .with_outside_g(g0)
    }

    #[test]
    fn posted_level_charges_the_per_capita_tax() {
        let e = econ(vec![0.3, 0.7], 0.6);
        let m = DirectMechanism::new(e, AllocationRule::Posted { g: 0.6 }, vec![Window::Full; 2]);
        for x in [0.0, 0.4, 1.0] {
            assert_abs_diff_eq!(m.transfer(0, &[x, 0.7]), 0.2, epsilon = 1e-12);
        }
        assert_abs_diff_eq!(m.agenda_transfer(&[0.3, 0.7]), 0.2, epsilon = 1e-12);
    }

    #[test]
    fn order_statistics_reproduce_the_majority_example() {
        let e = econ(vec![0.2, 0.8], 0.0).with_quota(2);
        let m = DirectMechanism::new(e, AllocationRule::Linear { slots: 1, excluded: 1, cap: BunchingCap::None }, vec![Window::Full; 2]);
        let lv = m.order_stat_levels(&[0.2, 0.8], 1, 1, BunchingCap::None);
        assert_abs_diff_eq!(lv.g_low, 0.9, epsilon = 1e-12);
        assert_abs_diff_eq!(lv.g_high, 0.1, epsilon = 1e-12);
        assert_eq!(lv.cutoff_low, 0.8);
        assert_eq!(lv.cutoff_high, 0.2);
        let capped = m.order_stat_levels(&[0.2, 0.8], 1, 1, BunchingCap::Efficient);
        assert_abs_diff_eq!(capped.g_low, 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(capped.g_high, 0.5, epsilon = 1e-12);
    }

    #[test]
    fn rent_vanishes_at_the_window_floor() {
        let e = econ(vec![0.8], 0.0);
        let m = DirectMechanism::new(
            e.clone(),
            AllocationRule::Linear { slots: 1, excluded: 0, cap: BunchingCap::Efficient },
            vec![Window::AboveOthersCut { slots: 1 }],
        );
        let t = m.transfers_along(0, &[0.8], &[0.0, 0.8]);
        // at θ_lo the rent is zero: 0·φ(g) − t = v̄(0) = 0
        assert_abs_diff_eq!(t[0], 0.0, epsilon = 1e-12);
        // g(y) = min(ξ(0.5 + hl(y)), ξ(0.5 + y)) under log technology
        let g = |y: f64| (2.0 * y - 1.5f64).max(0.0).min((y - 0.5f64).max(0.0));
        let integral = crate::numerics::simpson(|y| g(y).ln_1p(), 0.0, 0.8, 4000);
        assert_abs_diff_eq!(t[1], 0.8 * 1.1f64.ln() - integral, epsilon = 1e-6);
    }
}
