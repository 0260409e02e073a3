//! Status-quo thresholds at which agents switch from understating to
//! overstating.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::model::{Curvature, Economy};
use crate::numerics::{monotone_root, SOLVER_TOL};
use crate::solver_core::type_order;

/// Largest status quo searched when locating a ladder step.
const G0_CEILING: f64 = 1e12;

/// One rung of the ladder: above `g_bar` agent `l` overstates and `k`
/// agents overstate in total.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdStep {
    /// `None` when no finite status quo reaches the rung.
    pub g_bar: Option<f64>,
    pub k: usize,
    /// Global id of the agent switching at this rung.
    pub l: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdTable {
    /// Provision when every agent understates.
    pub g_l: f64,
    /// Provision when every agent overstates.
    pub g_h: f64,
    pub intermediate: Vec<ThresholdStep>,
}

/// Ladder of switching points. Concave profiles switch the lowest types
/// first, convex profiles the highest.
pub fn threshold_table(econ: &Economy) -> Result<ThresholdTable> {
    econ.check()?;
    let sum = |high: bool| -> f64 {
        econ.types
            .iter()
            .zip(&econ.dists)
            .map(|(&t, d)| if high { d.hh(t) } else { d.hl(t) })
            .sum()
    };
    let g_l = econ.tech.xi(econ.theta_a + sum(false))?;
    let g_h = econ.tech.xi(econ.theta_a + sum(true))?;
    let order = match econ.reservation.curvature() {
        Curvature::Concave => type_order(&econ.types),
        Curvature::Convex => {
            let mut o = type_order(&econ.types);
            o.reverse();
            o
        }
        Curvature::Linear | Curvature::NegativeSlope => {
            return Ok(ThresholdTable { g_l, g_h, intermediate: Vec::new() })
        }
    };

    let mut intermediate = Vec::with_capacity(order.len());
    let mut overstating = vec![false; econ.r()];
    for (step, &agent) in order.iter().enumerate() {
        let w = econ.theta_a
            + (0..econ.r())
                .map(|j| {
                    let (t, d) = (econ.types[j], &econ.dists[j]);
                    if overstating[j] {
                        d.hh(t)
                    } else {
                        d.hl(t)
                    }
                })
                .sum::<f64>();
        let target = econ.phi(econ.tech.xi(w)?);
        let theta = econ.types[agent];
        let gap = |g0: f64| econ.reservation.v_bar_dtheta(theta, g0, &econ.tech) - target;
        let g_bar = if gap(0.0) >= 0.0 {
            Some(0.0)
        } else {
            let mut hi = 1.0;
            while gap(hi) < 0.0 && hi < G0_CEILING {
                hi *= 2.0;
            }
            (gap(hi) >= 0.0).then(|| monotone_root(gap, 0.0, hi, SOLVER_TOL))
        };
        intermediate.push(ThresholdStep { g_bar, k: step + 1, l: agent + 1 });
        overstating[agent] = true;
    }
    Ok(ThresholdTable { g_l, g_h, intermediate })
}
