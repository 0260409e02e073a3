use serde::Serialize;

use crate::numerics::linspace;

use super::economy::Economy;
use super::reservation::Curvature;

/// Points per validation grid.
pub const VALIDATION_GRID: usize = 201;
/// Allowed positive second difference of `ln f`.
pub const LOG_CONCAVITY_TOL: f64 = 1e-7;
const SHAPE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Serialize)]
pub struct AssumptionCheck {
    pub name: &'static str,
    pub passed: bool,
    /// Advisory checks are reported but do not make the economy invalid.
    pub advisory: bool,
    /// Grid point of the first violation.
    pub first_violation: Option<f64>,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    pub checks: Vec<AssumptionCheck>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed || c.advisory)
    }

    pub fn failures(&self) -> Vec<&AssumptionCheck> {
        self.checks.iter().filter(|c| !c.passed && !c.advisory).collect()
    }

    pub fn check(&self, name: &str) -> Option<&AssumptionCheck> {
        self.checks.iter().find(|c| c.name == name)
    }
}

struct Builder {
    checks: Vec<AssumptionCheck>,
}

impl Builder {
    fn push(&mut self, name: &'static str, advisory: bool, first: Option<(f64, String)>) {
        let (first_violation, detail) = match first {
            Some((x, d)) => (Some(x), d),
            None => (None, String::new()),
        };
        self.checks.push(AssumptionCheck {
            name,
            passed: first_violation.is_none(),
            advisory,
            first_violation,
            detail,
        });
    }
}

pub const CHECK_TYPES_IN_SUPPORT: &str = "realized types in support";
pub const CHECK_POSITIVE_DENSITY: &str = "strictly positive density";
pub const CHECK_CDF: &str = "cdf normalized and nondecreasing";
pub const CHECK_LOG_CONCAVE: &str = "log-concave density";
pub const CHECK_TECH_ZERO: &str = "technology vanishes at zero";
pub const CHECK_TECH_SHAPE: &str = "technology nondecreasing and concave";
pub const CHECK_RES_ZERO: &str = "reservation vanishes at zero provision";
pub const CHECK_RES_MONOTONE_G: &str = "reservation nondecreasing in status quo";
pub const CHECK_RES_SLOPE: &str = "reservation slope sign";
pub const CHECK_RES_DERIVATIVE: &str = "reservation derivative consistent";
pub const CHECK_RES_CURVATURE: &str = "declared curvature";

/// Checks the standing assumptions on a 201-point grid per check.
pub fn validate_economy(econ: &Economy) -> ValidationReport {
    let mut b = Builder { checks: Vec::new() };
    let (lo, hi) = (econ.theta_lo(), econ.theta_hi());
    let grid = linspace(lo, hi, VALIDATION_GRID);
    let h = grid[1] - grid[0];

    let first_type = econ
        .types
        .iter()
        .zip(&econ.dists)
        .find(|(t, d)| d.in_support(**t).is_err())
        .map(|(t, _)| (*t, "type outside the support".to_string()));
    b.push(CHECK_TYPES_IN_SUPPORT, false, first_type);

    let mut pos = None;
    let mut cdf = None;
    let mut logc = None;
    for (k, d) in econ.dists.iter().enumerate() {
        let agent = k + 1;
        if pos.is_none() {
            pos = grid
                .iter()
                .find(|&&x| !(d.pdf(x) > 0.0 && d.pdf(x).is_finite()))
                .map(|&x| (x, format!("agent {agent}: f = {}", d.pdf(x))));
        }
        if cdf.is_none() {
            if d.cdf(lo).abs() > 1e-9 || (d.cdf(hi) - 1.0).abs() > 1e-9 {
                cdf = Some((lo, format!("agent {agent}: F(lo) = {}, F(hi) = {}", d.cdf(lo), d.cdf(hi))));
            } else {
                cdf = grid
                    .windows(2)
                    .find(|w| d.cdf(w[1]) < d.cdf(w[0]) - SHAPE_TOL)
                    .map(|w| (w[1], format!("agent {agent}: cdf decreases")));
            }
        }
        if logc.is_none() {
            logc = grid.windows(3).find_map(|w| {
                let d2 = d.pdf(w[0]).ln() - 2.0 * d.pdf(w[1]).ln() + d.pdf(w[2]).ln();
                (d2 > LOG_CONCAVITY_TOL || d2.is_nan())
                    .then(|| (w[1], format!("agent {agent}: second difference of ln f = {d2:e}")))
            });
        }
    }
    b.push(CHECK_POSITIVE_DENSITY, false, pos);
    b.push(CHECK_CDF, false, cdf);
    b.push(CHECK_LOG_CONCAVE, false, logc);

    let tech = &econ.tech;
    let phi0 = tech.phi(0.0);
    b.push(
        CHECK_TECH_ZERO,
        false,
        (phi0.abs() > 1e-12).then(|| (0.0, format!("φ(0) = {phi0}"))),
    );
    let g_top = 10.0 * (econ.g0 + 1.0);
    let ggrid = linspace(0.0, g_top, VALIDATION_GRID);
    let shape = ggrid.windows(2).find_map(|w| {
        if tech.phi(w[1]) < tech.phi(w[0]) - SHAPE_TOL {
            Some((w[1], "φ decreases".to_string()))
        } else if tech.phi_prime(w[1]) > tech.phi_prime(w[0]) + SHAPE_TOL {
            Some((w[1], "φ' increases".to_string()))
        } else {
            None
        }
    });
    b.push(CHECK_TECH_SHAPE, false, shape);

    let res = &econ.reservation;
    let n = econ.n;
    let zero = grid
        .iter()
        .find(|&&x| res.v_bar(x, 0.0, tech, n).abs() > 1e-12)
        .map(|&x| (x, format!("v̄(θ, 0) = {}", res.v_bar(x, 0.0, tech, n))));
    b.push(CHECK_RES_ZERO, false, zero);

    // status-quo grid always includes the economy's own g°
    let mut g0s = linspace(0.0, (2.0 * econ.g0).max(1.0), 21);
    g0s.push(econ.g0);
    g0s.sort_by(f64::total_cmp);

    let mono = grid.iter().find_map(|&x| {
        g0s.windows(2).find_map(|w| {
            let (a, c) = (res.v_bar(x, w[0], tech, n), res.v_bar(x, w[1], tech, n));
            (c < a - SHAPE_TOL).then(|| (x, format!("v̄ falls from g° = {} to {}", w[0], w[1])))
        })
    });
    b.push(CHECK_RES_MONOTONE_G, true, mono);

    let curv = res.curvature();
    let slope = grid.iter().find_map(|&x| {
        g0s.iter().filter(|&&g| g > 0.0).find_map(|&g| {
            let s = res.v_bar_dtheta(x, g, tech);
            let bad = match curv {
                Curvature::NegativeSlope => !(s < 0.0),
                _ => s < -SHAPE_TOL,
            };
            bad.then(|| (x, format!("∂v̄/∂θ = {s} at g° = {g}")))
        })
    });
    b.push(CHECK_RES_SLOPE, false, slope);

    let fd_h = 1e-6 * (hi - lo);
    let deriv = grid[1..grid.len() - 1].iter().find_map(|&x| {
        let g = econ.g0.max(0.5);
        let fd = (res.v_bar(x + fd_h, g, tech, n) - res.v_bar(x - fd_h, g, tech, n)) / (2.0 * fd_h);
        let an = res.v_bar_dtheta(x, g, tech);
        ((fd - an).abs() > 1e-5 * (1.0 + an.abs()))
            .then(|| (x, format!("finite difference {fd} vs derivative {an}")))
    });
    b.push(CHECK_RES_DERIVATIVE, false, deriv);

    let second = grid.windows(3).find_map(|w| {
        g0s.iter().filter(|&&g| g > 0.0).find_map(|&g| {
            let d2 = (res.v_bar(w[0], g, tech, n) - 2.0 * res.v_bar(w[1], g, tech, n)
                + res.v_bar(w[2], g, tech, n))
                / (h * h);
            let bad = match curv {
                Curvature::Concave => d2 > 1e-6,
                Curvature::Convex => d2 < -1e-6,
                Curvature::Linear => d2.abs() > 1e-6,
                Curvature::NegativeSlope => false,
            };
            bad.then(|| (w[1], format!("∂²v̄/∂θ² ≈ {d2:e} for declared {curv} profile")))
        })
    });
    b.push(CHECK_RES_CURVATURE, false, second);

    ValidationReport { checks: b.checks }
}
