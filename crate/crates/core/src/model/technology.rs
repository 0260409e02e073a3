use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{MechError, Result};
use crate::numerics::{bisect, MAX_BISECTION_ITERS, SOLVER_TOL};

use super::distribution::ScalarFn;

/// Upper end of the bracket search for custom technologies.
const MAX_BRACKET: f64 = 1e12;

#[derive(Clone)]
pub enum TechKind {
    /// φ(g) = ln(1 + g)
    Log,
    /// φ(g) = g^α, α ∈ (0, 1)
    Power { alpha: f64 },
    Custom { phi: ScalarFn, phi_prime: ScalarFn },
}

impl fmt::Debug for TechKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TechKind::Log => write!(f, "Log"),
            TechKind::Power { alpha } => write!(f, "Power {{ alpha: {alpha} }}"),
            TechKind::Custom { .. } => write!(f, "Custom"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TechSpec {
    Log,
    Power { alpha: f64 },
}

/// Public-good benefit function φ with φ(0) = 0, nondecreasing and concave.
#[derive(Clone, Debug)]
pub struct Technology {
    kind: TechKind,
}

impl Technology {
    pub fn log() -> Self {
        Self { kind: TechKind::Log }
    }

    pub fn power(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(MechError::InvalidEconomy(format!(
                "power technology needs alpha in (0, 1), got {alpha}"
            )));
        }
        Ok(Self { kind: TechKind::Power { alpha } })
    }

    pub fn custom<P, D>(phi: P, phi_prime: D) -> Self
    where
        P: Fn(f64) -> f64 + Send + Sync + 'static,
        D: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self { kind: TechKind::Custom { phi: Arc::new(phi), phi_prime: Arc::new(phi_prime) } }
    }

    pub fn from_spec(spec: &TechSpec) -> Result<Self> {
        match *spec {
            TechSpec::Log => Ok(Self::log()),
            TechSpec::Power { alpha } => Self::power(alpha),
        }
    }

    pub fn spec(&self) -> Option<TechSpec> {
        match self.kind {
            TechKind::Log => Some(TechSpec::Log),
            TechKind::Power { alpha } => Some(TechSpec::Power { alpha }),
            TechKind::Custom { .. } => None,
        }
    }

    pub fn kind(&self) -> &TechKind {
        &self.kind
    }

    pub fn is_log(&self) -> bool {
        matches!(self.kind, TechKind::Log)
    }

    pub fn phi(&self, g: f64) -> f64 {
        let g = g.max(0.0);
        match &self.kind {
            TechKind::Log => g.ln_1p(),
            TechKind::Power { alpha } => g.powf(*alpha),
            TechKind::Custom { phi, .. } => phi(g),
        }
    }

    pub fn phi_prime(&self, g: f64) -> f64 {
        let g = g.max(0.0);
        match &self.kind {
            TechKind::Log => 1.0 / (1.0 + g),
            TechKind::Power { alpha } => {
                if g == 0.0 {
                    f64::INFINITY
                } else {
                    alpha * g.powf(alpha - 1.0)
                }
            }
            TechKind::Custom { phi_prime, .. } => phi_prime(g),
        }
    }

    /// Maximizer of `W·φ(g) − g` over g ≥ 0.
    pub fn xi(&self, weight: f64) -> Result<f64> {
        if !(weight > 0.0) || weight * self.phi_prime(0.0) <= 1.0 {
            return Ok(0.0);
        }
        match self.kind {
            TechKind::Log => Ok(weight - 1.0),
            TechKind::Power { alpha } => Ok((weight * alpha).powf(1.0 / (1.0 - alpha))),
            TechKind::Custom { .. } => self.xi_bisect(weight),
        }
    }

    /// Bracket-and-bisect solution of `W·φ'(g) = 1`, used for custom
    /// technologies and as a cross-check of the closed forms.
    pub fn xi_bisect(&self, weight: f64) -> Result<f64> {
        if !(weight > 0.0) || weight * self.phi_prime(0.0) <= 1.0 {
            return Ok(0.0);
        }
        let foc = |g: f64| weight * self.phi_prime(g) - 1.0;
        let mut hi = 1.0;
        while foc(hi) > 0.0 {
            hi *= 2.0;
            if hi > MAX_BRACKET {
                return Err(MechError::Unbounded { weight, bound: MAX_BRACKET });
            }
        }
        bisect(foc, 0.0, hi, SOLVER_TOL * 1e-2, MAX_BISECTION_ITERS)
    }

    /// Level `g` with `φ(g) = y`.
    pub fn phi_inverse(&self, y: f64) -> Result<f64> {
        if y <= 0.0 {
            return Ok(0.0);
        }
        match self.kind {
            TechKind::Log => Ok(y.exp_m1()),
            TechKind::Power { alpha } => Ok(y.powf(1.0 / alpha)),
            TechKind::Custom { .. } => {
                let f = |g: f64| self.phi(g) - y;
                let mut hi = 1.0;
                while f(hi) < 0.0 {
                    hi *= 2.0;
                    if hi > MAX_BRACKET {
                        return Err(MechError::Unbounded { weight: y, bound: MAX_BRACKET });
                    }
                }
                bisect(f, 0.0, hi, SOLVER_TOL * 1e-2, MAX_BISECTION_ITERS)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn log_xi_golden_values() {
        let t = Technology::log();
        assert_abs_diff_eq!(t.xi(1.1).unwrap(), 0.1, epsilon = 1e-12);
        assert_abs_diff_eq!(t.xi(2.1).unwrap(), 1.1, epsilon = 1e-12);
        assert_eq!(t.xi(0.9).unwrap(), 0.0);
        assert_eq!(t.xi(-3.0).unwrap(), 0.0);
    }

    #[test]
    fn closed_forms_agree_with_bisection() {
        let techs = [Technology::log(), Technology::power(0.5).unwrap(), Technology::power(0.3).unwrap()];
        for t in &techs {
            for w in [0.2, 1.0, 1.3, 2.7, 5.0] {
                assert_abs_diff_eq!(t.xi(w).unwrap(), t.xi_bisect(w).unwrap(), epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn power_half_with_unit_weight() {
        let t = Technology::power(0.5).unwrap();
        assert_abs_diff_eq!(t.xi(1.0).unwrap(), 0.25, epsilon = 1e-14);
    }

    #[test]
    fn custom_technology_uses_bisection() {
        let t = Technology::custom(|g| 1.0 - (-g).exp(), |g| (-g).exp());
        // W e^{-g} = 1  =>  g = ln W
        assert_abs_diff_eq!(t.xi(3.0).unwrap(), 3f64.ln(), epsilon = 1e-9);
        assert_abs_diff_eq!(t.phi_inverse(0.5).unwrap(), 2f64.ln(), epsilon = 1e-9);
    }

    #[test]
    fn linear_custom_technology_is_unbounded() {
        let t = Technology::custom(|g| g, |_| 1.0);
        assert!(matches!(t.xi(2.0), Err(MechError::Unbounded { .. })));
    }

    #[test]
    fn phi_inverse_round_trips() {
        let t = Technology::log();
        let y = 0.5 * 2f64.ln();
        assert_abs_diff_eq!(t.phi_inverse(y).unwrap(), 2f64.sqrt() - 1.0, epsilon = 1e-14);
    }
}
