use serde::{Deserialize, Serialize};

use crate::error::{MechError, Result};

use super::distribution::TypeDistribution;
use super::reservation::ReservationProfile;
use super::technology::Technology;

/// Repetition parameters for the multi-period extension.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Dynamic {
    pub delta: f64,
    pub horizon: u32,
}

/// Status-quo policy: level `g°` financed by equal per-capita taxes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearOutsideOption {
    pub g_circ: f64,
    pub per_capita_tax: f64,
}

impl LinearOutsideOption {
    pub fn new(g_circ: f64, n: usize) -> Self {
        Self { g_circ, per_capita_tax: g_circ / n as f64 }
    }
}

/// An economy evaluated at a realized type profile.
///
/// Agent ids are global: 0 is the agenda-setter and id `k ≥ 1` refers to
/// `types[k - 1]`.
#[derive(Clone, Debug)]
pub struct Economy {
    /// Number of taxpayers sharing the status-quo cost.
    pub n: usize,
    pub theta_a: f64,
    pub types: Vec<f64>,
    pub dists: Vec<TypeDistribution>,
    pub tech: Technology,
    pub reservation: ReservationProfile,
    pub quota: usize,
    pub g0: f64,
    pub dynamic: Option<Dynamic>,
}

impl Economy {
    /// Unanimity economy at `g° = 0` with one distribution shared by all agents.
    pub fn new(
        theta_a: f64,
        types: Vec<f64>,
        dist: TypeDistribution,
        tech: Technology,
        reservation: ReservationProfile,
    ) -> Self {
        let r = types.len();
        Self {
            n: r + 1,
            theta_a,
            dists: vec![dist; r],
            types,
            tech,
            reservation,
            quota: r + 1,
            g0: 0.0,
            dynamic: None,
        }
    }

    pub fn with_quota(mut self, q: usize) -> Self {
        self.quota = q;
        self
    }

    pub fn with_outside_g(mut self, g0: f64) -> Self {
        self.g0 = g0;
        self
    }

    pub fn with_dists(mut self, dists: Vec<TypeDistribution>) -> Self {
        self.dists = dists;
        self
    }

    pub fn with_population(mut self, n: usize) -> Self {
        self.n = n;
        self
    }

    pub fn with_dynamic(mut self, delta: f64, horizon: u32) -> Self {
        self.dynamic = Some(Dynamic { delta, horizon });
        self
    }

    pub fn with_types(mut self, types: Vec<f64>) -> Self {
        self.types = types;
        self
    }

    /// Number of agents whose types are screened.
    pub fn r(&self) -> usize {
        self.types.len()
    }

    /// Agents in the economy including the agenda-setter.
    pub fn agent_count(&self) -> usize {
        self.types.len() + 1
    }

    pub fn theta_lo(&self) -> f64 {
        self.dists[0].theta_lo()
    }

    pub fn theta_hi(&self) -> f64 {
        self.dists[0].theta_hi()
    }

    pub fn phi(&self, g: f64) -> f64 {
        self.tech.phi(g)
    }

    pub fn v_bar(&self, theta: f64) -> f64 {
        self.reservation.v_bar(theta, self.g0, &self.tech, self.n)
    }

    pub fn v_bar_dtheta(&self, theta: f64) -> f64 {
        self.reservation.v_bar_dtheta(theta, self.g0, &self.tech)
    }

    pub fn status_quo(&self) -> LinearOutsideOption {
        LinearOutsideOption::new(self.g0, self.n)
    }

    /// Same primitives at a different outside option.
    pub fn at_outside_g(&self, g0: f64) -> Self {
        self.clone().with_outside_g(g0)
    }

    /// Structural checks every solver runs before doing any work.
    pub fn check(&self) -> Result<()> {
        let bad = |m: String| Err(MechError::InvalidEconomy(m));
        if self.types.is_empty() {
            return bad("economy needs at least one agent besides the agenda-setter".into());
        }
        if self.dists.len() != self.types.len() {
            return bad(format!(
                "{} distributions for {} agents",
                self.dists.len(),
                self.types.len()
            ));
        }
        if self.n < self.agent_count() {
            return bad(format!("tax population {} below agent count {}", self.n, self.agent_count()));
        }
        if self.quota < 1 || self.quota > self.agent_count() {
            return bad(format!("quota {} outside [1, {}]", self.quota, self.agent_count()));
        }
        if !(self.g0 >= 0.0 && self.g0.is_finite()) {
            return bad(format!("outside option g° = {} must be finite and nonnegative", self.g0));
        }
        if !self.theta_a.is_finite() || self.theta_a < 0.0 {
            return bad(format!("agenda-setter type {} must be nonnegative", self.theta_a));
        }
        let (lo, hi) = (self.theta_lo(), self.theta_hi());
        for (k, d) in self.dists.iter().enumerate() {
            if d.theta_lo() != lo || d.theta_hi() != hi {
                return bad(format!("agent {} has support different from [{lo}, {hi}]", k + 1));
            }
        }
        for (k, (&t, d)) in self.types.iter().zip(&self.dists).enumerate() {
            if d.in_support(t).is_err() {
                return bad(format!("agent {} type {t} outside [{lo}, {hi}]", k + 1));
            }
        }
        if let Some(dy) = self.dynamic {
            if !(0.0..1.0).contains(&dy.delta) || dy.horizon == 0 {
                return bad("dynamic extension needs delta in [0, 1) and horizon >= 1".into());
            }
        }
        Ok(())
    }

    /// Stable text fingerprint of the primitives, used to pair stored
    /// solutions with their economy.
    pub fn fingerprint(&self) -> String {
        let dists: Vec<String> = self
            .dists
            .iter()
            .map(|d| match d.spec() {
                Some(s) => format!("{s:?}"),
                None => "custom".into(),
            })
            .collect();
        let tech = match self.tech.spec() {
            Some(s) => format!("{s:?}"),
            None => "custom".into(),
        };
        let res = match self.reservation.spec() {
            Some(s) => format!("{s:?}/{}", self.reservation.curvature()),
            None => format!("custom/{}", self.reservation.curvature()),
        };
        let types: Vec<String> = self.types.iter().map(|t| format!("{t:e}")).collect();
        format!(
            "n={};a={:e};types=[{}];q={};g0={:e};support=[{:e},{:e}];dists=[{}];tech={};res={}",
            self.n,
            self.theta_a,
            types.join(","),
            self.quota,
            self.g0,
            self.theta_lo(),
            self.theta_hi(),
            dists.join(","),
            tech,
            res
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base() -> Economy {
        Economy::new(
            0.5,
            vec![0.8],
            TypeDistribution::uniform(0.0, 1.0).unwrap(),
            Technology::log(),
            ReservationProfile::linear(),
        )
    }

    #[test]
    fn defaults_to_unanimity() {
        let e = base();
        assert_eq!(e.n, 2);
        assert_eq!(e.quota, 2);
        assert!(e.check().is_ok());
    }

    #[test]
    fn rejects_bad_quota_and_types() {
        assert!(base().with_quota(3).check().is_err());
        assert!(base().with_quota(0).check().is_err());
        assert!(base().with_types(vec![1.2]).check().is_err());
        assert!(base().with_outside_g(-1.0).check().is_err());
    }

    #[test]
    fn fingerprint_tracks_primitives() {
        assert_eq!(base().fingerprint(), base().fingerprint());
        assert_ne!(base().fingerprint(), base().with_outside_g(0.5).fingerprint());
    }

    #[test]
    fn outside_option_tax_is_per_capita() {
        let o = base().with_outside_g(0.6).status_quo();
        assert!((o.per_capita_tax - 0.3).abs() < 1e-15);
    }
}
