use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{MechError, Result};

use super::technology::Technology;

pub type ProfileFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Curvature {
    Linear,
    Concave,
    Convex,
    NegativeSlope,
}

impl fmt::Display for Curvature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Curvature::Linear => "linear",
            Curvature::Concave => "concave",
            Curvature::Convex => "convex",
            Curvature::NegativeSlope => "negative-slope",
        };
        f.write_str(s)
    }
}

#[derive(Clone)]
pub enum ReservationKind {
    /// `θ·φ(g°) − g°/n`: the status quo level financed by equal taxes.
    Linear,
    /// `φ(g°)·(θ + bθ²/2) − g°/n`; concave for b < 0, convex for b > 0.
    Quadratic { curvature: f64 },
    /// `s·φ(g°)·(A − θ)` with `A ≥ θ_hi`.
    NegativeSlope { scale: f64, anchor: f64 },
    /// `(v̄, ∂v̄/∂θ)` supplied by the caller; both take `(θ, g°)`.
    Custom { v_bar: ProfileFn, v_bar_dtheta: ProfileFn },
}

impl fmt::Debug for ReservationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ReservationKind::Linear => write!(f, "Linear"),
            ReservationKind::Quadratic { curvature } => write!(f, "Quadratic {{ curvature: {curvature} }}"),
            ReservationKind::NegativeSlope { scale, anchor } => {
                write!(f, "NegativeSlope {{ scale: {scale}, anchor: {anchor} }}")
            }
            ReservationKind::Custom { .. } => write!(f, "Custom"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ReservationSpec {
    Linear,
    Quadratic { curvature: f64 },
    NegativeSlope { scale: f64, anchor: f64 },
}

/// Type-dependent reservation utility `v̄(θ, g°)`.
#[derive(Clone, Debug)]
pub struct ReservationProfile {
    kind: ReservationKind,
    curvature: Curvature,
}

impl ReservationProfile {
    pub fn linear() -> Self {
        Self { kind: ReservationKind::Linear, curvature: Curvature::Linear }
    }

    pub fn quadratic(b: f64) -> Result<Self> {
        if !b.is_finite() {
            return Err(MechError::InvalidEconomy("quadratic curvature must be finite".into()));
        }
        let curvature = if b < 0.0 {
            Curvature::Concave
        } else if b > 0.0 {
            Curvature::Convex
        } else {
            Curvature::Linear
        };
        Ok(Self { kind: ReservationKind::Quadratic { curvature: b }, curvature })
    }

    pub fn negative_slope(scale: f64, anchor: f64) -> Result<Self> {
        if !(scale > 0.0 && anchor.is_finite()) {
            return Err(MechError::InvalidEconomy("negative-slope profile needs scale > 0".into()));
        }
        Ok(Self {
            kind: ReservationKind::NegativeSlope { scale, anchor },
            curvature: Curvature::NegativeSlope,
        })
    }

    pub fn custom<V, D>(v_bar: V, v_bar_dtheta: D, curvature: Curvature) -> Self
    where
        V: Fn(f64, f64) -> f64 + Send + Sync + 'static,
        D: Fn(f64, f64) -> f64 + Send + Sync + 'static,
    {
        Self {
            kind: ReservationKind::Custom { v_bar: Arc::new(v_bar), v_bar_dtheta: Arc::new(v_bar_dtheta) },
            curvature,
        }
    }

    pub fn from_spec(spec: &ReservationSpec) -> Result<Self> {
        match *spec {
            ReservationSpec::Linear => Ok(Self::linear()),
            ReservationSpec::Quadratic { curvature } => Self::quadratic(curvature),
            ReservationSpec::NegativeSlope { scale, anchor } => Self::negative_slope(scale, anchor),
        }
    }

    pub fn spec(&self) -> Option<ReservationSpec> {
        match self.kind {
            ReservationKind::Linear => Some(ReservationSpec::Linear),
            ReservationKind::Quadratic { curvature } => Some(ReservationSpec::Quadratic { curvature }),
            ReservationKind::NegativeSlope { scale, anchor } => {
                Some(ReservationSpec::NegativeSlope { scale, anchor })
            }
            ReservationKind::Custom { .. } => None,
        }
    }

    /// Overrides the declared curvature class (the validator checks it).
    pub fn with_curvature(mut self, curvature: Curvature) -> Self {
        self.curvature = curvature;
        self
    }

    pub fn kind(&self) -> &ReservationKind {
        &self.kind
    }

    pub fn curvature(&self) -> Curvature {
        self.curvature
    }

    /// `v̄(θ, g°)`; `n` is the tax population sharing the status quo cost.
    pub fn v_bar(&self, theta: f64, g0: f64, tech: &Technology, n: usize) -> f64 {
        match &self.kind {
            ReservationKind::Linear => theta * tech.phi(g0) - g0 / n as f64,
            ReservationKind::Quadratic { curvature } => {
                tech.phi(g0) * (theta + 0.5 * curvature * theta * theta) - g0 / n as f64
            }
            ReservationKind::NegativeSlope { scale, anchor } => scale * tech.phi(g0) * (anchor - theta),
            ReservationKind::Custom { v_bar, .. } => v_bar(theta, g0),
        }
    }

    /// `∂v̄/∂θ (θ, g°)`.
    pub fn v_bar_dtheta(&self, theta: f64, g0: f64, tech: &Technology) -> f64 {
        match &self.kind {
            ReservationKind::Linear => tech.phi(g0),
            ReservationKind::Quadratic { curvature } => tech.phi(g0) * (1.0 + curvature * theta),
            ReservationKind::NegativeSlope { scale, .. } => -scale * tech.phi(g0),
            ReservationKind::Custom { v_bar_dtheta, .. } => v_bar_dtheta(theta, g0),
        }
    }
}
