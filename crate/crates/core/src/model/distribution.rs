use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use statrs::function::erf::erf;

use crate::error::{MechError, Result};

/// Slack allowed when a type sits a rounding error outside the support.
const SUPPORT_EPS: f64 = 1e-12;

pub type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Parametric family of a type distribution.
#[derive(Clone)]
pub enum DistKind {
    Uniform,
    /// Density proportional to `exp(-rate * (θ - lo))`; `rate` may be negative.
    TruncatedExponential { rate: f64 },
    TruncatedNormal { mean: f64, sd: f64 },
    Custom { cdf: ScalarFn, pdf: ScalarFn },
}

impl fmt::Debug for DistKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DistKind::Uniform => write!(f, "Uniform"),
            DistKind::TruncatedExponential { rate } => {
                write!(f, "TruncatedExponential {{ rate: {rate} }}")
            }
            DistKind::TruncatedNormal { mean, sd } => {
                write!(f, "TruncatedNormal {{ mean: {mean}, sd: {sd} }}")
            }
            DistKind::Custom { .. } => write!(f, "Custom"),
        }
    }
}

/// Serializable description of the built-in families.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DistSpec {
    Uniform,
    TruncatedExponential { rate: f64 },
    TruncatedNormal { mean: f64, sd: f64 },
}

/// A continuous type distribution on `[lo, hi]`.
#[derive(Clone, Debug)]
pub struct TypeDistribution {
    lo: f64,
    hi: f64,
    kind: DistKind,
    // normal-family constants: Φ(a), Φ(b) - Φ(a)
    norm_base: f64,
    norm_mass: f64,
}

fn std_normal_cdf(z: f64) -> f64 {
    0.5 * (1.0 + erf(z / std::f64::consts::SQRT_2))
}

fn std_normal_pdf(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

impl TypeDistribution {
    fn check_support(lo: f64, hi: f64) -> Result<()> {
        if !(lo.is_finite() && hi.is_finite()) || lo < 0.0 || hi <= lo {
            return Err(MechError::InvalidEconomy(format!(
                "type support [{lo}, {hi}] must satisfy 0 <= lo < hi"
            )));
        }
        Ok(())
    }

    pub fn uniform(lo: f64, hi: f64) -> Result<Self> {
        Self::check_support(lo, hi)?;
        Ok(Self { lo, hi, kind: DistKind::Uniform, norm_base: 0.0, norm_mass: 1.0 })
    }

    pub fn truncated_exponential(lo: f64, hi: f64, rate: f64) -> Result<Self> {
        Self::check_support(lo, hi)?;
        if rate == 0.0 {
            return Self::uniform(lo, hi);
        }
        if !rate.is_finite() {
            return Err(MechError::InvalidEconomy("exponential rate must be finite".into()));
        }
        Ok(Self {
            lo,
            hi,
            kind: DistKind::TruncatedExponential { rate },
            norm_base: 0.0,
            norm_mass: 1.0,
        })
    }

    pub fn truncated_normal(lo: f64, hi: f64, mean: f64, sd: f64) -> Result<Self> {
        Self::check_support(lo, hi)?;
        if !(sd > 0.0 && sd.is_finite() && mean.is_finite()) {
            return Err(MechError::InvalidEconomy("normal sd must be positive".into()));
        }
        let a = std_normal_cdf((lo - mean) / sd);
        let b = std_normal_cdf((hi - mean) / sd);
        if b - a < 1e-12 {
            return Err(MechError::InvalidEconomy(
                "truncated normal has no mass on the support".into(),
            ));
        }
        Ok(Self {
            lo,
            hi,
            kind: DistKind::TruncatedNormal { mean, sd },
            norm_base: a,
            norm_mass: b - a,
        })
    }

    /// User-supplied `(F, f)` pair; checked by the economy validator, not here.
    pub fn custom<C, P>(lo: f64, hi: f64, cdf: C, pdf: P) -> Result<Self>
    where
        C: Fn(f64) -> f64 + Send + Sync + 'static,
        P: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self::check_support(lo, hi)?;
        Ok(Self {
            lo,
            hi,
            kind: DistKind::Custom { cdf: Arc::new(cdf), pdf: Arc::new(pdf) },
            norm_base: 0.0,
            norm_mass: 1.0,
        })
    }

    pub fn from_spec(spec: &DistSpec, lo: f64, hi: f64) -> Result<Self> {
        match *spec {
            DistSpec::Uniform => Self::uniform(lo, hi),
            DistSpec::TruncatedExponential { rate } => Self::truncated_exponential(lo, hi, rate),
            DistSpec::TruncatedNormal { mean, sd } => Self::truncated_normal(lo, hi, mean, sd),
        }
    }

    pub fn spec(&self) -> Option<DistSpec> {
        match self.kind {
            DistKind::Uniform => Some(DistSpec::Uniform),
            DistKind::TruncatedExponential { rate } => Some(DistSpec::TruncatedExponential { rate }),
            DistKind::TruncatedNormal { mean, sd } => Some(DistSpec::TruncatedNormal { mean, sd }),
            DistKind::Custom { .. } => None,
        }
    }

    pub fn kind(&self) -> &DistKind {
        &self.kind
    }

    pub fn theta_lo(&self) -> f64 {
        self.lo
    }

    pub fn theta_hi(&self) -> f64 {
        self.hi
    }

    /// Returns `theta` snapped onto the support, or a domain error.
    pub fn in_support(&self, theta: f64) -> Result<f64> {
        if theta.is_nan() || theta < self.lo - SUPPORT_EPS || theta > self.hi + SUPPORT_EPS {
            return Err(MechError::Domain { theta, lo: self.lo, hi: self.hi });
        }
        Ok(theta.clamp(self.lo, self.hi))
    }

    /// CDF; clamps outside the support.
    pub fn cdf(&self, theta: f64) -> f64 {
        if theta <= self.lo {
            return 0.0;
        }
        if theta >= self.hi {
            return 1.0;
        }
        match &self.kind {
            DistKind::Uniform => (theta - self.lo) / (self.hi - self.lo),
            DistKind::TruncatedExponential { rate } => {
                let width = self.hi - self.lo;
                (-rate * (theta - self.lo)).exp_m1() / (-rate * width).exp_m1()
            }
            DistKind::TruncatedNormal { mean, sd } => {
                (std_normal_cdf((theta - mean) / sd) - self.norm_base) / self.norm_mass
            }
            DistKind::Custom { cdf, .. } => cdf(theta),
        }
    }

    /// Density on the support (evaluated at the clamped point outside it).
    pub fn pdf(&self, theta: f64) -> f64 {
        let x = theta.clamp(self.lo, self.hi);
        match &self.kind {
            DistKind::Uniform => 1.0 / (self.hi - self.lo),
            DistKind::TruncatedExponential { rate } => {
                let width = self.hi - self.lo;
                -rate * (-rate * (x - self.lo)).exp() / (-rate * width).exp_m1()
            }
            DistKind::TruncatedNormal { mean, sd } => {
                std_normal_pdf((x - mean) / sd) / (sd * self.norm_mass)
            }
            DistKind::Custom { pdf, .. } => pdf(x),
        }
    }

    /// `(1 - F) / f`.
    pub fn upper_mills(&self, theta: f64) -> f64 {
        if theta >= self.hi {
            return 0.0;
        }
        match self.kind {
            // closed forms avoid cancellation near the top of the support
            DistKind::Uniform => self.hi - theta,
            DistKind::TruncatedExponential { rate } => {
                -(-rate * (self.hi - theta)).exp_m1() / rate
            }
            _ => (1.0 - self.cdf(theta)) / self.pdf(theta),
        }
    }

    /// `F / f`.
    pub fn lower_mills(&self, theta: f64) -> f64 {
        if theta <= self.lo {
            return 0.0;
        }
        match self.kind {
            DistKind::Uniform => theta - self.lo,
            DistKind::TruncatedExponential { rate } => (rate * (theta - self.lo)).exp_m1() / rate,
            _ => self.cdf(theta) / self.pdf(theta),
        }
    }

    /// `θ − (1−F)/f`, without the support check.
    pub fn hl(&self, theta: f64) -> f64 {
        theta - self.upper_mills(theta)
    }

    /// `θ + F/f`, without the support check.
    pub fn hh(&self, theta: f64) -> f64 {
        theta + self.lower_mills(theta)
    }

    pub fn hazard_low(&self, theta: f64) -> Result<f64> {
        let x = self.in_support(theta)?;
        Ok(self.hl(x))
    }

    pub fn hazard_high(&self, theta: f64) -> Result<f64> {
        let x = self.in_support(theta)?;
        Ok(self.hh(x))
    }

    /// `θ − (γ − F)/f`; equals `hazard_low` at γ = 1 and `hazard_high` at γ = 0.
    pub fn virtual_value(&self, theta: f64, gamma: f64) -> Result<f64> {
        let x = self.in_support(theta)?;
        if !(0.0..=1.0).contains(&gamma) {
            return Err(MechError::Precondition(format!("gamma {gamma} outside [0, 1]")));
        }
        Ok(self.vv(x, gamma))
    }

    /// Unchecked virtual value, written as a mixture of the two hazard terms.
    pub fn vv(&self, theta: f64, gamma: f64) -> f64 {
        gamma * self.hl(theta) + (1.0 - gamma) * self.hh(theta)
    }
}

pub fn hazard_low(dist: &TypeDistribution, theta: f64) -> Result<f64> {
    dist.hazard_low(theta)
}

pub fn hazard_high(dist: &TypeDistribution, theta: f64) -> Result<f64> {
    dist.hazard_high(theta)
}

pub fn virtual_value_gamma(dist: &TypeDistribution, theta: f64, gamma_at: f64) -> Result<f64> {
    dist.virtual_value(theta, gamma_at)
}
