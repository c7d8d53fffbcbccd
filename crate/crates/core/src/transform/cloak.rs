//! Circular cloak: the disk `r < b` is squeezed radially into the shell `a <= r' <= b`.

use serde::{Deserialize, Serialize};

use super::principal_to_cartesian;
use crate::material::ParameterSample;
use crate::{Error, Point, Result};

/// Default clamp fraction for the inner-boundary singularity.
pub const DEFAULT_EPSILON: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CloakSpec {
    pub center: Point,
    /// Inner radius of the shell.
    pub a: f64,
    /// Outer radius of the shell.
    pub b: f64,
    /// `r' - a` is clamped from below at `epsilon * a` when evaluating shell parameters.
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
}

fn default_epsilon() -> f64 {
    DEFAULT_EPSILON
}

impl CloakSpec {
    pub fn new(center: Point, a: f64, b: f64, epsilon: f64) -> Result<Self> {
        let spec = Self {
            center,
            a,
            b,
            epsilon,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.center.x.is_finite() && self.center.y.is_finite()) {
            return Err(Error::Validation("cloak center must be finite".into()));
        }
        if !(self.a.is_finite() && self.b.is_finite() && 0.0 < self.a && self.a < self.b) {
            return Err(Error::Validation(format!(
                "cloak radii must satisfy 0 < a < b, got a = {}, b = {}",
                self.a, self.b
            )));
        }
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(Error::Validation(format!(
                "cloak epsilon must lie in (0, 1), got {}",
                self.epsilon
            )));
        }
        Ok(())
    }

    /// Original radius `r` to cloaked radius `r'`; identity beyond `b`.
    pub fn radial_map(&self, r: f64) -> f64 {
        if r >= self.b {
            r
        } else {
            self.a + (self.b - self.a) * r / self.b
        }
    }

    /// Cloaked radius `r'` back to `r`; `None` inside the hidden core `r' < a`.
    pub fn radial_inverse(&self, r_prime: f64) -> Option<f64> {
        if r_prime >= self.b {
            Some(r_prime)
        } else if r_prime >= self.a {
            Some((r_prime - self.a) * self.b / (self.b - self.a))
        } else {
            None
        }
    }

    /// Radial and tangential stretch of the forward map at original radius `r`.
    pub fn stretches(&self, r: f64) -> (f64, f64) {
        if r >= self.b {
            (1.0, 1.0)
        } else {
            ((self.b - self.a) / self.b, self.radial_map(r) / r)
        }
    }
}

/// Closed-form shell parameters for an isotropic base medium.
///
/// Principal values along `r̂` and `θ̂` are
/// `α_r = d/r'·α`, `α_θ = r'/d·α`, and `(b/(b−a))²·d/r'` scales `ρ`, `β`, `f`,
/// where `d = max(r' − a, ε·a)`.
pub fn cloak_params(
    spec: &CloakSpec,
    base: &ParameterSample,
    point: Point,
) -> Result<ParameterSample> {
    let alpha = base.alpha.as_isotropic().ok_or_else(|| {
        Error::UnsupportedBase("cloak design needs an isotropic base diffusion tensor".into())
    })?;
    let rel = point - spec.center;
    let r_prime = rel.norm();
    if r_prime > spec.b {
        return Ok(*base);
    }
    if r_prime < spec.a {
        return Err(Error::domain(point, "inside the cloaked core r' < a"));
    }
    let d = (r_prime - spec.a).max(spec.epsilon * spec.a);
    let alpha_r = d / r_prime * alpha;
    let alpha_theta = r_prime / d * alpha;
    let ratio = spec.b / (spec.b - spec.a);
    let scale = ratio * ratio * d / r_prime;
    Ok(ParameterSample {
        rho: scale * base.rho,
        alpha: principal_to_cartesian(alpha_r, alpha_theta, rel.y.atan2(rel.x)),
        beta: scale * base.beta,
        f: scale * base.f,
    })
}
