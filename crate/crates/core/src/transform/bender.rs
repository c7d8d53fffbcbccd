//! Bender: a straight plate bent into an annular sector by an exponential conformal map.
//!
//! The plate occupies `[0, a] × [0, k·a]`. Its width (`x`) becomes the radial
//! direction and its length (`y`) becomes the polar angle:
//! `r = r1·exp(φx/(ka))`, `θ = φy/(ka)`. Both stretches equal `rφ/(ka)`.

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::material::ParameterSample;
use crate::region::Rect;
use crate::{Error, Point, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenderSpec {
    /// Plate length over plate width.
    pub k: f64,
    /// Plate width.
    pub a: f64,
    /// Bend angle in radians.
    pub phi: f64,
    /// Inner arc radius.
    pub r1: f64,
}

impl Default for BenderSpec {
    fn default() -> Self {
        Self {
            k: 1.0,
            a: 1.0,
            phi: FRAC_PI_2,
            r1: 1.0,
        }
    }
}

impl BenderSpec {
    pub fn new(k: f64, a: f64, phi: f64, r1: f64) -> Result<Self> {
        let spec = Self { k, a, phi, r1 };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.k.is_finite()
            && self.k > 0.0
            && self.a.is_finite()
            && self.a > 0.0
            && self.phi > 0.0
            && self.phi <= std::f64::consts::TAU
            && self.r1.is_finite()
            && self.r1 > 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::Validation(format!(
                "bender spec needs k > 0, a > 0, 0 < phi <= 2π, r1 > 0; got {self:?}"
            )))
        }
    }

    pub fn length(&self) -> f64 {
        self.k * self.a
    }

    /// Outer arc radius `r1·exp(φ/k)`.
    pub fn r2(&self) -> f64 {
        self.r1 * (self.phi / self.k).exp()
    }

    /// The straight plate before bending.
    pub fn plate(&self) -> Rect {
        Rect::new([0.0, self.a], [0.0, self.length()])
    }

    /// Polar coordinates `(r, θ)` of the image of a plate point.
    pub fn polar_image(&self, p: Point) -> (f64, f64) {
        let rate = self.phi / self.length();
        (self.r1 * (rate * p.x).exp(), rate * p.y)
    }

    /// Common radial/tangential stretch at image radius `r`.
    pub fn stretch_at_radius(&self, r: f64) -> f64 {
        r * self.phi / self.length()
    }

    pub fn is_quarter_unit(&self) -> bool {
        (self.phi - FRAC_PI_2).abs() <= 1e-12 && (self.k - 1.0).abs() <= 1e-12
    }
}

/// Published isotropic bender rule: `α' = α`, and `rπ/(2a)` scales `ρ`, `β`, `f`.
/// Stated only for `φ = π/2`, `k = 1`.
pub fn bender_params_paper(
    spec: &BenderSpec,
    base: &ParameterSample,
    point: Point,
) -> Result<ParameterSample> {
    if !spec.is_quarter_unit() {
        return Err(Error::UnsupportedSpec(format!(
            "published bender rule requires phi = π/2 and k = 1, got phi = {}, k = {}",
            spec.phi, spec.k
        )));
    }
    if base.alpha.as_isotropic().is_none() {
        return Err(Error::UnsupportedBase(
            "bender design needs an isotropic base diffusion tensor".into(),
        ));
    }
    let r = point.coords.norm();
    let factor = r * std::f64::consts::PI / (2.0 * spec.a);
    Ok(ParameterSample {
        rho: factor * base.rho,
        alpha: base.alpha,
        beta: factor * base.beta,
        f: factor * base.f,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn unit_radial_factor() {
        let base = ParameterSample::isotropic(1.0, 1.0, 1.0, 0.0).unwrap();
        let spec = BenderSpec::default();
        let s = bender_params_paper(&spec, &base, Point::new(2.0 / PI, 0.0)).unwrap();
        assert_relative_eq!(s.rho, 1.0, epsilon = 1e-15);
        assert_relative_eq!(s.beta, 1.0, epsilon = 1e-15);
        assert_eq!(s.alpha, base.alpha);
        assert_eq!(s.f, 0.0);
    }

    #[test]
    fn doubled_radius() {
        let base = ParameterSample::isotropic(1.0, 1.0, 0.0, 0.0).unwrap();
        let spec = BenderSpec::default();
        let p = Point::new(0.0, 4.0 / PI);
        let s = bender_params_paper(&spec, &base, p).unwrap();
        assert_relative_eq!(s.rho, 2.0, epsilon = 1e-15);
    }

    #[test]
    fn alpha_unchanged_at_every_radius() {
        let base = ParameterSample::isotropic(1.0, 2.5, 0.3, 0.1).unwrap();
        let spec = BenderSpec::default();
        for i in 0..20 {
            let r = 1.0 + 0.2 * i as f64;
            let s = bender_params_paper(&spec, &base, Point::new(r * 0.6, r * 0.8)).unwrap();
            assert_eq!(s.alpha, base.alpha);
        }
    }

    #[test]
    fn rejects_other_angles() {
        let base = ParameterSample::isotropic(1.0, 1.0, 0.0, 0.0).unwrap();
        let spec = BenderSpec::new(1.0, 1.0, 3.0, 1.0).unwrap();
        assert!(matches!(
            bender_params_paper(&spec, &base, Point::new(1.0, 1.0)),
            Err(Error::UnsupportedSpec(_))
        ));
        let spec = BenderSpec::new(2.0, 1.0, FRAC_PI_2, 1.0).unwrap();
        assert!(bender_params_paper(&spec, &base, Point::new(1.0, 1.0)).is_err());
    }

    #[test]
    fn outer_radius() {
        assert_relative_eq!(BenderSpec::default().r2(), FRAC_PI_2.exp(), epsilon = 1e-15);
    }
}
