//! Coordinate maps, their Jacobians, and the push-forward of material parameters.
//!
//! Under an orientation-preserving map `x' = x'(x)` with Jacobian
//! `A_ij = ∂x'_i/∂x_j`, the diffusion-reaction equation keeps its form when
//!
//! ```text
//! α' = A α Aᵀ / det A,   ρ' = ρ / det A,   β' = β / det A,   f' = f / det A,
//! ```
//!
//! and the field itself is carried over unchanged, `u'(x'(x)) = u(x)`.

mod bender;
mod cloak;

use std::fmt;
use std::sync::Arc;

use nalgebra::{Matrix2, Vector2};
use serde::{Deserialize, Serialize};

pub use bender::{bender_params_paper, BenderSpec};
pub use cloak::{cloak_params, CloakSpec, DEFAULT_EPSILON};

use crate::material::{ParameterSample, SymTensor2};
use crate::region::Rect;
use crate::{Error, Point, Result};

/// Relative step (of the domain diagonal) for central-difference Jacobians.
pub const FD_RELATIVE_STEP: f64 = 1e-6;

/// User-supplied forward map on a bounded domain. Its Jacobian comes from
/// central differences.
#[derive(Clone)]
pub struct CustomMap {
    forward: Arc<dyn Fn(Point) -> Point + Send + Sync>,
    domain: Rect,
}

impl CustomMap {
    pub fn new(domain: Rect, forward: impl Fn(Point) -> Point + Send + Sync + 'static) -> Self {
        Self {
            forward: Arc::new(forward),
            domain,
        }
    }
}

impl fmt::Debug for CustomMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomMap")
            .field("domain", &self.domain)
            .finish_non_exhaustive()
    }
}

impl PartialEq for CustomMap {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.forward, &other.forward) && self.domain == other.domain
    }
}

/// A differentiable, orientation-preserving 2D map.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "map", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Mapping {
    Identity,
    Scale {
        factor: f64,
    },
    /// `x' = M x + offset`, row-major `matrix`.
    Affine {
        matrix: [[f64; 2]; 2],
        offset: [f64; 2],
    },
    Cloak(CloakSpec),
    Bender(BenderSpec),
    /// `outer ∘ inner`; build with [`compose`].
    Compose {
        outer: Box<Mapping>,
        inner: Box<Mapping>,
    },
    #[serde(skip)]
    Custom(CustomMap),
}

fn affine_matrix(m: &[[f64; 2]; 2]) -> Matrix2<f64> {
    Matrix2::new(m[0][0], m[0][1], m[1][0], m[1][1])
}

fn checked_det(p: Point, a: Matrix2<f64>) -> Result<Matrix2<f64>> {
    let det = a.determinant();
    if det > 0.0 && det.is_finite() {
        Ok(a)
    } else {
        Err(Error::DegenerateMap {
            x: p.x,
            y: p.y,
            det,
        })
    }
}

impl Mapping {
    pub fn scale(factor: f64) -> Result<Self> {
        let m = Mapping::Scale { factor };
        m.validate()?;
        Ok(m)
    }

    pub fn affine(matrix: [[f64; 2]; 2], offset: [f64; 2]) -> Result<Self> {
        let m = Mapping::Affine { matrix, offset };
        m.validate()?;
        Ok(m)
    }

    pub fn cloak(spec: CloakSpec) -> Result<Self> {
        spec.validate()?;
        Ok(Mapping::Cloak(spec))
    }

    pub fn bender(spec: BenderSpec) -> Result<Self> {
        spec.validate()?;
        Ok(Mapping::Bender(spec))
    }

    pub fn custom(
        domain: Rect,
        forward: impl Fn(Point) -> Point + Send + Sync + 'static,
    ) -> Result<Self> {
        if !domain.is_valid() {
            return Err(Error::Validation(
                "custom map domain must be a nonempty rectangle".into(),
            ));
        }
        Ok(Mapping::Custom(CustomMap::new(domain, forward)))
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Mapping::Identity => Ok(()),
            Mapping::Scale { factor } => {
                if factor.is_finite() && *factor > 0.0 {
                    Ok(())
                } else {
                    Err(Error::Validation(format!(
                        "scale factor must be > 0, got {factor}"
                    )))
                }
            }
            Mapping::Affine { matrix, offset } => {
                if !offset.iter().all(|v| v.is_finite()) {
                    return Err(Error::Validation("affine offset must be finite".into()));
                }
                checked_det(Point::origin(), affine_matrix(matrix)).map(|_| ())
            }
            Mapping::Cloak(spec) => spec.validate(),
            Mapping::Bender(spec) => spec.validate(),
            Mapping::Compose { outer, inner } => {
                outer.validate()?;
                inner.validate()?;
                check_composable(outer, inner)
            }
            Mapping::Custom(c) => {
                if c.domain.is_valid() {
                    Ok(())
                } else {
                    Err(Error::Validation(
                        "custom map domain must be a nonempty rectangle".into(),
                    ))
                }
            }
        }
    }

    /// Bounded domain, or `None` for maps defined on the whole plane.
    pub fn domain(&self) -> Option<Rect> {
        match self {
            Mapping::Bender(spec) => Some(spec.plate()),
            Mapping::Custom(c) => Some(c.domain),
            Mapping::Compose { inner, .. } => inner.domain(),
            _ => None,
        }
    }

    fn check_domain(&self, p: Point) -> Result<()> {
        if let Some(d) = self.domain() {
            if !d.contains_with_slack(p, 1e-10 * d.diagonal()) {
                return Err(Error::domain(p, "outside map domain"));
            }
        }
        Ok(())
    }

    pub fn forward(&self, p: Point) -> Result<Point> {
        self.check_domain(p)?;
        self.forward_unchecked(p)
    }

    fn forward_unchecked(&self, p: Point) -> Result<Point> {
        Ok(match self {
            Mapping::Identity => p,
            Mapping::Scale { factor } => Point::from(p.coords * *factor),
            Mapping::Affine { matrix, offset } => {
                Point::from(affine_matrix(matrix) * p.coords + Vector2::new(offset[0], offset[1]))
            }
            Mapping::Cloak(spec) => {
                let rel = p - spec.center;
                let r = rel.norm();
                if r >= spec.b {
                    p
                } else if r == 0.0 {
                    return Err(Error::domain(p, "cloak map is undefined at its center"));
                } else {
                    spec.center + rel * (spec.radial_map(r) / r)
                }
            }
            Mapping::Bender(spec) => {
                let (r, theta) = spec.polar_image(p);
                Point::new(r * theta.cos(), r * theta.sin())
            }
            Mapping::Compose { outer, inner } => outer.forward(inner.forward(p)?)?,
            Mapping::Custom(c) => (c.forward)(p),
        })
    }

    /// Jacobian `A_ij = ∂x'_i/∂x_j` at `p`; closed form for built-ins.
    pub fn jacobian_at(&self, p: Point) -> Result<Matrix2<f64>> {
        self.check_domain(p)?;
        let a = match self {
            Mapping::Identity => Matrix2::identity(),
            Mapping::Scale { factor } => Matrix2::identity() * *factor,
            Mapping::Affine { matrix, .. } => affine_matrix(matrix),
            Mapping::Cloak(spec) => {
                let rel = p - spec.center;
                let r = rel.norm();
                if r >= spec.b {
                    Matrix2::identity()
                } else if r == 0.0 {
                    return Err(Error::domain(p, "cloak map is singular at its center"));
                } else {
                    let e = rel / r;
                    let (s_r, s_t) = spec.stretches(r);
                    let radial = e * e.transpose();
                    radial * s_r + (Matrix2::identity() - radial) * s_t
                }
            }
            Mapping::Bender(spec) => {
                let (r, theta) = spec.polar_image(p);
                let s = spec.stretch_at_radius(r);
                let (sin, cos) = theta.sin_cos();
                // columns: ∂/∂x along r̂, ∂/∂y along θ̂
                Matrix2::new(cos, -sin, sin, cos) * s
            }
            Mapping::Compose { outer, inner } => {
                let a_inner = inner.jacobian_at(p)?;
                outer.jacobian_at(inner.forward(p)?)? * a_inner
            }
            Mapping::Custom(c) => {
                finite_difference_jacobian(self, p, FD_RELATIVE_STEP * c.domain.diagonal())?
            }
        };
        checked_det(p, a)
    }

    /// Preimage of `q` under the map.
    pub fn inverse(&self, q: Point) -> Result<Point> {
        let p = match self {
            Mapping::Identity => q,
            Mapping::Scale { factor } => Point::from(q.coords / *factor),
            Mapping::Affine { matrix, offset } => {
                let m = affine_matrix(matrix);
                let inv = m.try_inverse().ok_or(Error::DegenerateMap {
                    x: q.x,
                    y: q.y,
                    det: 0.0,
                })?;
                Point::from(inv * (q.coords - Vector2::new(offset[0], offset[1])))
            }
            Mapping::Cloak(spec) => {
                let rel = q - spec.center;
                let r_prime = rel.norm();
                let r = spec.radial_inverse(r_prime).ok_or_else(|| {
                    Error::domain(q, "inside the cloaked core, not in the map range")
                })?;
                if r == 0.0 {
                    spec.center
                } else {
                    spec.center + rel * (r / r_prime)
                }
            }
            Mapping::Bender(spec) => {
                let r = q.coords.norm();
                let mut theta = q.y.atan2(q.x);
                if theta < -1e-12 {
                    theta += std::f64::consts::TAU;
                }
                let rate = spec.phi / spec.length();
                let p = Point::new((r / spec.r1).ln() / rate, theta.max(0.0) / rate);
                self.check_domain(p)?;
                p
            }
            Mapping::Compose { outer, inner } => inner.inverse(outer.inverse(q)?)?,
            Mapping::Custom(c) => newton_inverse(self, c.domain, q)?,
        };
        Ok(p)
    }
}

/// Central-difference Jacobian with step `h`.
pub fn finite_difference_jacobian(map: &Mapping, p: Point, h: f64) -> Result<Matrix2<f64>> {
    let mut a = Matrix2::zeros();
    for j in 0..2 {
        let mut dp = Vector2::zeros();
        dp[j] = h;
        let plus = map.forward_unchecked(p + dp)?;
        let minus = map.forward_unchecked(p - dp)?;
        let col = (plus - minus) / (2.0 * h);
        a.set_column(j, &col);
    }
    Ok(a)
}

fn newton_inverse(map: &Mapping, domain: Rect, q: Point) -> Result<Point> {
    let scale = domain.diagonal();
    let mut p = domain.center();
    for _ in 0..100 {
        let residual = map.forward_unchecked(p)? - q;
        if residual.norm() <= 1e-13 * scale.max(q.coords.norm()) {
            map.check_domain(p)?;
            return Ok(p);
        }
        let a = finite_difference_jacobian(map, p, FD_RELATIVE_STEP * scale)?;
        let step = a.try_inverse().ok_or(Error::DegenerateMap {
            x: p.x,
            y: p.y,
            det: 0.0,
        })? * residual;
        p -= step;
    }
    Err(Error::Geometry(format!(
        "inverse of custom map did not converge at ({}, {})",
        q.x, q.y
    )))
}

fn check_composable(outer: &Mapping, inner: &Mapping) -> Result<()> {
    let Some(out_dom) = outer.domain() else {
        return Ok(());
    };
    let Some(in_dom) = inner.domain() else {
        return Err(Error::Composition(
            "inner map is defined on the whole plane but the outer map has a bounded domain".into(),
        ));
    };
    let slack = 1e-9 * out_dom.diagonal();
    const N: usize = 8;
    for i in 0..=N {
        for j in 0..=N {
            let p = Point::new(
                in_dom.x[0] + in_dom.width() * i as f64 / N as f64,
                in_dom.y[0] + in_dom.height() * j as f64 / N as f64,
            );
            let img = inner.forward(p)?;
            if !out_dom.contains_with_slack(img, slack) {
                return Err(Error::Composition(format!(
                    "inner image ({}, {}) leaves the outer domain",
                    img.x, img.y
                )));
            }
        }
    }
    Ok(())
}

/// `outer ∘ inner`, with the chain-rule Jacobian.
pub fn compose(outer: Mapping, inner: Mapping) -> Result<Mapping> {
    check_composable(&outer, &inner)?;
    Ok(Mapping::Compose {
        outer: Box::new(outer),
        inner: Box::new(inner),
    })
}

pub fn jacobian_at(map: &Mapping, p: Point) -> Result<Matrix2<f64>> {
    map.jacobian_at(p)
}

pub fn cloak_mapping(spec: CloakSpec) -> Result<Mapping> {
    Mapping::cloak(spec)
}

pub fn bender_mapping(spec: BenderSpec) -> Result<Mapping> {
    Mapping::bender(spec)
}

/// `α' = AαAᵀ/det A`; `ρ`, `β`, `f` divided by `det A`.
pub fn push_forward(sample: &ParameterSample, a: &Matrix2<f64>) -> Result<ParameterSample> {
    let det = a.determinant();
    if !(det > 0.0 && det.is_finite()) {
        return Err(Error::DegenerateMap {
            x: f64::NAN,
            y: f64::NAN,
            det,
        });
    }
    let alpha = a * sample.alpha.to_matrix() * a.transpose() / det;
    Ok(ParameterSample {
        rho: sample.rho / det,
        alpha: SymTensor2::from_matrix(&alpha),
        beta: sample.beta / det,
        f: sample.f / det,
    })
}

/// `R(θ)·diag(α_r, α_θ)·R(θ)ᵀ`.
pub fn principal_to_cartesian(alpha_r: f64, alpha_theta: f64, theta: f64) -> SymTensor2 {
    let (s, c) = theta.sin_cos();
    SymTensor2 {
        xx: alpha_r * c * c + alpha_theta * s * s,
        xy: (alpha_r - alpha_theta) * c * s,
        yy: alpha_r * s * s + alpha_theta * c * c,
    }
}

/// Radial and tangential stretch of `a` at a point whose image lies at polar angle `theta`
/// about the polar center; equal for a conformal map.
pub fn polar_stretches(a: &Matrix2<f64>, theta: f64) -> (f64, f64) {
    let (s, c) = theta.sin_cos();
    let (e_r, e_t) = (Vector2::new(c, s), Vector2::new(-s, c));
    // singular values of A expressed in the image frame
    let aat = a * a.transpose();
    (
        (e_r.transpose() * aat * e_r)[0].sqrt(),
        (e_t.transpose() * aat * e_t)[0].sqrt(),
    )
}
