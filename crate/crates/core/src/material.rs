//! Spatially varying material parameters `(ρ, α, β, f)` of the diffusion-reaction
//! equation `ρ ∂u/∂t = ∇·(α∇u) − βu + f`.
//!
//! A [`ParameterField`] is an ordered list of `(Region, Rule)` entries plus a
//! default rule. Evaluation walks the entries in order and the first region
//! containing the point decides the rule.

use nalgebra::Matrix2;
use serde::{Deserialize, Serialize};

use crate::region::{Rect, Region};
use crate::transform::{
    bender_params_paper, cloak_params, push_forward, BenderSpec, CloakSpec, Mapping,
};
use crate::{Error, Point, Result};

/// Symmetric 2×2 tensor stored as its three independent components.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "TensorRepr")]
pub struct SymTensor2 {
    pub xx: f64,
    pub xy: f64,
    pub yy: f64,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum TensorRepr {
    Scalar(f64),
    Full { xx: f64, xy: f64, yy: f64 },
}

impl From<TensorRepr> for SymTensor2 {
    fn from(r: TensorRepr) -> Self {
        match r {
            TensorRepr::Scalar(s) => SymTensor2::isotropic(s),
            TensorRepr::Full { xx, xy, yy } => SymTensor2 { xx, xy, yy },
        }
    }
}

impl SymTensor2 {
    pub const fn new(xx: f64, xy: f64, yy: f64) -> Self {
        Self { xx, xy, yy }
    }

    pub const fn isotropic(s: f64) -> Self {
        Self::new(s, 0.0, s)
    }

    pub fn diag(a: f64, b: f64) -> Self {
        Self::new(a, 0.0, b)
    }

    /// Symmetric part of `m`.
    pub fn from_matrix(m: &Matrix2<f64>) -> Self {
        Self::new(m[(0, 0)], 0.5 * (m[(0, 1)] + m[(1, 0)]), m[(1, 1)])
    }

    pub fn to_matrix(&self) -> Matrix2<f64> {
        Matrix2::new(self.xx, self.xy, self.xy, self.yy)
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> [f64; 2] {
        let mean = 0.5 * (self.xx + self.yy);
        let half_diff = 0.5 * (self.xx - self.yy);
        let rad = half_diff.hypot(self.xy);
        [mean - rad, mean + rad]
    }

    pub fn is_finite(&self) -> bool {
        self.xx.is_finite() && self.xy.is_finite() && self.yy.is_finite()
    }

    /// Eigenvalues non-negative up to a relative round-off slack.
    pub fn is_psd(&self) -> bool {
        let [lo, hi] = self.eigenvalues();
        self.is_finite() && lo >= -1e-12 * hi.abs().max(f64::MIN_POSITIVE)
    }

    /// `Some(s)` when the tensor is `s·I`.
    pub fn as_isotropic(&self) -> Option<f64> {
        let scale = self.xx.abs().max(self.yy.abs()).max(1.0);
        let tol = 1e-12 * scale;
        ((self.xx - self.yy).abs() <= tol && self.xy.abs() <= tol)
            .then_some(0.5 * (self.xx + self.yy))
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self::new(self.xx * s, self.xy * s, self.yy * s)
    }
}

/// Material parameters at a single point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParameterSample {
    pub rho: f64,
    pub alpha: SymTensor2,
    pub beta: f64,
    #[serde(default)]
    pub f: f64,
}

impl ParameterSample {
    pub fn new(rho: f64, alpha: SymTensor2, beta: f64, f: f64) -> Result<Self> {
        let s = Self {
            rho,
            alpha,
            beta,
            f,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn isotropic(rho: f64, alpha: f64, beta: f64, f: f64) -> Result<Self> {
        Self::new(rho, SymTensor2::isotropic(alpha), beta, f)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rho.is_finite() && self.rho >= 0.0) {
            return Err(Error::Validation(format!(
                "rho must be >= 0, got {}",
                self.rho
            )));
        }
        if !(self.beta.is_finite() && self.beta >= 0.0) {
            return Err(Error::Validation(format!(
                "beta must be >= 0, got {}",
                self.beta
            )));
        }
        if !self.f.is_finite() {
            return Err(Error::Validation("f must be finite".into()));
        }
        if !self.alpha.is_psd() {
            return Err(Error::Validation(format!(
                "alpha must be positive semi-definite, eigenvalues {:?}",
                self.alpha.eigenvalues()
            )));
        }
        Ok(())
    }

    /// Copy with the source term replaced.
    pub fn with_source(mut self, f: f64) -> Self {
        self.f = f;
        self
    }
}

/// How a sample is produced once a region matched.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Rule {
    Constant {
        sample: ParameterSample,
    },
    /// Closed-form cloak shell parameters.
    Cloak {
        spec: CloakSpec,
        base: ParameterSample,
    },
    /// Published isotropic bender rule (quarter-turn, unit aspect only).
    BenderPaper {
        spec: BenderSpec,
        base: ParameterSample,
    },
    /// Base field evaluated at the preimage and pushed forward through `map`.
    PushForward {
        map: Mapping,
        base: Box<ParameterField>,
    },
}

impl Rule {
    pub fn constant(sample: ParameterSample) -> Self {
        Rule::Constant { sample }
    }

    fn eval(&self, p: Point) -> Result<ParameterSample> {
        match self {
            Rule::Constant { sample } => Ok(*sample),
            Rule::Cloak { spec, base } => cloak_params(spec, base, p),
            Rule::BenderPaper { spec, base } => bender_params_paper(spec, base, p),
            Rule::PushForward { map, base } => {
                let pre = map.inverse(p)?;
                let a = map.jacobian_at(pre)?;
                push_forward(&base.sample(pre)?, &a)
            }
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            Rule::Constant { sample } => sample.validate(),
            Rule::Cloak { spec, base } => {
                spec.validate()?;
                base.validate()
            }
            Rule::BenderPaper { spec, base } => {
                spec.validate()?;
                base.validate()
            }
            Rule::PushForward { map, base } => {
                map.validate()?;
                base.validate()
            }
        }
    }
}

/// Piecewise material definition; immutable once built.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParameterField {
    #[serde(default)]
    entries: Vec<(Region, Rule)>,
    default: Rule,
    #[serde(default)]
    bounds: Option<Rect>,
}

pub fn homogeneous_params(rho: f64, alpha: f64, beta: f64, f: f64) -> Result<ParameterField> {
    Ok(ParameterField {
        entries: Vec::new(),
        default: Rule::constant(ParameterSample::isotropic(rho, alpha, beta, f)?),
        bounds: None,
    })
}

pub fn piecewise_params(
    entries: Vec<(Region, Rule)>,
    default: Option<Rule>,
) -> Result<ParameterField> {
    let default =
        default.ok_or_else(|| Error::Validation("piecewise field needs a default rule".into()))?;
    let field = ParameterField {
        entries,
        default,
        bounds: None,
    };
    field.validate()?;
    Ok(field)
}

impl ParameterField {
    /// Single rule everywhere.
    pub fn from_rule(rule: Rule) -> Self {
        Self {
            entries: Vec::new(),
            default: rule,
            bounds: None,
        }
    }

    /// Restrict evaluation to `bounds`; points outside become domain errors.
    pub fn with_bounds(mut self, bounds: Rect) -> Self {
        self.bounds = Some(bounds);
        self
    }

    pub fn bounds(&self) -> Option<Rect> {
        self.bounds
    }

    pub fn entries(&self) -> &[(Region, Rule)] {
        &self.entries
    }

    pub fn default_rule(&self) -> &Rule {
        &self.default
    }

    pub fn validate(&self) -> Result<()> {
        for (region, rule) in &self.entries {
            region.validate()?;
            rule.validate()?;
        }
        self.default.validate()?;
        if let Some(b) = self.bounds {
            if !b.is_valid() {
                return Err(Error::Validation(
                    "field bounds must be a nonempty rectangle".into(),
                ));
            }
        }
        Ok(())
    }

    pub fn sample(&self, p: Point) -> Result<ParameterSample> {
        if let Some(b) = self.bounds {
            let slack = 1e-10 * b.diagonal();
            if !b.contains_with_slack(p, slack) {
                return Err(Error::domain(p, "outside parameter field bounds"));
            }
        }
        let rule = self
            .entries
            .iter()
            .find(|(region, _)| region.contains(p))
            .map(|(_, rule)| rule)
            .unwrap_or(&self.default);
        rule.eval(p)
    }
}

pub fn sample_params(field: &ParameterField, point: Point) -> Result<ParameterSample> {
    field.sample(point)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn unit() -> ParameterSample {
        ParameterSample::isotropic(1.0, 1.0, 1.0, 0.0).unwrap()
    }

    #[test]
    fn homogeneous_normalized() {
        let field = homogeneous_params(1.0, 1.0, 1.0, 0.0).unwrap();
        let s = field.sample(Point::new(0.0, 0.0)).unwrap();
        assert_eq!(s, unit());
        assert_eq!(s.alpha, SymTensor2::isotropic(1.0));
    }

    #[test]
    fn homogeneous_zero_diffusion() {
        let s = homogeneous_params(1.0, 0.0, 0.0, 0.0)
            .unwrap()
            .sample(Point::new(3.0, -2.0))
            .unwrap();
        assert_eq!(s.alpha.eigenvalues(), [0.0, 0.0]);
    }

    #[test]
    fn homogeneous_constant_values() {
        let s = homogeneous_params(2.0, 3.0, 0.0, 5.0)
            .unwrap()
            .sample(Point::new(0.3, 0.7))
            .unwrap();
        assert_eq!(s.rho, 2.0);
        assert_eq!(s.alpha, SymTensor2::isotropic(3.0));
        assert_eq!(s.beta, 0.0);
        assert_eq!(s.f, 5.0);
    }

    #[test]
    fn homogeneous_rejects_negative() {
        assert!(matches!(
            homogeneous_params(-1.0, 1.0, 1.0, 0.0),
            Err(Error::Validation(_))
        ));
        assert!(matches!(
            homogeneous_params(1.0, -1.0, 1.0, 0.0),
            Err(Error::Validation(_))
        ));
        assert!(matches!(
            homogeneous_params(1.0, 1.0, -0.1, 0.0),
            Err(Error::Validation(_))
        ));
    }

    #[test]
    fn piecewise_match_and_fallback() {
        let src = Region::HalfPlane {
            normal: [1.0, 0.0],
            offset: 1.0,
        };
        let field = piecewise_params(
            vec![(src, Rule::constant(unit().with_source(1.0)))],
            Some(Rule::constant(unit())),
        )
        .unwrap();
        assert_eq!(field.sample(Point::new(0.5, 0.5)).unwrap().f, 1.0);
        assert_eq!(field.sample(Point::new(1.5, 0.5)).unwrap().f, 0.0);
    }

    #[test]
    fn piecewise_first_match_wins() {
        let disk = |r| Region::Disk {
            center: [0.0, 0.0],
            radius: r,
        };
        let with_alpha = |a| Rule::constant(ParameterSample::isotropic(1.0, a, 0.0, 0.0).unwrap());
        let field = piecewise_params(
            vec![(disk(2.0), with_alpha(5.0)), (disk(3.0), with_alpha(7.0))],
            Some(with_alpha(1.0)),
        )
        .unwrap();
        let s = field.sample(Point::new(1.0, 0.0)).unwrap();
        assert_eq!(s.alpha, SymTensor2::isotropic(5.0));
    }

    #[test]
    fn piecewise_requires_default() {
        assert!(matches!(
            piecewise_params(vec![], None),
            Err(Error::Validation(_))
        ));
    }

    #[test]
    fn bounds_are_enforced() {
        let field = homogeneous_params(1.0, 1.0, 1.0, 0.0)
            .unwrap()
            .with_bounds(Rect::new([0.0, 1.0], [0.0, 1.0]));
        assert!(field.sample(Point::new(0.5, 0.5)).is_ok());
        assert!(matches!(
            field.sample(Point::new(1.5, 0.5)),
            Err(Error::Domain { .. })
        ));
    }

    #[test]
    fn cloak_field_exterior_unchanged_and_shell_transformed() {
        let spec = CloakSpec::new(Point::new(0.0, 0.0), 1.0, 2.0, 1e-3).unwrap();
        let ring = Region::Annulus {
            center: [0.0, 0.0],
            inner: 1.0,
            outer: 2.0,
        };
        let field = piecewise_params(
            vec![(ring, Rule::Cloak { spec, base: unit() })],
            Some(Rule::constant(unit())),
        )
        .unwrap();
        assert_eq!(field.sample(Point::new(3.0, 0.0)).unwrap(), unit());
        let s = field.sample(Point::new(1.5, 0.0)).unwrap();
        assert_relative_eq!(s.alpha.xx, 1.0 / 3.0, epsilon = 1e-14);
        assert_relative_eq!(s.alpha.yy, 3.0, epsilon = 1e-14);
        assert_relative_eq!(s.rho, 4.0 / 3.0, epsilon = 1e-14);
    }

    #[test]
    fn tensor_accepts_scalar_json() {
        let s: ParameterSample = serde_json::from_str(r#"{"rho":1,"alpha":2,"beta":0}"#).unwrap();
        assert_eq!(s.alpha, SymTensor2::isotropic(2.0));
        let s: ParameterSample =
            serde_json::from_str(r#"{"rho":1,"alpha":{"xx":2,"xy":0.5,"yy":1},"beta":0,"f":1}"#)
                .unwrap();
        assert_eq!(s.alpha, SymTensor2::new(2.0, 0.5, 1.0));
    }
}
