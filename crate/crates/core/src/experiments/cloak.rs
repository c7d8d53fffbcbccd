//! Cloak experiment: a source strip drives a decaying field past a cloaked disk.
//!
//! Three media share the domain, grid, boundary data and source strip and
//! differ only in the shell `a <= r' <= b`: the base medium, a near-insulating
//! blanket, and the designed cloak.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::metrics::{exterior_mismatch, max_abs_in};
use super::report::{ExperimentReport, Provenance, VariantMetrics};
use crate::material::{piecewise_params, ParameterField, ParameterSample, Rule, SymTensor2};
use crate::mesh::{build_cartesian_mesh, Mesh};
use crate::region::{Rect, Region};
use crate::solver::{
    assemble_system, run_transient_with, solve_steady_with, BoundaryCondition, BoundaryConditions,
    FieldSolution, SolverSettings,
};
use crate::transform::{cloak_params, push_forward, CloakSpec, Mapping, DEFAULT_EPSILON};
use crate::{Error, Point, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CloakVariant {
    Original,
    Blanket,
    Cloaked,
}

impl CloakVariant {
    pub const ALL: [CloakVariant; 3] = [
        CloakVariant::Original,
        CloakVariant::Blanket,
        CloakVariant::Cloaked,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CloakVariant::Original => "original",
            CloakVariant::Blanket => "blanket",
            CloakVariant::Cloaked => "cloaked",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CloakScenario {
    pub domain: Rect,
    /// Area I; the rest of the domain is source-free.
    pub source: Rect,
    pub source_strength: f64,
    /// Base medium; its `f` is ignored in favour of the source strip.
    pub base: ParameterSample,
    pub cloak: CloakSpec,
    pub grid: [usize; 2],
    /// Shell diffusivity of the blanket as a fraction of the base.
    pub blanket_factor: f64,
    pub dt: f64,
    pub t_end: f64,
    /// Shielding is measured over `r' <= leakage_fraction · a`.
    pub leakage_fraction: f64,
    pub settings: SolverSettings,
}

impl Default for CloakScenario {
    fn default() -> Self {
        Self {
            domain: Rect::new([0.0, 8.0], [0.0, 4.0]),
            source: Rect::new([0.0, 1.0], [0.0, 4.0]),
            source_strength: 1.0,
            base: ParameterSample {
                rho: 1.0,
                alpha: SymTensor2::isotropic(1.0),
                beta: 1.0,
                f: 0.0,
            },
            cloak: CloakSpec {
                center: Point::new(5.0, 2.0),
                a: 0.6,
                b: 1.2,
                epsilon: DEFAULT_EPSILON,
            },
            grid: [192, 96],
            blanket_factor: 1e-6,
            dt: 0.01,
            t_end: 1.0,
            leakage_fraction: 0.9,
            settings: SolverSettings::default(),
        }
    }
}

/// Fields of one variant.
#[derive(Debug, Clone)]
pub struct CloakRun {
    pub variant: CloakVariant,
    pub steady: FieldSolution,
    /// Transient field at `t_end`, started from rest.
    pub transient: FieldSolution,
}

#[derive(Debug, Clone)]
pub struct CloakOutcome {
    pub report: ExperimentReport,
    pub mesh: Mesh,
    pub runs: Vec<CloakRun>,
}

impl CloakScenario {
    pub fn validate(&self) -> Result<()> {
        self.cloak.validate()?;
        self.base.validate()?;
        self.settings.validate()?;
        if self.base.alpha.as_isotropic().is_none() {
            return Err(Error::UnsupportedBase(
                "cloak scenario needs an isotropic base diffusivity".into(),
            ));
        }
        if !self.domain.is_valid() || !self.source.is_valid() {
            return Err(Error::Validation(
                "domain and source must be nonempty rectangles".into(),
            ));
        }
        let c = self.cloak.center;
        let b = self.cloak.b;
        let d = &self.domain;
        let inside_domain =
            c.x - b > d.x[0] && c.x + b < d.x[1] && c.y - b > d.y[0] && c.y + b < d.y[1];
        if !inside_domain {
            return Err(Error::Validation(
                "cloak disk r' <= b must lie strictly inside the domain".into(),
            ));
        }
        let s = &self.source;
        let touches_source =
            c.x + b > s.x[0] && c.x - b < s.x[1] && c.y + b > s.y[0] && c.y - b < s.y[1];
        if touches_source {
            return Err(Error::Validation(
                "cloak disk r' <= b must lie strictly inside the source-free area".into(),
            ));
        }
        if self.grid[0] == 0 || self.grid[1] == 0 {
            return Err(Error::Validation(
                "cloak grid needs at least one cell per direction".into(),
            ));
        }
        if !(self.source_strength.is_finite()) {
            return Err(Error::Validation("source strength must be finite".into()));
        }
        if !(self.blanket_factor > 0.0 && self.blanket_factor <= 1.0) {
            return Err(Error::Validation(format!(
                "blanket_factor must lie in (0, 1], got {}",
                self.blanket_factor
            )));
        }
        if !(self.dt > 0.0 && self.dt.is_finite() && self.t_end > 0.0 && self.t_end.is_finite()) {
            return Err(Error::Validation("dt and t_end must be positive".into()));
        }
        if !(self.leakage_fraction > 0.0 && self.leakage_fraction <= 1.0) {
            return Err(Error::Validation(
                "leakage_fraction must lie in (0, 1]".into(),
            ));
        }
        Ok(())
    }

    fn shell(&self) -> Region {
        let c = self.cloak.center;
        Region::Annulus {
            center: [c.x, c.y],
            inner: self.cloak.a,
            outer: self.cloak.b,
        }
    }

    /// Material of one variant. The hidden core keeps the base medium.
    pub fn field(&self, variant: CloakVariant) -> Result<ParameterField> {
        let plain = self.base.with_source(0.0);
        let strip = Region::Rect {
            x: self.source.x,
            y: self.source.y,
        };
        let mut entries = vec![(
            strip,
            Rule::constant(self.base.with_source(self.source_strength)),
        )];
        match variant {
            CloakVariant::Original => {}
            CloakVariant::Blanket => {
                let blanket = ParameterSample {
                    alpha: plain.alpha.scaled(self.blanket_factor),
                    ..plain
                };
                entries.insert(0, (self.shell(), Rule::constant(blanket)));
            }
            CloakVariant::Cloaked => {
                let rule = Rule::Cloak {
                    spec: self.cloak,
                    base: plain,
                };
                entries.insert(0, (self.shell(), rule));
            }
        }
        piecewise_params(entries, Some(Rule::constant(plain)))
    }

    fn bcs() -> BoundaryConditions {
        ["bottom", "right", "top", "left"]
            .into_iter()
            .fold(BoundaryConditions::new(), |bcs, tag| {
                bcs.with(tag, BoundaryCondition::dirichlet(0.0))
            })
    }

    pub fn mesh(&self) -> Result<Mesh> {
        build_cartesian_mesh(self.domain.x, self.domain.y, self.grid[0], self.grid[1])
    }

    /// Source-free area outside the cloak disk.
    pub fn exterior(&self, p: Point) -> bool {
        !self.source.contains(p) && (p - self.cloak.center).norm() > self.cloak.b
    }

    pub fn interior(&self, p: Point) -> bool {
        (p - self.cloak.center).norm() <= self.leakage_fraction * self.cloak.a
    }

    pub fn run_variant(&self, mesh: &Mesh, variant: CloakVariant) -> Result<CloakRun> {
        let system = assemble_system(mesh, &self.field(variant)?, &Self::bcs())?;
        let steady = solve_steady_with(&system, &self.settings)?;
        let u0 = FieldSolution::constant(mesh.node_count(), 0.0);
        let transient = run_transient_with(&system, &u0, self.dt, self.t_end, &[], &self.settings)?;
        Ok(CloakRun {
            variant,
            steady,
            transient: FieldSolution::new(transient.values),
        })
    }

    /// Steady cloaked field only; used by the epsilon sweep.
    pub fn steady_cloaked(&self, mesh: &Mesh) -> Result<FieldSolution> {
        let system = assemble_system(mesh, &self.field(CloakVariant::Cloaked)?, &Self::bcs())?;
        solve_steady_with(&system, &self.settings)
    }
}

/// Solves all three variants, steady and at `t_end`, and compares each to the original.
pub fn run_cloak_experiment(scenario: &CloakScenario) -> Result<CloakOutcome> {
    scenario.validate()?;
    let mesh = scenario.mesh()?;
    let runs = CloakVariant::ALL
        .par_iter()
        .map(|&v| scenario.run_variant(&mesh, v))
        .collect::<Result<Vec<_>>>()?;
    let original = &runs[0];
    let exterior = |p: Point| scenario.exterior(p);
    let interior = |p: Point| scenario.interior(p);

    let mut variants = Vec::with_capacity(runs.len());
    for run in &runs {
        let steady_mismatch = exterior_mismatch(&mesh, &original.steady, &run.steady, exterior)?;
        let transient_mismatch =
            exterior_mismatch(&mesh, &original.transient, &run.transient, exterior)?;
        variants.push(
            VariantMetrics {
                exterior_mismatch: Some(steady_mismatch),
                interior_leakage: Some(max_abs_in(&mesh, &run.steady.values, interior)),
                ..VariantMetrics::new(run.variant.name())
            }
            .with_extra("exterior_mismatch_transient", transient_mismatch)
            .with_extra(
                "interior_leakage_transient",
                max_abs_in(&mesh, &run.transient.values, interior),
            ),
        );
    }
    let mut provenance = Provenance {
        grids: vec![scenario.grid],
        dt: Some(scenario.dt),
        t_end: Some(scenario.t_end),
        epsilon: Some(scenario.cloak.epsilon),
        tolerance: scenario.settings.tolerance,
        ..Default::default()
    };
    provenance
        .notes
        .insert("exterior".into(), "source-free area with r' > b".into());
    provenance.notes.insert(
        "interior".into(),
        format!("r' <= {} a", scenario.leakage_fraction),
    );
    let report = ExperimentReport {
        scenario: "cloak".into(),
        variants,
        provenance,
    };
    report.validate()?;
    Ok(CloakOutcome { report, mesh, runs })
}

/// One row of an epsilon sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpsilonPoint {
    pub epsilon: f64,
    pub exterior_mismatch: f64,
    pub interior_leakage: f64,
}

/// Steady cloaked runs at each `epsilon`, compared with the original medium.
pub fn epsilon_sweep(scenario: &CloakScenario, epsilons: &[f64]) -> Result<Vec<EpsilonPoint>> {
    scenario.validate()?;
    let mesh = scenario.mesh()?;
    let original = {
        let system = assemble_system(
            &mesh,
            &scenario.field(CloakVariant::Original)?,
            &CloakScenario::bcs(),
        )?;
        solve_steady_with(&system, &scenario.settings)?
    };
    epsilons
        .par_iter()
        .map(|&epsilon| {
            let mut s = scenario.clone();
            s.cloak.epsilon = epsilon;
            s.cloak.validate()?;
            let cloaked = s.steady_cloaked(&mesh)?;
            Ok(EpsilonPoint {
                epsilon,
                exterior_mismatch: exterior_mismatch(&mesh, &original, &cloaked, |p| {
                    s.exterior(p)
                })?,
                interior_leakage: max_abs_in(&mesh, &cloaked.values, |p| s.interior(p)),
            })
        })
        .collect()
}

/// Largest relative difference between the closed-form shell parameters and a
/// push-forward of the base medium through the cloak map, over `points`.
///
/// Points must lie in the unclamped shell `a + εa < r' <= b`.
pub fn cloak_consistency(
    spec: &CloakSpec,
    base: &ParameterSample,
    points: &[Point],
) -> Result<f64> {
    let map = Mapping::cloak(*spec)?;
    let mut worst: f64 = 0.0;
    for &q in points {
        let closed = cloak_params(spec, base, q)?;
        let pre = map.inverse(q)?;
        let numeric = push_forward(base, &map.jacobian_at(pre)?)?;
        let c = closed.alpha.to_matrix();
        let n = numeric.alpha.to_matrix();
        worst = worst.max((c - n).norm() / c.norm());
        for (x, y) in [
            (closed.rho, numeric.rho),
            (closed.beta, numeric.beta),
            (closed.f, numeric.f),
        ] {
            let scale = x.abs().max(y.abs());
            if scale > 0.0 {
                worst = worst.max((x - y).abs() / scale);
            }
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> CloakScenario {
        CloakScenario {
            grid: [48, 24],
            dt: 0.05,
            ..Default::default()
        }
    }

    #[test]
    fn defaults_validate() {
        CloakScenario::default().validate().unwrap();
    }

    #[test]
    fn rejects_cloak_over_source() {
        let mut s = CloakScenario::default();
        s.cloak.center = Point::new(1.5, 2.0);
        assert!(s.validate().is_err());
    }

    #[test]
    fn original_against_itself_is_zero() {
        let out = run_cloak_experiment(&small()).unwrap();
        let o = out.report.variant("original").unwrap();
        assert_eq!(o.exterior_mismatch, Some(0.0));
        assert_eq!(o.extra["exterior_mismatch_transient"], 0.0);
    }

    #[test]
    fn variant_fields_differ_only_in_shell() {
        let s = CloakScenario::default();
        let o = s.field(CloakVariant::Original).unwrap();
        let b = s.field(CloakVariant::Blanket).unwrap();
        let c = s.field(CloakVariant::Cloaked).unwrap();
        for p in [
            Point::new(0.5, 1.0),
            Point::new(3.0, 3.0),
            Point::new(5.0, 2.1),
        ] {
            assert_eq!(o.sample(p).unwrap(), b.sample(p).unwrap());
            assert_eq!(o.sample(p).unwrap(), c.sample(p).unwrap());
        }
        let shell = Point::new(5.9, 2.0);
        assert_ne!(o.sample(shell).unwrap(), b.sample(shell).unwrap());
        assert_ne!(o.sample(shell).unwrap(), c.sample(shell).unwrap());
    }

    #[test]
    fn consistency_on_a_few_points() {
        let s = CloakScenario::default();
        let pts: Vec<Point> = (1..20)
            .map(|k| {
                let t = k as f64 / 20.0;
                let r =
                    s.cloak.a * (1.0 + 2.0 * s.cloak.epsilon) + t * (s.cloak.b - s.cloak.a * 1.01);
                s.cloak.center + nalgebra::Vector2::new(r * (7.0 * t).cos(), r * (7.0 * t).sin())
            })
            .collect();
        assert!(cloak_consistency(&s.cloak, &s.base, &pts).unwrap() <= 1e-8);
    }
}
