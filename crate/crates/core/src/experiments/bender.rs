//! Bender experiment: a field entering the sector through `AD` should cross the
//! bend as if the sector were the straight plate it was mapped from.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::metrics::{contour_straightness, radial_variation, spread_of};
use super::report::{ExperimentReport, Provenance, VariantMetrics};
use super::rod::Rod;
use crate::material::{homogeneous_params, ParameterField, ParameterSample, Rule, SymTensor2};
use crate::mesh::{build_annular_sector_mesh, Mesh};
use crate::solver::{
    assemble_system, run_transient_with, solve_steady_with, AssembledSystem, BackwardEuler,
    BoundaryCondition, BoundaryConditions, FieldSolution, SolverSettings,
};
use crate::transform::{BenderSpec, Mapping};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BenderVariant {
    /// Base medium everywhere in the sector.
    HomogeneousArc,
    /// Push-forward of the base medium through the bender map.
    Eq8Derived,
    /// Published isotropic rule.
    Eq11Paper,
}

impl BenderVariant {
    pub const ALL: [BenderVariant; 3] = [
        BenderVariant::HomogeneousArc,
        BenderVariant::Eq8Derived,
        BenderVariant::Eq11Paper,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BenderVariant::HomogeneousArc => "homogeneous-arc",
            BenderVariant::Eq8Derived => "eq8-derived",
            BenderVariant::Eq11Paper => "eq11-paper",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BenderScenario {
    pub spec: BenderSpec,
    pub base: ParameterSample,
    pub u_input: f64,
    pub variants: Vec<BenderVariant>,
    /// Cells `[radial, angular]` of the sector mesh.
    pub grid: [usize; 2],
    /// Step of the through-flux run (outlet `CB` held at zero).
    pub dt: f64,
    /// Snapshot times of the through-flux run; the last one is its end time.
    pub snapshot_times: Vec<f64>,
    /// Crossing level as a fraction of `u_input` for the arrival run (insulated `CB`).
    pub threshold: f64,
    /// Initial step of the arrival run; each chunk doubles it.
    pub arrival_dt: f64,
    pub arrival_steps_per_chunk: usize,
    /// The arrival run gives up after this time.
    pub arrival_t_max: f64,
    pub settings: SolverSettings,
}

impl Default for BenderScenario {
    fn default() -> Self {
        Self {
            spec: BenderSpec::default(),
            base: ParameterSample {
                rho: 1.0,
                alpha: SymTensor2::isotropic(1.0),
                beta: 0.0,
                f: 0.0,
            },
            u_input: 1.0,
            variants: BenderVariant::ALL.to_vec(),
            grid: [64, 64],
            dt: 1e-3,
            snapshot_times: vec![0.05, 0.1, 0.2, 0.5],
            threshold: 0.5,
            arrival_dt: 2e-3,
            arrival_steps_per_chunk: 500,
            arrival_t_max: 1e4,
            settings: SolverSettings::default(),
        }
    }
}

/// Fields and arrival data of one variant.
#[derive(Debug, Clone)]
pub struct BenderRun {
    pub variant: BenderVariant,
    pub steady: FieldSolution,
    /// Through-flux transient with its snapshots.
    pub transient: FieldSolution,
    /// Crossing time of each `CB` node, in the order of `Mesh::tagged_nodes("CB")`.
    pub arrival_times: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct BenderOutcome {
    pub report: ExperimentReport,
    pub mesh: Mesh,
    pub runs: Vec<BenderRun>,
}

impl BenderScenario {
    pub fn validate(&self) -> Result<()> {
        self.spec.validate()?;
        self.base.validate()?;
        self.settings.validate()?;
        if self.base.alpha.as_isotropic().is_none() {
            return Err(Error::UnsupportedBase(
                "bender scenario needs an isotropic base diffusivity".into(),
            ));
        }
        if self.base.f != 0.0 {
            return Err(Error::Validation(
                "bender scenario is source-free; base f must be 0".into(),
            ));
        }
        if self.variants.is_empty() {
            return Err(Error::Validation(
                "bender scenario needs at least one variant".into(),
            ));
        }
        if self.variants.contains(&BenderVariant::Eq11Paper) && !self.spec.is_quarter_unit() {
            return Err(Error::UnsupportedSpec(format!(
                "variant eq11-paper requires phi = π/2 and k = 1, got phi = {}, k = {}",
                self.spec.phi, self.spec.k
            )));
        }
        if !(self.u_input.is_finite() && self.u_input != 0.0) {
            return Err(Error::Validation(
                "u_input must be finite and nonzero".into(),
            ));
        }
        if self.grid[0] == 0 || self.grid[1] == 0 {
            return Err(Error::Validation(
                "bender grid needs at least one cell per direction".into(),
            ));
        }
        let positive = |v: f64| v > 0.0 && v.is_finite();
        if !(positive(self.dt) && positive(self.arrival_dt) && positive(self.arrival_t_max)) {
            return Err(Error::Validation(
                "time steps and arrival_t_max must be positive".into(),
            ));
        }
        if self.arrival_steps_per_chunk == 0 {
            return Err(Error::Validation(
                "arrival_steps_per_chunk must be >= 1".into(),
            ));
        }
        if !(self.threshold > 0.0 && self.threshold < 1.0) {
            return Err(Error::Validation(format!(
                "threshold must lie in (0, 1), got {}",
                self.threshold
            )));
        }
        if self.snapshot_times.is_empty() || self.snapshot_times.iter().any(|t| !positive(*t)) {
            return Err(Error::Validation(
                "snapshot_times must be nonempty and positive".into(),
            ));
        }
        Ok(())
    }

    pub fn mesh(&self) -> Result<Mesh> {
        build_annular_sector_mesh(
            self.spec.r1,
            self.spec.r2(),
            self.spec.phi,
            self.grid[0],
            self.grid[1],
        )
    }

    pub fn t_end(&self) -> f64 {
        self.snapshot_times.iter().copied().fold(0.0, f64::max)
    }

    /// The straight plate as a 1D rod along its length.
    pub fn rod(&self) -> Rod {
        Rod {
            length: self.spec.length(),
            alpha: self.base.alpha.xx,
            rho: self.base.rho,
            beta: self.base.beta,
            u_left: self.u_input,
        }
    }

    pub fn field(&self, variant: BenderVariant) -> Result<ParameterField> {
        Ok(match variant {
            BenderVariant::HomogeneousArc => ParameterField::from_rule(Rule::constant(self.base)),
            BenderVariant::Eq8Derived => {
                let plate =
                    homogeneous_params(self.base.rho, self.base.alpha.xx, self.base.beta, 0.0)?
                        .with_bounds(self.spec.plate());
                ParameterField::from_rule(Rule::PushForward {
                    map: Mapping::bender(self.spec)?,
                    base: Box::new(plate),
                })
            }
            BenderVariant::Eq11Paper => ParameterField::from_rule(Rule::BenderPaper {
                spec: self.spec,
                base: self.base,
            }),
        })
    }

    fn bcs(&self, outlet: BoundaryCondition) -> BoundaryConditions {
        BoundaryConditions::new()
            .with("AD", BoundaryCondition::dirichlet(self.u_input))
            .with("inner-arc", BoundaryCondition::insulated())
            .with("outer-arc", BoundaryCondition::insulated())
            .with("CB", outlet)
    }

    pub fn run_variant(&self, mesh: &Mesh, variant: BenderVariant) -> Result<BenderRun> {
        let field = self.field(variant)?;
        let through = assemble_system(mesh, &field, &self.bcs(BoundaryCondition::dirichlet(0.0)))?;
        let steady = solve_steady_with(&through, &self.settings)?;
        let u0 = FieldSolution::new(through.fixed.iter().map(|v| v.unwrap_or(0.0)).collect());
        let transient = run_transient_with(
            &through,
            &u0,
            self.dt,
            self.t_end(),
            &self.snapshot_times,
            &self.settings,
        )?;

        let closed = assemble_system(mesh, &field, &self.bcs(BoundaryCondition::insulated()))?;
        let probes = mesh.tagged_nodes("CB");
        let arrival_times = self.arrival(&closed, &probes)?;
        Ok(BenderRun {
            variant,
            steady,
            transient,
            arrival_times,
        })
    }

    /// Marches from rest in chunks of `arrival_steps_per_chunk` steps, doubling
    /// the step each chunk, until every probe has crossed the threshold.
    fn arrival(&self, system: &AssembledSystem, probes: &[usize]) -> Result<Vec<f64>> {
        let level = self.threshold * self.u_input;
        let crossed = |v: f64| {
            if self.u_input > 0.0 {
                v >= level
            } else {
                v <= level
            }
        };
        let mut u: Vec<f64> = system.fixed.iter().map(|v| v.unwrap_or(0.0)).collect();
        let mut times: Vec<Option<f64>> = vec![None; probes.len()];
        let (mut t, mut dt) = (0.0, self.arrival_dt);
        while t < self.arrival_t_max {
            let stepper = BackwardEuler::new(system, dt, &self.settings)?;
            for _ in 0..self.arrival_steps_per_chunk {
                let mut next = u.clone();
                stepper.step(&u, &mut next)?;
                for (k, &node) in probes.iter().enumerate() {
                    if times[k].is_none() && crossed(next[node]) {
                        let (v0, v1) = (u[node], next[node]);
                        let w = if v1 != v0 {
                            (level - v0) / (v1 - v0)
                        } else {
                            1.0
                        };
                        times[k] = Some(t + w.clamp(0.0, 1.0) * dt);
                    }
                }
                u = next;
                t += dt;
                if times.iter().all(Option::is_some) {
                    return Ok(times.into_iter().map(|t| t.expect("crossed")).collect());
                }
            }
            dt *= 2.0;
        }
        let probe = times.iter().position(Option::is_none).unwrap_or(0);
        Err(Error::NonArrival { probe })
    }

    /// Largest `|u − rod|/|u_input|` over all nodes and snapshots of the
    /// through-flux run, with node `(r, θ)` read at rod position `x = ka·θ/φ`.
    pub fn rod_deviation(&self, mesh: &Mesh, transient: &FieldSolution) -> f64 {
        let rod = self.rod();
        let scale = self.spec.length() / self.spec.phi;
        let positions: Vec<f64> = mesh
            .nodes()
            .iter()
            .map(|p| scale * p.y.atan2(p.x))
            .collect();
        transient
            .snapshots
            .iter()
            .filter(|s| s.time > 0.0)
            .flat_map(|s| {
                let rod = &rod;
                s.values
                    .iter()
                    .zip(&positions)
                    .map(move |(u, &x)| (u - rod.value(s.time, x)).abs())
            })
            .fold(0.0, f64::max)
            / self.u_input.abs()
    }
}

/// Runs every configured variant and measures straightness, radial variation
/// and arrival spread; the eq8-derived variant is also checked against the rod.
pub fn run_bender_experiment(scenario: &BenderScenario) -> Result<BenderOutcome> {
    scenario.validate()?;
    let mesh = scenario.mesh()?;
    let runs = scenario
        .variants
        .par_iter()
        .map(|&v| scenario.run_variant(&mesh, v))
        .collect::<Result<Vec<_>>>()?;

    let mut variants = Vec::with_capacity(runs.len());
    for run in &runs {
        let mut worst_radial: f64 = 0.0;
        for s in &run.transient.snapshots {
            worst_radial = worst_radial.max(radial_variation(&mesh, &s.values)?);
        }
        let mut m = VariantMetrics {
            contour_straightness: Some(contour_straightness(&mesh, &run.steady.values)?),
            arrival_spread: Some(spread_of(&run.arrival_times)),
            ..VariantMetrics::new(run.variant.name())
        }
        .with_extra(
            "radial_variation_max",
            worst_radial / scenario.u_input.abs(),
        )
        .with_extra(
            "arrival_time_min",
            run.arrival_times
                .iter()
                .copied()
                .fold(f64::INFINITY, f64::min),
        )
        .with_extra(
            "arrival_time_max",
            run.arrival_times.iter().copied().fold(0.0, f64::max),
        );
        if run.variant == BenderVariant::Eq8Derived {
            m = m.with_extra(
                "rod_deviation",
                scenario.rod_deviation(&mesh, &run.transient),
            );
        }
        variants.push(m);
    }
    let mut provenance = Provenance {
        grids: vec![scenario.grid],
        dt: Some(scenario.dt),
        t_end: Some(scenario.t_end()),
        tolerance: scenario.settings.tolerance,
        ..Default::default()
    };
    provenance.notes.insert(
        "arrival".into(),
        format!(
            "CB insulated, threshold {}, dt {} doubling every {} steps",
            scenario.threshold, scenario.arrival_dt, scenario.arrival_steps_per_chunk
        ),
    );
    let report = ExperimentReport {
        scenario: "bender".into(),
        variants,
        provenance,
    };
    report.validate()?;
    Ok(BenderOutcome { report, mesh, runs })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Point;

    #[test]
    fn defaults_validate() {
        BenderScenario::default().validate().unwrap();
    }

    #[test]
    fn eq11_needs_quarter_turn() {
        let s = BenderScenario {
            spec: BenderSpec {
                phi: 3.0,
                ..Default::default()
            },
            ..Default::default()
        };
        assert!(matches!(s.validate(), Err(Error::UnsupportedSpec(_))));
        let s = BenderScenario {
            variants: vec![BenderVariant::Eq8Derived],
            ..s
        };
        s.validate().unwrap();
    }

    #[test]
    fn eq8_field_is_isotropic_and_scales_capacity() {
        let s = BenderScenario::default();
        let field = s.field(BenderVariant::Eq8Derived).unwrap();
        let p = Point::new(2.0, 1.0);
        let sample = field.sample(p).unwrap();
        let stretch = s.spec.stretch_at_radius(p.coords.norm());
        assert!((sample.alpha.xx - 1.0).abs() < 1e-12 && sample.alpha.xy.abs() < 1e-12);
        assert!((sample.rho - 1.0 / (stretch * stretch)).abs() < 1e-12);
    }

    #[test]
    fn coarse_run_reports_all_variants() {
        let s = BenderScenario {
            grid: [12, 12],
            dt: 5e-3,
            snapshot_times: vec![0.1, 0.2],
            arrival_dt: 1e-2,
            arrival_steps_per_chunk: 50,
            ..Default::default()
        };
        let out = run_bender_experiment(&s).unwrap();
        assert_eq!(out.report.variants.len(), 3);
        let eq8 = out.report.variant("eq8-derived").unwrap();
        let homog = out.report.variant("homogeneous-arc").unwrap();
        assert!(eq8.arrival_spread.unwrap() < homog.arrival_spread.unwrap());
        assert!(eq8.extra.contains_key("rod_deviation"));
    }
}
