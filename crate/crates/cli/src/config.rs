//! Strict JSON run configuration. Every field has a default; unknown keys are errors.

use serde::{Deserialize, Serialize};

use commfield_core::experiments::{BenderScenario, BenderVariant, CloakScenario};
use commfield_core::material::{homogeneous_params, ParameterField, ParameterSample, SymTensor2};
use commfield_core::region::Rect;
use commfield_core::solver::{BoundaryCondition, BoundaryConditions, SolverSettings};
use commfield_core::transform::{BenderSpec, CloakSpec, Mapping};
use commfield_core::Point;

use crate::CliError;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "scenario", rename_all = "kebab-case")]
pub enum RunConfig {
    Cloak(CloakConfig),
    Bender(BenderConfig),
    Pullback(PullbackConfig),
    Convergence(ConvergenceConfig),
    Custom(CustomConfig),
}

/// Which files to write besides the metrics report.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputToggles {
    pub csv: bool,
    pub vtk: bool,
    pub pgm: bool,
    pub contours: bool,
    /// Also write every transient snapshot, not only the final fields.
    pub snapshots: bool,
}

impl Default for OutputToggles {
    fn default() -> Self {
        Self {
            csv: true,
            vtk: true,
            pgm: true,
            contours: true,
            snapshots: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CloakConfig {
    pub domain_x: [f64; 2],
    pub domain_y: [f64; 2],
    pub source_x: [f64; 2],
    pub source_y: [f64; 2],
    pub source_strength: f64,
    pub rho: f64,
    pub alpha: f64,
    pub beta: f64,
    pub center: [f64; 2],
    pub a: f64,
    pub b: f64,
    pub epsilon: f64,
    pub grid: [usize; 2],
    pub blanket_factor: f64,
    pub dt: f64,
    pub t_end: f64,
    pub leakage_fraction: f64,
    /// Extra steady cloaked runs; empty to skip.
    pub epsilon_sweep: Vec<f64>,
    /// Random shell points for the closed-form versus push-forward check.
    pub consistency_points: usize,
    pub tolerance: f64,
    pub output: OutputToggles,
}

impl Default for CloakConfig {
    fn default() -> Self {
        let s = CloakScenario::default();
        Self {
            domain_x: s.domain.x,
            domain_y: s.domain.y,
            source_x: s.source.x,
            source_y: s.source.y,
            source_strength: s.source_strength,
            rho: s.base.rho,
            alpha: s.base.alpha.xx,
            beta: s.base.beta,
            center: [s.cloak.center.x, s.cloak.center.y],
            a: s.cloak.a,
            b: s.cloak.b,
            epsilon: s.cloak.epsilon,
            grid: s.grid,
            blanket_factor: s.blanket_factor,
            dt: s.dt,
            t_end: s.t_end,
            leakage_fraction: s.leakage_fraction,
            epsilon_sweep: vec![1e-2, 1e-3, 1e-4],
            consistency_points: 1000,
            tolerance: s.settings.tolerance,
            output: OutputToggles::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BenderConfig {
    pub k: f64,
    pub a: f64,
    pub phi: f64,
    pub r1: f64,
    pub rho: f64,
    pub alpha: f64,
    pub beta: f64,
    pub u_input: f64,
    pub variants: Vec<BenderVariant>,
    pub grid: [usize; 2],
    pub dt: f64,
    pub snapshot_times: Vec<f64>,
    pub threshold: f64,
    pub arrival_dt: f64,
    pub arrival_steps_per_chunk: usize,
    pub arrival_t_max: f64,
    pub tolerance: f64,
    pub output: OutputToggles,
}

impl Default for BenderConfig {
    fn default() -> Self {
        let s = BenderScenario::default();
        Self {
            k: s.spec.k,
            a: s.spec.a,
            phi: s.spec.phi,
            r1: s.spec.r1,
            rho: s.base.rho,
            alpha: s.base.alpha.xx,
            beta: s.base.beta,
            u_input: s.u_input,
            variants: s.variants,
            grid: s.grid,
            dt: s.dt,
            snapshot_times: s.snapshot_times,
            threshold: s.threshold,
            arrival_dt: s.arrival_dt,
            arrival_steps_per_chunk: s.arrival_steps_per_chunk,
            arrival_t_max: s.arrival_t_max,
            tolerance: s.settings.tolerance,
            output: OutputToggles::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PullbackMap {
    /// Uniform scale of the reaction–diffusion benchmark.
    Scale,
    /// Bender map of the driven plate.
    Bender,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PullbackConfig {
    pub map: PullbackMap,
    pub factor: f64,
    pub k: f64,
    pub a: f64,
    pub phi: f64,
    pub r1: f64,
    /// Cells per side of each run; fields are written for the last one.
    pub grids: Vec<usize>,
    pub tolerance: f64,
    pub output: OutputToggles,
}

impl Default for PullbackConfig {
    fn default() -> Self {
        let spec = BenderSpec::default();
        Self {
            map: PullbackMap::Bender,
            factor: 2.0,
            k: spec.k,
            a: spec.a,
            phi: spec.phi,
            r1: spec.r1,
            grids: vec![16, 32, 64, 128],
            tolerance: SolverSettings::default().tolerance,
            output: OutputToggles::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StudyKind {
    /// Steady reaction–diffusion benchmark, L2 error against the exact profile.
    Sinh,
    /// Transient rod, time-step self-convergence.
    RodDt,
    PullbackScale,
    PullbackBender,
    /// Cloak exterior mismatch and leakage across `epsilons`.
    CloakEpsilon,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ConvergenceConfig {
    pub studies: Vec<StudyKind>,
    pub sinh_levels: Vec<usize>,
    pub rod_cells: usize,
    pub rod_time: f64,
    pub rod_steps: Vec<usize>,
    pub pullback_levels: Vec<usize>,
    pub epsilons: Vec<f64>,
    pub cloak_grid: [usize; 2],
    pub output: OutputToggles,
}

impl Default for ConvergenceConfig {
    fn default() -> Self {
        Self {
            studies: vec![
                StudyKind::Sinh,
                StudyKind::RodDt,
                StudyKind::PullbackScale,
                StudyKind::PullbackBender,
                StudyKind::CloakEpsilon,
            ],
            sinh_levels: vec![8, 16, 32, 64],
            rod_cells: 128,
            rod_time: 0.1,
            rod_steps: vec![10, 20, 40, 80],
            pullback_levels: vec![16, 32, 64, 128],
            epsilons: vec![1e-2, 1e-3, 1e-4],
            cloak_grid: [192, 96],
            output: OutputToggles::default(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CustomConfig {
    pub domain_x: [f64; 2],
    pub domain_y: [f64; 2],
    pub grid: [usize; 2],
    /// Material on the rectangle, before any map.
    pub params: ParameterField,
    /// Conditions on `left`, `right`, `bottom`, `top`.
    pub bcs: BoundaryConditions,
    /// Optional map; the mesh is mapped and the material pushed forward.
    pub map: Option<Mapping>,
    /// Steady solve when absent.
    pub transient: Option<TransientConfig>,
    pub tolerance: f64,
    pub output: OutputToggles,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransientConfig {
    pub dt: f64,
    pub t_end: f64,
    #[serde(default)]
    pub snapshot_times: Vec<f64>,
    /// Uniform initial value of the free nodes.
    #[serde(default)]
    pub initial: f64,
}

impl Default for CustomConfig {
    fn default() -> Self {
        Self {
            domain_x: [0.0, 1.0],
            domain_y: [0.0, 1.0],
            grid: [32, 32],
            params: homogeneous_params(1.0, 1.0, 0.0, 0.0).expect("valid defaults"),
            bcs: BoundaryConditions::new()
                .with("left", BoundaryCondition::dirichlet(1.0))
                .with("right", BoundaryCondition::dirichlet(0.0))
                .with("bottom", BoundaryCondition::insulated())
                .with("top", BoundaryCondition::insulated()),
            map: None,
            transient: None,
            tolerance: SolverSettings::default().tolerance,
            output: OutputToggles::default(),
        }
    }
}

/// Parses and validates a configuration document.
pub fn parse_config(text: &str) -> Result<RunConfig, CliError> {
    let config: RunConfig = serde_json::from_str(text).map_err(|e| {
        CliError::Config(if e.line() > 0 {
            format!("line {}, column {}: {e}", e.line(), e.column())
        } else {
            e.to_string()
        })
    })?;
    config.validate()?;
    Ok(config)
}

fn bad(key: &str, msg: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("`{key}`: {msg}"))
}

fn positive(key: &str, v: f64) -> Result<(), CliError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(bad(key, format!("must be > 0, got {v}")))
    }
}

fn non_negative(key: &str, v: f64) -> Result<(), CliError> {
    if v >= 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(bad(key, format!("must be >= 0, got {v}")))
    }
}

fn range(key: &str, r: [f64; 2]) -> Result<(), CliError> {
    if r[0].is_finite() && r[1].is_finite() && r[0] < r[1] {
        Ok(())
    } else {
        Err(bad(key, format!("must be an increasing pair, got {r:?}")))
    }
}

fn grid(key: &str, g: [usize; 2]) -> Result<(), CliError> {
    if g[0] >= 1 && g[1] >= 1 {
        Ok(())
    } else {
        Err(bad(
            key,
            format!("needs at least one cell per direction, got {g:?}"),
        ))
    }
}

fn tolerance(v: f64) -> Result<(), CliError> {
    if v > 0.0 && v < 1.0 {
        Ok(())
    } else {
        Err(bad("tolerance", format!("must lie in (0, 1), got {v}")))
    }
}

fn doubling(key: &str, levels: &[usize]) -> Result<(), CliError> {
    if levels.len() >= 3 && levels[0] >= 1 && levels.windows(2).all(|w| w[1] == 2 * w[0]) {
        Ok(())
    } else {
        Err(bad(
            key,
            format!("needs at least 3 doubling levels, got {levels:?}"),
        ))
    }
}

fn core(err: commfield_core::Error) -> CliError {
    CliError::Config(err.to_string())
}

impl RunConfig {
    pub fn kind(&self) -> &'static str {
        match self {
            RunConfig::Cloak(_) => "cloak",
            RunConfig::Bender(_) => "bender",
            RunConfig::Pullback(_) => "pullback",
            RunConfig::Convergence(_) => "convergence",
            RunConfig::Custom(_) => "custom",
        }
    }

    /// Default configuration of a scenario kind.
    pub fn default_for(kind: &str) -> Result<Self, CliError> {
        parse_config(&format!(
            "{{\"scenario\":{}}}",
            serde_json::Value::String(kind.to_string())
        ))
    }

    pub fn output(&self) -> OutputToggles {
        match self {
            RunConfig::Cloak(c) => c.output,
            RunConfig::Bender(c) => c.output,
            RunConfig::Pullback(c) => c.output,
            RunConfig::Convergence(c) => c.output,
            RunConfig::Custom(c) => c.output,
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        match self {
            RunConfig::Cloak(c) => c.validate(),
            RunConfig::Bender(c) => c.validate(),
            RunConfig::Pullback(c) => c.validate(),
            RunConfig::Convergence(c) => c.validate(),
            RunConfig::Custom(c) => c.validate(),
        }
    }
}

impl CloakConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        for (k, r) in [
            ("domain_x", self.domain_x),
            ("domain_y", self.domain_y),
            ("source_x", self.source_x),
            ("source_y", self.source_y),
        ] {
            range(k, r)?;
        }
        positive("a", self.a)?;
        positive("b", self.b)?;
        if self.a >= self.b {
            return Err(bad(
                "a",
                format!("must be smaller than `b` ({} >= {})", self.a, self.b),
            ));
        }
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(bad(
                "epsilon",
                format!("must lie in (0, 1), got {}", self.epsilon),
            ));
        }
        for e in &self.epsilon_sweep {
            if !(*e > 0.0 && *e < 1.0) {
                return Err(bad(
                    "epsilon_sweep",
                    format!("values must lie in (0, 1), got {e}"),
                ));
            }
        }
        positive("rho", self.rho)?;
        positive("alpha", self.alpha)?;
        non_negative("beta", self.beta)?;
        grid("grid", self.grid)?;
        positive("dt", self.dt)?;
        positive("t_end", self.t_end)?;
        if !(self.blanket_factor > 0.0 && self.blanket_factor <= 1.0) {
            return Err(bad(
                "blanket_factor",
                format!("must lie in (0, 1], got {}", self.blanket_factor),
            ));
        }
        if !(self.leakage_fraction > 0.0 && self.leakage_fraction <= 1.0) {
            return Err(bad(
                "leakage_fraction",
                format!("must lie in (0, 1], got {}", self.leakage_fraction),
            ));
        }
        tolerance(self.tolerance)?;
        self.scenario().validate().map_err(core)
    }

    pub fn scenario(&self) -> CloakScenario {
        CloakScenario {
            domain: Rect::new(self.domain_x, self.domain_y),
            source: Rect::new(self.source_x, self.source_y),
            source_strength: self.source_strength,
            base: ParameterSample {
                rho: self.rho,
                alpha: SymTensor2::isotropic(self.alpha),
                beta: self.beta,
                f: 0.0,
            },
            cloak: CloakSpec {
                center: Point::new(self.center[0], self.center[1]),
                a: self.a,
                b: self.b,
                epsilon: self.epsilon,
            },
            grid: self.grid,
            blanket_factor: self.blanket_factor,
            dt: self.dt,
            t_end: self.t_end,
            leakage_fraction: self.leakage_fraction,
            settings: SolverSettings {
                tolerance: self.tolerance,
                ..Default::default()
            },
        }
    }
}

impl BenderConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        for (k, v) in [
            ("k", self.k),
            ("a", self.a),
            ("phi", self.phi),
            ("r1", self.r1),
        ] {
            positive(k, v)?;
        }
        if self.variants.contains(&BenderVariant::Eq11Paper) {
            let s = self.spec();
            if !s.is_quarter_unit() {
                let key = if (s.phi - std::f64::consts::FRAC_PI_2).abs() > 1e-12 {
                    "phi"
                } else {
                    "k"
                };
                return Err(bad(
                    key,
                    format!(
                        "variant eq11-paper requires phi = π/2 and k = 1 (got phi = {}, k = {})",
                        self.phi, self.k
                    ),
                ));
            }
        }
        if self.variants.is_empty() {
            return Err(bad("variants", "must name at least one variant"));
        }
        positive("rho", self.rho)?;
        positive("alpha", self.alpha)?;
        non_negative("beta", self.beta)?;
        grid("grid", self.grid)?;
        positive("dt", self.dt)?;
        positive("arrival_dt", self.arrival_dt)?;
        positive("arrival_t_max", self.arrival_t_max)?;
        if self.arrival_steps_per_chunk == 0 {
            return Err(bad("arrival_steps_per_chunk", "must be >= 1"));
        }
        if !(self.threshold > 0.0 && self.threshold < 1.0) {
            return Err(bad(
                "threshold",
                format!("must lie in (0, 1), got {}", self.threshold),
            ));
        }
        if self.snapshot_times.is_empty() {
            return Err(bad("snapshot_times", "must not be empty"));
        }
        for t in &self.snapshot_times {
            positive("snapshot_times", *t)?;
        }
        tolerance(self.tolerance)?;
        self.scenario().validate().map_err(core)
    }

    pub fn spec(&self) -> BenderSpec {
        BenderSpec {
            k: self.k,
            a: self.a,
            phi: self.phi,
            r1: self.r1,
        }
    }

    pub fn scenario(&self) -> BenderScenario {
        BenderScenario {
            spec: self.spec(),
            base: ParameterSample {
                rho: self.rho,
                alpha: SymTensor2::isotropic(self.alpha),
                beta: self.beta,
                f: 0.0,
            },
            u_input: self.u_input,
            variants: self.variants.clone(),
            grid: self.grid,
            dt: self.dt,
            snapshot_times: self.snapshot_times.clone(),
            threshold: self.threshold,
            arrival_dt: self.arrival_dt,
            arrival_steps_per_chunk: self.arrival_steps_per_chunk,
            arrival_t_max: self.arrival_t_max,
            settings: SolverSettings {
                tolerance: self.tolerance,
                ..Default::default()
            },
        }
    }
}

impl PullbackConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        positive("factor", self.factor)?;
        for (k, v) in [
            ("k", self.k),
            ("a", self.a),
            ("phi", self.phi),
            ("r1", self.r1),
        ] {
            positive(k, v)?;
        }
        self.spec().validate().map_err(core)?;
        if self.grids.is_empty() || self.grids.contains(&0) {
            return Err(bad("grids", "must list at least one positive cell count"));
        }
        tolerance(self.tolerance)
    }

    pub fn spec(&self) -> BenderSpec {
        BenderSpec {
            k: self.k,
            a: self.a,
            phi: self.phi,
            r1: self.r1,
        }
    }
}

impl ConvergenceConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        if self.studies.is_empty() {
            return Err(bad("studies", "must name at least one study"));
        }
        doubling("sinh_levels", &self.sinh_levels)?;
        doubling("rod_steps", &self.rod_steps)?;
        doubling("pullback_levels", &self.pullback_levels)?;
        if self.rod_cells == 0 {
            return Err(bad("rod_cells", "must be >= 1"));
        }
        positive("rod_time", self.rod_time)?;
        if self.epsilons.is_empty() || self.epsilons.iter().any(|e| !(*e > 0.0 && *e < 1.0)) {
            return Err(bad("epsilons", "values must lie in (0, 1)"));
        }
        grid("cloak_grid", self.cloak_grid)
    }
}

impl CustomConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        range("domain_x", self.domain_x)?;
        range("domain_y", self.domain_y)?;
        grid("grid", self.grid)?;
        tolerance(self.tolerance)?;
        self.params.validate().map_err(|e| bad("params", e))?;
        if let Some(map) = &self.map {
            map.validate().map_err(|e| bad("map", e))?;
        }
        for tag in self.bcs.iter().map(|(t, _)| t) {
            if !["left", "right", "bottom", "top"].contains(&tag.as_str()) {
                return Err(bad("bcs", format!("unknown boundary tag `{tag}`")));
            }
        }
        for tag in ["left", "right", "bottom", "top"] {
            if self.bcs.get(tag).is_none() {
                return Err(bad("bcs", format!("missing boundary tag `{tag}`")));
            }
        }
        if let Some(t) = &self.transient {
            positive("transient.dt", t.dt)?;
            positive("transient.t_end", t.t_end)?;
            for s in &t.snapshot_times {
                non_negative("transient.snapshot_times", *s)?;
            }
        }
        Ok(())
    }
}
