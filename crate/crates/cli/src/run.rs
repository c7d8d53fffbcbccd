//! Scenario dispatch: turns a validated configuration into a report and fields.

use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use commfield_core::experiments::convergence::{
    pullback_study, rod_dt_study, sinh_benchmark_error,
};
use commfield_core::experiments::{
    cloak_consistency, convergence_study, epsilon_sweep, pullback_run, run_bender_experiment,
    run_cloak_experiment, ConvergenceStudy, ExperimentReport, Provenance, PullbackProblem, Rod,
    VariantMetrics,
};
use commfield_core::material::{ParameterField, Rule};
use commfield_core::mesh::{build_cartesian_mesh, map_mesh, Mesh};
use commfield_core::solver::{
    assemble_system, run_transient_with, solve_steady_with, FieldSolution, SolverSettings,
};
use commfield_core::transform::CloakSpec;
use commfield_core::Point;

use crate::config::{
    BenderConfig, CloakConfig, ConvergenceConfig, CustomConfig, PullbackConfig, PullbackMap,
    RunConfig, StudyKind,
};
use crate::output::{emit_fields, format_metrics, write_file, NamedField};
use crate::CliError;

pub const METRICS_FILE: &str = "metrics.json";

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub report: ExperimentReport,
    pub meshes: Vec<Mesh>,
    pub fields: Vec<NamedField>,
}

/// Runs the configured scenario. `seed` drives only the random sample points
/// of the cloak consistency check.
pub fn run(config: &RunConfig, seed: u64) -> Result<RunOutput, CliError> {
    config.validate()?;
    let mut out = match config {
        RunConfig::Cloak(c) => run_cloak(c, seed)?,
        RunConfig::Bender(c) => run_bender(c)?,
        RunConfig::Pullback(c) => run_pullback(c)?,
        RunConfig::Convergence(c) => run_convergence(c)?,
        RunConfig::Custom(c) => run_custom(c)?,
    };
    out.report
        .provenance
        .notes
        .insert("seed".into(), seed.to_string());
    out.report.validate()?;
    Ok(out)
}

/// Runs the scenario and writes the metrics report plus enabled field files.
pub fn execute(config: &RunConfig, seed: u64, dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    let out = run(config, seed)?;
    let mut written = emit_fields(dir, &out.meshes, &out.fields, config.output())?;
    let path = dir.join(METRICS_FILE);
    write_file(&path, &format_metrics(&out.report, config, seed))?;
    written.push(path);
    Ok(written)
}

fn eps_key(prefix: &str, eps: f64) -> String {
    format!("{prefix}_eps_{eps:e}")
}

/// Uniform random points in the unclamped shell `a + εa < r' <= b`.
pub fn shell_points(spec: &CloakSpec, count: usize, seed: u64) -> Vec<Point> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let inner = spec.a * (1.0 + spec.epsilon);
    (0..count)
        .map(|_| {
            let r = inner + (spec.b - inner) * (1.0 - rng.gen::<f64>());
            let t = std::f64::consts::TAU * rng.gen::<f64>();
            Point::new(spec.center.x + r * t.cos(), spec.center.y + r * t.sin())
        })
        .collect()
}

fn run_cloak(c: &CloakConfig, seed: u64) -> Result<RunOutput, CliError> {
    let scenario = c.scenario();
    let outcome = run_cloak_experiment(&scenario)?;
    let mut report = outcome.report;
    if !c.epsilon_sweep.is_empty() {
        let mut sweep = VariantMetrics::new("epsilon-sweep");
        for p in epsilon_sweep(&scenario, &c.epsilon_sweep)? {
            sweep = sweep
                .with_extra(
                    &eps_key("exterior_mismatch", p.epsilon),
                    p.exterior_mismatch,
                )
                .with_extra(&eps_key("interior_leakage", p.epsilon), p.interior_leakage);
        }
        report.variants.push(sweep);
    }
    if c.consistency_points > 0 {
        let points = shell_points(&scenario.cloak, c.consistency_points, seed);
        let err = cloak_consistency(&scenario.cloak, &scenario.base, &points)?;
        report.variants.push(
            VariantMetrics::new("closed-form-consistency")
                .with_extra("max_relative_error", err)
                .with_extra("points", points.len() as f64),
        );
    }
    let fields = outcome
        .runs
        .into_iter()
        .flat_map(|run| {
            let name = run.variant.name();
            [
                NamedField {
                    name: format!("{name}_steady"),
                    mesh: 0,
                    values: run.steady.values,
                },
                NamedField {
                    name: format!("{name}_transient"),
                    mesh: 0,
                    values: run.transient.values,
                },
            ]
        })
        .collect();
    Ok(RunOutput {
        report,
        meshes: vec![outcome.mesh],
        fields,
    })
}

fn run_bender(c: &BenderConfig) -> Result<RunOutput, CliError> {
    let outcome = run_bender_experiment(&c.scenario())?;
    let mut fields = Vec::new();
    for run in outcome.runs {
        let name = run.variant.name();
        if c.output.snapshots {
            for s in &run.transient.snapshots {
                fields.push(NamedField {
                    name: format!("{name}_t{}", s.time),
                    mesh: 0,
                    values: s.values.clone(),
                });
            }
        }
        fields.push(NamedField {
            name: format!("{name}_steady"),
            mesh: 0,
            values: run.steady.values,
        });
        fields.push(NamedField {
            name: format!("{name}_transient"),
            mesh: 0,
            values: run.transient.values,
        });
    }
    Ok(RunOutput {
        report: outcome.report,
        meshes: vec![outcome.mesh],
        fields,
    })
}

fn study_metrics(name: &str, study: &ConvergenceStudy) -> VariantMetrics {
    let mut m = VariantMetrics::new(name);
    for (level, value) in study.levels.iter().zip(&study.metrics) {
        m = m.with_extra(&format!("metric_{level}"), *value);
    }
    for (k, r) in study.ratios.iter().enumerate() {
        if r.is_finite() {
            m = m.with_extra(&format!("ratio_{k}"), *r);
        }
    }
    if let Some(order) = study.order {
        m = m.with_extra("order", order.max(0.0));
    }
    m
}

fn pullback_problem(c: &PullbackConfig) -> Result<PullbackProblem, CliError> {
    let mut problem = match c.map {
        PullbackMap::Scale => PullbackProblem::scale_benchmark(c.factor)?,
        PullbackMap::Bender => PullbackProblem::bender_plate(c.spec())?,
    };
    problem.settings.tolerance = c.tolerance;
    Ok(problem)
}

fn run_pullback(c: &PullbackConfig) -> Result<RunOutput, CliError> {
    let problem = pullback_problem(c)?;
    let mut metrics = VariantMetrics::new(match c.map {
        PullbackMap::Scale => "scale",
        PullbackMap::Bender => "bender",
    });
    let mut last = None;
    for &n in &c.grids {
        let run = pullback_run(&problem, n, n)?;
        metrics = metrics.with_extra(&format!("mismatch_{n}"), run.mismatch);
        last = Some(run);
    }
    let last = last.expect("grids validated nonempty");
    let report = ExperimentReport {
        scenario: "pullback".into(),
        variants: vec![metrics],
        provenance: Provenance {
            grids: c.grids.iter().map(|&n| [n, n]).collect(),
            tolerance: c.tolerance,
            ..Default::default()
        },
    };
    Ok(RunOutput {
        report,
        meshes: vec![last.original_mesh, last.mapped_mesh],
        fields: vec![
            NamedField {
                name: "original".into(),
                mesh: 0,
                values: last.original.values,
            },
            NamedField {
                name: "mapped".into(),
                mesh: 1,
                values: last.mapped.values,
            },
        ],
    })
}

fn run_convergence(c: &ConvergenceConfig) -> Result<RunOutput, CliError> {
    let mut variants = Vec::new();
    let mut grids = Vec::new();
    for study in &c.studies {
        match study {
            StudyKind::Sinh => {
                let s = convergence_study(&c.sinh_levels, sinh_benchmark_error)?;
                grids.extend(c.sinh_levels.iter().map(|&n| [n, n]));
                variants.push(study_metrics("sinh", &s));
            }
            StudyKind::RodDt => {
                let s = rod_dt_study(&Rod::unit(), c.rod_cells, c.rod_time, &c.rod_steps)?;
                grids.push([c.rod_cells, 1]);
                variants.push(study_metrics("rod-dt", &s));
            }
            StudyKind::PullbackScale => {
                let s =
                    pullback_study(&PullbackProblem::scale_benchmark(2.0)?, &c.pullback_levels)?;
                grids.extend(c.pullback_levels.iter().map(|&n| [n, n]));
                variants.push(study_metrics("pullback-scale", &s));
            }
            StudyKind::PullbackBender => {
                let s = pullback_study(
                    &PullbackProblem::bender_plate(Default::default())?,
                    &c.pullback_levels,
                )?;
                grids.extend(c.pullback_levels.iter().map(|&n| [n, n]));
                variants.push(study_metrics("pullback-bender", &s));
            }
            StudyKind::CloakEpsilon => {
                let scenario = commfield_core::experiments::CloakScenario {
                    grid: c.cloak_grid,
                    ..Default::default()
                };
                let mut m = VariantMetrics::new("cloak-epsilon");
                for p in epsilon_sweep(&scenario, &c.epsilons)? {
                    m = m
                        .with_extra(
                            &eps_key("exterior_mismatch", p.epsilon),
                            p.exterior_mismatch,
                        )
                        .with_extra(&eps_key("interior_leakage", p.epsilon), p.interior_leakage);
                }
                grids.push(c.cloak_grid);
                variants.push(m);
            }
        }
    }
    grids.sort_unstable();
    grids.dedup();
    Ok(RunOutput {
        report: ExperimentReport {
            scenario: "convergence".into(),
            variants,
            provenance: Provenance {
                grids,
                tolerance: SolverSettings::default().tolerance,
                ..Default::default()
            },
        },
        meshes: Vec::new(),
        fields: Vec::new(),
    })
}

fn run_custom(c: &CustomConfig) -> Result<RunOutput, CliError> {
    let settings = SolverSettings {
        tolerance: c.tolerance,
        ..Default::default()
    };
    let rect = build_cartesian_mesh(c.domain_x, c.domain_y, c.grid[0], c.grid[1])?;
    let (mesh, params) = match &c.map {
        None => (rect, c.params.clone()),
        Some(map) => (
            map_mesh(&rect, map)?,
            ParameterField::from_rule(Rule::PushForward {
                map: map.clone(),
                base: Box::new(c.params.clone()),
            }),
        ),
    };
    let system = assemble_system(&mesh, &params, &c.bcs)?;
    let solution = match &c.transient {
        None => solve_steady_with(&system, &settings)?,
        Some(t) => {
            let u0 = FieldSolution::new(
                system
                    .fixed
                    .iter()
                    .map(|v| v.unwrap_or(t.initial))
                    .collect(),
            );
            run_transient_with(&system, &u0, t.dt, t.t_end, &t.snapshot_times, &settings)?
        }
    };
    let max = solution
        .values
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max);
    let min = solution
        .values
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    let abs_max = solution.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let mut fields = Vec::new();
    if c.output.snapshots {
        for s in &solution.snapshots {
            fields.push(NamedField {
                name: format!("u_t{}", s.time),
                mesh: 0,
                values: s.values.clone(),
            });
        }
    }
    fields.push(NamedField {
        name: "u".into(),
        mesh: 0,
        values: solution.values,
    });
    let transient = c.transient.as_ref();
    Ok(RunOutput {
        report: ExperimentReport {
            scenario: "custom".into(),
            variants: vec![VariantMetrics::new("custom")
                .with_extra("u_abs_max", abs_max)
                .with_extra("u_range", max - min)],
            provenance: Provenance {
                grids: vec![c.grid],
                dt: transient.map(|t| t.dt),
                t_end: transient.map(|t| t.t_end),
                tolerance: c.tolerance,
                ..Default::default()
            },
        },
        meshes: vec![mesh],
        fields,
    })
}
