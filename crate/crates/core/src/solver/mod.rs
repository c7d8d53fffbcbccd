//! Finite-element solution of `ρ ∂u/∂t = ∇·(α∇u) − βu + f` on structured quad meshes.

mod assembly;
mod bc;
pub mod sparse;

pub use assembly::{assemble_system, AssembledSystem};
pub use bc::{BoundaryCondition, BoundaryConditions, BoundaryFn};
pub use sparse::{conjugate_gradient, CgOutcome, CsrMatrix};

use serde::{Deserialize, Serialize};

use crate::mesh::{shape_functions, Mesh};
use crate::{Error, Point, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverSettings {
    /// Relative residual target of every linear solve.
    pub tolerance: f64,
    /// Iteration cap as a multiple of the unknown count.
    pub max_iter_factor: usize,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self {
            tolerance: 1e-10,
            max_iter_factor: 20,
        }
    }
}

impl SolverSettings {
    pub fn validate(&self) -> Result<()> {
        if !(self.tolerance > 0.0 && self.tolerance < 1.0) {
            return Err(Error::Validation(format!(
                "solver tolerance must lie in (0, 1), got {}",
                self.tolerance
            )));
        }
        if self.max_iter_factor == 0 {
            return Err(Error::Validation("max_iter_factor must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub time: f64,
    pub values: Vec<f64>,
}

/// Nodal field values, with the recorded time history for transient runs.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct FieldSolution {
    pub values: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub snapshots: Vec<Snapshot>,
}

impl FieldSolution {
    pub fn new(values: Vec<f64>) -> Self {
        Self {
            values,
            snapshots: Vec::new(),
        }
    }

    pub fn constant(n: usize, c: f64) -> Self {
        Self::new(vec![c; n])
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    /// Snapshot recorded at exactly `time`, if any.
    pub fn snapshot_at(&self, time: f64) -> Option<&Snapshot> {
        self.snapshots.iter().find(|s| s.time == time)
    }
}

fn max_iterations(n: usize, settings: &SolverSettings) -> usize {
    settings.max_iter_factor * n.max(1)
}

pub fn solve_steady(system: &AssembledSystem) -> Result<FieldSolution> {
    solve_steady_with(system, &SolverSettings::default())
}

/// Solves `K u = b` after symmetric elimination of the prescribed values;
/// CG starts from zero.
pub fn solve_steady_with(
    system: &AssembledSystem,
    settings: &SolverSettings,
) -> Result<FieldSolution> {
    settings.validate()?;
    if system.fixed.iter().all(Option::is_none) && system.reaction_integral <= 0.0 {
        return Err(Error::Setup(
            "steady problem is singular: no Dirichlet nodes and no reaction term".into(),
        ));
    }
    let mut rhs = system.load.clone();
    let k = system.stiffness.constrain(&mut rhs, &system.fixed);
    let mut u = vec![0.0; rhs.len()];
    let max_iter = max_iterations(u.len(), settings);
    conjugate_gradient(&k, &rhs, &mut u, settings.tolerance, max_iter)?;
    finish(u)
}

fn finish(u: Vec<f64>) -> Result<FieldSolution> {
    if u.iter().any(|v| !v.is_finite()) {
        return Err(Error::Solver("solution contains non-finite values".into()));
    }
    Ok(FieldSolution::new(u))
}

pub fn run_transient(
    system: &AssembledSystem,
    u0: &FieldSolution,
    dt: f64,
    t_end: f64,
    snapshot_times: &[f64],
) -> Result<FieldSolution> {
    run_transient_with(
        system,
        u0,
        dt,
        t_end,
        snapshot_times,
        &SolverSettings::default(),
    )
}

/// Backward Euler: `(M + Δt K) uⁿ⁺¹ = M uⁿ + Δt b`.
///
/// `dt` is shrunk uniformly so that a whole number of steps ends at `t_end`.
/// Requested snapshots are linearly interpolated between the bracketing steps;
/// the last snapshot is always `t_end`. Each step's CG starts from the
/// previous step's field.
pub fn run_transient_with(
    system: &AssembledSystem,
    u0: &FieldSolution,
    dt: f64,
    t_end: f64,
    snapshot_times: &[f64],
    settings: &SolverSettings,
) -> Result<FieldSolution> {
    settings.validate()?;
    let n = system.load.len();
    if u0.len() != n {
        return Err(Error::Validation(format!(
            "initial field has {} values for {n} nodes",
            u0.len()
        )));
    }
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::Validation(format!("dt must be > 0, got {dt}")));
    }
    if !(t_end >= 0.0 && t_end.is_finite()) {
        return Err(Error::Validation(format!(
            "t_end must be >= 0, got {t_end}"
        )));
    }
    let mass_diag = system.mass.diagonal();
    if let Some(i) = (0..n).find(|&i| system.fixed[i].is_none() && !(mass_diag[i] > 0.0)) {
        return Err(Error::Setup(format!(
            "node {i} is free but has no capacity (ρ = 0)"
        )));
    }

    let mut times: Vec<f64> = snapshot_times
        .iter()
        .copied()
        .filter(|&t| (0.0..t_end).contains(&t))
        .collect();
    if let Some(bad) = snapshot_times.iter().find(|t| !t.is_finite() || **t < 0.0) {
        return Err(Error::Validation(format!("invalid snapshot time {bad}")));
    }
    times.push(t_end);
    times.sort_by(f64::total_cmp);
    times.dedup();

    let steps = ((t_end / dt) - 1e-9).ceil().max(1.0) as usize;
    let dt = t_end / steps as f64;

    let mut snapshots = Vec::with_capacity(times.len());
    let mut next = times.iter().copied().peekable();
    while let Some(&t) = next.peek() {
        if t == 0.0 {
            snapshots.push(Snapshot {
                time: 0.0,
                values: u0.values.clone(),
            });
            next.next();
        } else {
            break;
        }
    }
    if t_end == 0.0 {
        return Ok(FieldSolution {
            values: u0.values.clone(),
            snapshots,
        });
    }

    let stepper = BackwardEuler::new(system, dt, settings)?;
    let mut prev = u0.values.clone();
    for step in 1..=steps {
        let mut cur = prev.clone();
        stepper.step(&prev, &mut cur)?;
        let (t0, t1) = (
            (step - 1) as f64 * dt,
            if step == steps {
                t_end
            } else {
                step as f64 * dt
            },
        );
        while let Some(&t) = next.peek() {
            if t > t1 && step != steps {
                break;
            }
            let w = ((t - t0) / (t1 - t0)).clamp(0.0, 1.0);
            let values = prev
                .iter()
                .zip(&cur)
                .map(|(a, b)| a + w * (b - a))
                .collect();
            snapshots.push(Snapshot { time: t, values });
            next.next();
        }
        prev = cur;
    }
    if prev.iter().any(|v| !v.is_finite()) {
        return Err(Error::Solver(
            "transient solution contains non-finite values".into(),
        ));
    }
    Ok(FieldSolution {
        values: prev,
        snapshots,
    })
}

/// One backward-Euler step `(M + Δt K) uⁿ⁺¹ = M uⁿ + Δt b` with the
/// constrained matrix factored out of the time loop.
pub struct BackwardEuler<'a> {
    system: &'a AssembledSystem,
    dt: f64,
    matrix: CsrMatrix,
    lift: Vec<f64>,
    tolerance: f64,
    max_iter: usize,
}

impl<'a> BackwardEuler<'a> {
    pub fn new(system: &'a AssembledSystem, dt: f64, settings: &SolverSettings) -> Result<Self> {
        settings.validate()?;
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::Validation(format!("dt must be > 0, got {dt}")));
        }
        let n = system.load.len();
        let mut lift = vec![0.0; n];
        let matrix = system
            .mass
            .add_scaled(dt, &system.stiffness)
            .constrain(&mut lift, &system.fixed);
        Ok(Self {
            system,
            dt,
            matrix,
            lift,
            tolerance: settings.tolerance,
            max_iter: max_iterations(n, settings),
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Advances `prev` by one step into `next`; `next` is the CG starting guess.
    pub fn step(&self, prev: &[f64], next: &mut [f64]) -> Result<CgOutcome> {
        let sys = self.system;
        let mut rhs = vec![0.0; prev.len()];
        sys.mass.mul_vec_into(prev, &mut rhs);
        for (i, r) in rhs.iter_mut().enumerate() {
            *r = match sys.fixed[i] {
                Some(v) => v,
                None => *r + self.dt * sys.load[i] + self.lift[i],
            };
        }
        conjugate_gradient(&self.matrix, &rhs, next, self.tolerance, self.max_iter)
    }
}

/// Bilinear interpolation of nodal values at `p`.
pub fn sample_solution(mesh: &Mesh, solution: &FieldSolution, p: Point) -> Result<f64> {
    sample_values(mesh, &solution.values, p)
}

pub fn sample_values(mesh: &Mesh, values: &[f64], p: Point) -> Result<f64> {
    if values.len() != mesh.node_count() {
        return Err(Error::Comparison(format!(
            "{} values for a mesh with {} nodes",
            values.len(),
            mesh.node_count()
        )));
    }
    let (e, [xi, eta]) = mesh.locate_point(p)?;
    let n = shape_functions(xi, eta);
    Ok(mesh.elements()[e]
        .iter()
        .zip(n)
        .map(|(&k, w)| w * values[k])
        .sum())
}
