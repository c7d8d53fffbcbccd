//! Grid and time-step refinement studies.

use serde::{Deserialize, Serialize};

use super::pullback::{pullback_check, PullbackProblem};
use super::rod::Rod;
use crate::material::homogeneous_params;
use crate::mesh::{bilinear_map, build_cartesian_mesh, shape_functions, Mesh};
use crate::solver::{
    assemble_system, run_transient_with, solve_steady_with, BoundaryCondition, BoundaryConditions,
    FieldSolution, SolverSettings,
};
use crate::{Error, Result};

/// Metric per refinement level, coarsest first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceStudy {
    /// Refinement parameter per level (cells per side, or steps per unit time).
    pub levels: Vec<usize>,
    pub metrics: Vec<f64>,
    /// `metric[k] / metric[k+1]`.
    pub ratios: Vec<f64>,
    /// Least-squares slope of `log metric` against `log(1/level)`; `None`
    /// when any metric is not positive.
    pub order: Option<f64>,
}

impl ConvergenceStudy {
    pub fn from_metrics(levels: Vec<usize>, metrics: Vec<f64>) -> Self {
        let ratios = metrics.windows(2).map(|w| w[0] / w[1]).collect();
        let order = fitted_order(&levels, &metrics);
        Self {
            levels,
            metrics,
            ratios,
            order,
        }
    }

    /// Each metric is below the previous one, or both sit under `floor`.
    pub fn is_decreasing(&self, floor: f64) -> bool {
        self.metrics
            .windows(2)
            .all(|w| w[1] < w[0] || w[1].max(w[0]) <= floor)
    }
}

pub fn fitted_order(levels: &[usize], metrics: &[f64]) -> Option<f64> {
    if levels.len() != metrics.len() || levels.len() < 2 || metrics.iter().any(|m| !(*m > 0.0)) {
        return None;
    }
    let xs: Vec<f64> = levels.iter().map(|&n| (n as f64).ln()).collect();
    let ys: Vec<f64> = metrics.iter().map(|m| m.ln()).collect();
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    Some(-sxy / sxx)
}

/// Runs `metric` on every level of a doubling sequence of at least three levels.
pub fn convergence_study(
    levels: &[usize],
    metric: impl Fn(usize) -> Result<f64>,
) -> Result<ConvergenceStudy> {
    if levels.len() < 3 {
        return Err(Error::Validation(format!(
            "convergence study needs at least 3 levels, got {}",
            levels.len()
        )));
    }
    if levels[0] == 0 || levels.windows(2).any(|w| w[1] != 2 * w[0]) {
        return Err(Error::Validation(format!("levels must double: {levels:?}")));
    }
    let metrics = levels
        .iter()
        .map(|&n| metric(n))
        .collect::<Result<Vec<_>>>()?;
    Ok(ConvergenceStudy::from_metrics(levels.to_vec(), metrics))
}

fn rod_bcs(u_left: f64) -> BoundaryConditions {
    BoundaryConditions::new()
        .with("left", BoundaryCondition::dirichlet(u_left))
        .with("right", BoundaryCondition::dirichlet(0.0))
        .with("top", BoundaryCondition::insulated())
        .with("bottom", BoundaryCondition::insulated())
}

/// Steady field of the unit-square rod problem with reaction `beta`.
pub fn rod_steady(n: usize, beta: f64) -> Result<(Mesh, FieldSolution)> {
    let mesh = build_cartesian_mesh([0.0, 1.0], [0.0, 1.0], n, n)?;
    let system = assemble_system(
        &mesh,
        &homogeneous_params(1.0, 1.0, beta, 0.0)?,
        &rod_bcs(1.0),
    )?;
    let u = solve_steady_with(&system, &SolverSettings::default())?;
    Ok((mesh, u))
}

/// `‖u_h − u‖_{L2}` over the mesh, with a 3×3 Gauss rule per element.
pub fn l2_error(mesh: &Mesh, values: &[f64], exact: impl Fn(crate::Point) -> f64) -> f64 {
    let g = (0.6_f64).sqrt();
    let rule = [(-g, 5.0 / 9.0), (0.0, 8.0 / 9.0), (g, 5.0 / 9.0)];
    let mut sum = 0.0;
    for (e, el) in mesh.elements().iter().enumerate() {
        let corners = mesh.element_corners(e);
        for &(xi, wx) in &rule {
            for &(eta, wy) in &rule {
                let (p, jac) = bilinear_map(&corners, xi, eta);
                let n = shape_functions(xi, eta);
                let uh: f64 = el.iter().zip(n).map(|(&k, w)| w * values[k]).sum();
                let d = uh - exact(p);
                sum += wx * wy * jac.determinant() * d * d;
            }
        }
    }
    sum.sqrt()
}

/// L2 error of the steady reaction–diffusion benchmark (`β = 4`) on an `n × n` grid.
pub fn sinh_benchmark_error(n: usize) -> Result<f64> {
    let rod = Rod {
        beta: 4.0,
        ..Rod::unit()
    };
    let (mesh, u) = rod_steady(n, rod.beta)?;
    Ok(l2_error(&mesh, &u.values, |p| rod.steady(p.x)))
}

/// Transient rod on an `n × 1` strip; returns the nodal field at `t`.
pub fn rod_transient(rod: &Rod, n: usize, dt: f64, t: f64) -> Result<(Mesh, FieldSolution)> {
    let mesh = build_cartesian_mesh([0.0, rod.length], [0.0, rod.length / n as f64], n, 1)?;
    let params = homogeneous_params(rod.rho, rod.alpha, rod.beta, 0.0)?;
    let system = assemble_system(&mesh, &params, &rod_bcs(rod.u_left))?;
    let u0 = FieldSolution::new(system.fixed.iter().map(|v| v.unwrap_or(0.0)).collect());
    let u = run_transient_with(&system, &u0, dt, t, &[], &SolverSettings::default())?;
    Ok((mesh, FieldSolution::new(u.values)))
}

/// `max |u_h − u|` of the transient rod against the series solution, over the nodes.
pub fn rod_transient_error(rod: &Rod, n: usize, dt: f64, t: f64) -> Result<f64> {
    let (mesh, u) = rod_transient(rod, n, dt, t)?;
    Ok(mesh
        .nodes()
        .iter()
        .zip(&u.values)
        .map(|(p, v)| (v - rod.value(t, p.x)).abs())
        .fold(0.0, f64::max))
}

/// Time-step self-convergence of the transient rod at fixed space grid `n`:
/// level `s` uses `dt = t/s`, and the metric of level `s` is
/// `max |u(dt) − u(dt/2)|`. First order shows as ratios near 2.
pub fn rod_dt_study(rod: &Rod, n: usize, t: f64, steps: &[usize]) -> Result<ConvergenceStudy> {
    if steps.len() < 3 {
        return Err(Error::Validation("dt study needs at least 3 levels".into()));
    }
    if steps[0] == 0 || steps.windows(2).any(|w| w[1] != 2 * w[0]) {
        return Err(Error::Validation(format!("levels must double: {steps:?}")));
    }
    let mut fields = Vec::with_capacity(steps.len() + 1);
    for &s in steps
        .iter()
        .chain(std::iter::once(&(2 * steps[steps.len() - 1])))
    {
        fields.push(rod_transient(rod, n, t / s as f64, t)?.1.values);
    }
    let metrics = fields
        .windows(2)
        .map(|w| {
            w[0].iter()
                .zip(&w[1])
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max)
        })
        .collect();
    Ok(ConvergenceStudy::from_metrics(steps.to_vec(), metrics))
}

pub fn pullback_study(problem: &PullbackProblem, levels: &[usize]) -> Result<ConvergenceStudy> {
    convergence_study(levels, |n| pullback_check(problem, n, n))
}
