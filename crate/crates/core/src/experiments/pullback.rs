//! Discrete check of `u'(x'(x)) = u(x)`: solve on a rectangle, solve again on
//! its image with pushed-forward parameters, compare at corresponding nodes.

use crate::material::{homogeneous_params, ParameterField, Rule};
use crate::mesh::{build_cartesian_mesh, map_mesh, Mesh};
use crate::region::Rect;
use crate::solver::{
    assemble_system, solve_steady_with, BoundaryCondition, BoundaryConditions, BoundaryFn,
    FieldSolution, SolverSettings,
};
use crate::transform::{BenderSpec, Mapping};
use crate::{Error, Result};

use super::metrics::relative_l2;

#[derive(Debug, Clone)]
pub struct PullbackProblem {
    pub map: Mapping,
    /// Original domain; tags `left`, `right`, `bottom`, `top`.
    pub domain: Rect,
    pub base: ParameterField,
    pub bcs: BoundaryConditions,
    pub settings: SolverSettings,
}

#[derive(Debug, Clone)]
pub struct PullbackRun {
    pub original_mesh: Mesh,
    pub original: FieldSolution,
    pub mapped_mesh: Mesh,
    pub mapped: FieldSolution,
    pub mismatch: f64,
}

/// Boundary data carried to the image domain: `g'(x') = g(x(x'))`.
fn map_bcs(bcs: &BoundaryConditions, map: &Mapping) -> Result<BoundaryConditions> {
    let mut out = BoundaryConditions::new();
    for (tag, bc) in bcs.iter() {
        let mapped = match bc {
            BoundaryCondition::Dirichlet { value } => BoundaryCondition::dirichlet(*value),
            BoundaryCondition::DirichletFn(f) => {
                let (f, map) = (f.clone(), map.clone());
                BoundaryCondition::DirichletFn(BoundaryFn::new(move |q| {
                    map.inverse(q).map(|p| f.eval(p)).unwrap_or(f64::NAN)
                }))
            }
            BoundaryCondition::Neumann { flux } if *flux == 0.0 => BoundaryCondition::insulated(),
            BoundaryCondition::Neumann { .. } => {
                return Err(Error::Unsupported(format!(
                    "nonzero Neumann data on `{tag}` cannot be carried through the map"
                )))
            }
        };
        out = out.with(tag, mapped);
    }
    Ok(out)
}

/// Runs both problems on an `nx × ny` grid.
pub fn pullback_run(problem: &PullbackProblem, nx: usize, ny: usize) -> Result<PullbackRun> {
    let d = problem.domain;
    let original_mesh = build_cartesian_mesh(d.x, d.y, nx, ny)?;
    let sys = assemble_system(&original_mesh, &problem.base, &problem.bcs)?;
    let original = solve_steady_with(&sys, &problem.settings)?;

    let mapped_mesh = map_mesh(&original_mesh, &problem.map)?;
    let pushed = ParameterField::from_rule(Rule::PushForward {
        map: problem.map.clone(),
        base: Box::new(problem.base.clone()),
    });
    let mapped_bcs = map_bcs(&problem.bcs, &problem.map)?;
    let sys = assemble_system(&mapped_mesh, &pushed, &mapped_bcs)?;
    let mapped = solve_steady_with(&sys, &problem.settings)?;

    let mismatch = relative_l2(&original_mesh, &original.values, &mapped.values, |_| true)?;
    Ok(PullbackRun {
        original_mesh,
        original,
        mapped_mesh,
        mapped,
        mismatch,
    })
}

impl PullbackProblem {
    /// Reaction–diffusion benchmark on the unit square (`u = 1` left, `u = 0`
    /// right, insulated top and bottom, `β = 4`) under a uniform scale.
    pub fn scale_benchmark(factor: f64) -> Result<Self> {
        Ok(Self {
            map: Mapping::scale(factor)?,
            domain: Rect::new([0.0, 1.0], [0.0, 1.0]),
            base: homogeneous_params(1.0, 1.0, 4.0, 0.0)?,
            bcs: BoundaryConditions::new()
                .with("left", BoundaryCondition::dirichlet(1.0))
                .with("right", BoundaryCondition::dirichlet(0.0))
                .with("top", BoundaryCondition::insulated())
                .with("bottom", BoundaryCondition::insulated()),
            settings: SolverSettings::default(),
        })
    }

    /// The bender plate driven along its length: `u = 1 + cos(πx/a)/2` at
    /// `y = 0`, `u = 0` at `y = ka`, insulated sides, unit medium with `β = 1`.
    /// The inlet profile and the reaction keep the solution genuinely 2D.
    pub fn bender_plate(spec: BenderSpec) -> Result<Self> {
        let width = spec.a;
        let inlet =
            BoundaryFn::new(move |p| 1.0 + 0.5 * (std::f64::consts::PI * p.x / width).cos());
        Ok(Self {
            map: Mapping::bender(spec)?,
            domain: spec.plate(),
            base: homogeneous_params(1.0, 1.0, 1.0, 0.0)?.with_bounds(spec.plate()),
            bcs: BoundaryConditions::new()
                .with("bottom", BoundaryCondition::DirichletFn(inlet))
                .with("top", BoundaryCondition::dirichlet(0.0))
                .with("left", BoundaryCondition::insulated())
                .with("right", BoundaryCondition::insulated()),
            settings: SolverSettings::default(),
        })
    }
}

/// Relative L2 mismatch of the pulled-back transformed solution.
pub fn pullback_check(problem: &PullbackProblem, nx: usize, ny: usize) -> Result<f64> {
    pullback_run(problem, nx, ny).map(|r| r.mismatch)
}
