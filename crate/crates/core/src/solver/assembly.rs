use rayon::prelude::*;

use super::bc::{BoundaryCondition, BoundaryConditions};
use super::sparse::CsrMatrix;
use crate::material::ParameterField;
use crate::mesh::{bilinear_map, gauss_points, shape_functions, shape_gradients, Mesh};
use crate::{Error, Result};

/// Discrete images of every term of the field equation on one mesh.
///
/// `stiffness` holds the diffusion and reaction terms, `mass` the `ρ` term and
/// `load` the source plus Neumann data. Prescribed values live in `fixed`.
#[derive(Debug, Clone)]
pub struct AssembledSystem {
    pub stiffness: CsrMatrix,
    pub mass: CsrMatrix,
    pub load: Vec<f64>,
    pub fixed: Vec<Option<f64>>,
    /// `∫ β` over the domain; zero means the reaction term vanishes everywhere.
    pub reaction_integral: f64,
}

struct ElementBlock {
    k: [[f64; 4]; 4],
    m: [[f64; 4]; 4],
    f: [f64; 4],
    beta: f64,
}

fn element_block(mesh: &Mesh, e: usize, params: &ParameterField) -> Result<ElementBlock> {
    let corners = mesh.element_corners(e);
    let mut blk = ElementBlock {
        k: [[0.0; 4]; 4],
        m: [[0.0; 4]; 4],
        f: [0.0; 4],
        beta: 0.0,
    };
    for (xi, eta) in gauss_points() {
        let (x, jac) = bilinear_map(&corners, xi, eta);
        let det = jac.determinant();
        if !(det > 0.0) {
            return Err(Error::Geometry(format!(
                "element {e} has det J = {det} at a Gauss point"
            )));
        }
        let s = params.sample(x)?;
        s.validate()
            .map_err(|err| Error::Material(format!("at ({}, {}): {err}", x.x, x.y)))?;
        let jinv_t = jac.try_inverse().expect("det > 0").transpose();
        let n = shape_functions(xi, eta);
        let grads = shape_gradients(xi, eta).map(|g| jinv_t * nalgebra::Vector2::new(g[0], g[1]));
        let alpha = s.alpha.to_matrix();
        let flux = grads.map(|g| alpha * g);
        for i in 0..4 {
            for j in 0..4 {
                blk.k[i][j] += (grads[i].dot(&flux[j]) + s.beta * n[i] * n[j]) * det;
                blk.m[i][j] += s.rho * n[i] * n[j] * det;
            }
            blk.f[i] += s.f * n[i] * det;
        }
        blk.beta += s.beta * det;
    }
    Ok(blk)
}

/// Bilinear finite-element assembly with 2×2 Gauss quadrature and per-point
/// material sampling.
///
/// Element blocks are computed in parallel and summed in element order, so
/// the result does not depend on thread scheduling.
pub fn assemble_system(
    mesh: &Mesh,
    params: &ParameterField,
    bcs: &BoundaryConditions,
) -> Result<AssembledSystem> {
    let fixed = bcs.dirichlet_values(mesh)?;
    let blocks = (0..mesh.elements().len())
        .into_par_iter()
        .map(|e| element_block(mesh, e, params))
        .collect::<Result<Vec<_>>>()?;

    let n = mesh.node_count();
    let mut stiffness = CsrMatrix::from_elements(n, mesh.elements());
    let mut mass = stiffness.clone();
    let mut load = vec![0.0; n];
    let mut reaction_integral = 0.0;
    for (el, blk) in mesh.elements().iter().zip(&blocks) {
        for i in 0..4 {
            for j in 0..4 {
                stiffness.add(el[i], el[j], blk.k[i][j]);
                mass.add(el[i], el[j], blk.m[i][j]);
            }
            load[el[i]] += blk.f[i];
        }
        reaction_integral += blk.beta;
    }

    for (tag, bc) in bcs.iter() {
        if let BoundaryCondition::Neumann { flux } = bc {
            if *flux == 0.0 {
                continue;
            }
            for &[a, b] in &mesh.boundary_tags()[tag] {
                let len = (mesh.nodes()[b] - mesh.nodes()[a]).norm();
                load[a] += 0.5 * flux * len;
                load[b] += 0.5 * flux * len;
            }
        }
    }

    Ok(AssembledSystem {
        stiffness,
        mass,
        load,
        fixed,
        reaction_integral,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::material::homogeneous_params;
    use crate::mesh::build_cartesian_mesh;

    fn unit_element(rho: f64, alpha: f64, beta: f64, f: f64) -> AssembledSystem {
        let mesh = build_cartesian_mesh([0.0, 1.0], [0.0, 1.0], 1, 1).unwrap();
        let bcs = BoundaryConditions::new()
            .with("left", BoundaryCondition::insulated())
            .with("right", BoundaryCondition::insulated())
            .with("top", BoundaryCondition::insulated())
            .with("bottom", BoundaryCondition::insulated());
        assemble_system(
            &mesh,
            &homogeneous_params(rho, alpha, beta, f).unwrap(),
            &bcs,
        )
        .unwrap()
    }

    #[test]
    fn unit_square_stiffness() {
        let sys = unit_element(1.0, 1.0, 0.0, 0.0);
        let expected = [
            [4.0, -1.0, -2.0, -1.0],
            [-1.0, 4.0, -1.0, -2.0],
            [-2.0, -1.0, 4.0, -1.0],
            [-1.0, -2.0, -1.0, 4.0],
        ];
        // local corner order (0,0),(1,0),(1,1),(0,1) maps to node indices 0,1,3,2
        let order = [0, 1, 3, 2];
        for i in 0..4 {
            for j in 0..4 {
                let got = sys.stiffness.get(order[i], order[j]);
                assert!(
                    (got - expected[i][j] / 6.0).abs() < 1e-14,
                    "K[{i}][{j}] = {got}"
                );
            }
        }
    }

    #[test]
    fn unit_square_mass() {
        let sys = unit_element(1.0, 1.0, 0.0, 0.0);
        let expected = [
            [4.0, 2.0, 1.0, 2.0],
            [2.0, 4.0, 2.0, 1.0],
            [1.0, 2.0, 4.0, 2.0],
            [2.0, 1.0, 2.0, 4.0],
        ];
        let order = [0, 1, 3, 2];
        for i in 0..4 {
            for j in 0..4 {
                let got = sys.mass.get(order[i], order[j]);
                assert!(
                    (got - expected[i][j] / 36.0).abs() < 1e-15,
                    "M[{i}][{j}] = {got}"
                );
            }
        }
    }

    #[test]
    fn unit_square_load() {
        let sys = unit_element(1.0, 1.0, 0.0, 1.0);
        for v in &sys.load {
            assert!((v - 0.25).abs() < 1e-15);
        }
    }

    #[test]
    fn reaction_adds_mass_shaped_term() {
        let plain = unit_element(1.0, 1.0, 0.0, 0.0);
        let with_beta = unit_element(1.0, 1.0, 2.0, 0.0);
        for i in 0..4 {
            for j in 0..4 {
                let d = with_beta.stiffness.get(i, j) - plain.stiffness.get(i, j);
                assert!((d - 2.0 * plain.mass.get(i, j)).abs() < 1e-14);
            }
        }
        assert!((with_beta.reaction_integral - 2.0).abs() < 1e-14);
    }

    #[test]
    fn neumann_flux_enters_load() {
        let mesh = build_cartesian_mesh([0.0, 2.0], [0.0, 1.0], 2, 1).unwrap();
        let bcs = BoundaryConditions::new()
            .with("left", BoundaryCondition::Neumann { flux: 3.0 })
            .with("right", BoundaryCondition::insulated())
            .with("top", BoundaryCondition::insulated())
            .with("bottom", BoundaryCondition::insulated());
        let sys = assemble_system(
            &mesh,
            &homogeneous_params(1.0, 1.0, 0.0, 0.0).unwrap(),
            &bcs,
        )
        .unwrap();
        let total: f64 = sys.load.iter().sum();
        assert!((total - 3.0).abs() < 1e-14);
        assert!((sys.load[0] - 1.5).abs() < 1e-14);
    }

    #[test]
    fn missing_tag_is_config_error() {
        let mesh = build_cartesian_mesh([0.0, 1.0], [0.0, 1.0], 2, 2).unwrap();
        let bcs = BoundaryConditions::new().with("left", BoundaryCondition::dirichlet(1.0));
        let err = assemble_system(
            &mesh,
            &homogeneous_params(1.0, 1.0, 0.0, 0.0).unwrap(),
            &bcs,
        )
        .unwrap_err();
        assert!(matches!(err, Error::Config(_)));
    }
}
