use commfield_core::experiments::convergence::{
    convergence_study, rod_steady, sinh_benchmark_error,
};
use commfield_core::material::homogeneous_params;
use commfield_core::mesh::build_cartesian_mesh;
use commfield_core::solver::{
    assemble_system, run_transient, sample_solution, solve_steady, BoundaryCondition,
    BoundaryConditions, BoundaryFn, FieldSolution,
};
use commfield_core::{Error, Point};

fn walls(left: BoundaryCondition, right: BoundaryCondition) -> BoundaryConditions {
    BoundaryConditions::new()
        .with("left", left)
        .with("right", right)
        .with("top", BoundaryCondition::insulated())
        .with("bottom", BoundaryCondition::insulated())
}

#[test]
fn linear_profile_is_reproduced() {
    for n in [3, 16, 64] {
        let (mesh, u) = rod_steady(n, 0.0).unwrap();
        let worst = mesh
            .nodes()
            .iter()
            .zip(&u.values)
            .map(|(p, v)| (v - (1.0 - p.x)).abs())
            .fold(0.0, f64::max);
        assert!(worst <= 1e-10, "n = {n}: {worst}");
    }
}

#[test]
fn reaction_benchmark_converges_at_second_order() {
    let study = convergence_study(&[8, 16, 32, 64], sinh_benchmark_error).unwrap();
    for r in &study.ratios {
        assert!((3.5..=4.5).contains(r), "{study:?}");
    }
    let order = study.order.unwrap();
    assert!((1.7..=2.3).contains(&order), "order {order}");
}

#[test]
fn all_dirichlet_constant() {
    let mesh = build_cartesian_mesh([0.0, 2.0], [0.0, 1.0], 10, 7).unwrap();
    let bcs = ["left", "right", "top", "bottom"]
        .into_iter()
        .fold(BoundaryConditions::new(), |b, t| {
            b.with(t, BoundaryCondition::dirichlet(0.7))
        });
    let sys = assemble_system(
        &mesh,
        &homogeneous_params(1.0, 2.5, 0.0, 0.0).unwrap(),
        &bcs,
    )
    .unwrap();
    let u = solve_steady(&sys).unwrap();
    let worst = u.values.iter().map(|v| (v - 0.7).abs()).fold(0.0, f64::max);
    assert!(worst <= 1e-9, "{worst}");
}

#[test]
fn insulated_constant_stays_constant() {
    let mesh = build_cartesian_mesh([0.0, 1.0], [0.0, 3.0], 6, 9).unwrap();
    let insulated = walls(
        BoundaryCondition::insulated(),
        BoundaryCondition::insulated(),
    );
    let sys = assemble_system(
        &mesh,
        &homogeneous_params(2.0, 1.0, 0.0, 0.0).unwrap(),
        &insulated,
    )
    .unwrap();
    let u0 = FieldSolution::constant(mesh.node_count(), 0.3);
    let out = run_transient(&sys, &u0, 0.1, 1.0, &[0.5]).unwrap();
    for s in &out.snapshots {
        assert!(s.values.iter().all(|v| (v - 0.3).abs() <= 1e-12));
    }
}

#[test]
fn discrete_max_principle() {
    let mesh = build_cartesian_mesh([0.0, 1.0], [0.0, 1.0], 24, 24).unwrap();
    let g = BoundaryFn::new(|p: Point| (3.0 * p.y).sin().abs());
    for beta in [0.0, 1.0, 4.0] {
        let bcs = BoundaryConditions::new()
            .with("left", BoundaryCondition::DirichletFn(g.clone()))
            .with("right", BoundaryCondition::dirichlet(0.0))
            .with("top", BoundaryCondition::dirichlet(0.2))
            .with("bottom", BoundaryCondition::insulated());
        let sys = assemble_system(
            &mesh,
            &homogeneous_params(1.0, 1.0, beta, 0.0).unwrap(),
            &bcs,
        )
        .unwrap();
        let u = solve_steady(&sys).unwrap();
        let bmax = sys
            .fixed
            .iter()
            .flatten()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max);
        let bmin = sys
            .fixed
            .iter()
            .flatten()
            .copied()
            .fold(f64::INFINITY, f64::min);
        for v in &u.values {
            assert!(
                *v <= bmax + 1e-12 && *v >= bmin.min(0.0) - 1e-12,
                "beta {beta}: {v}"
            );
        }

        let u0 = FieldSolution::new(sys.fixed.iter().map(|v| v.unwrap_or(0.0)).collect());
        let t = run_transient(&sys, &u0, 0.01, 0.2, &[0.05, 0.1]).unwrap();
        for s in &t.snapshots {
            assert!(s.values.iter().all(|v| *v <= bmax + 1e-12 && *v >= -1e-12));
        }
    }
}

#[test]
fn mirror_symmetric_problem_has_symmetric_solution() {
    let mesh = build_cartesian_mesh([0.0, 1.0], [0.0, 1.0], 20, 20).unwrap();
    let sys = assemble_system(
        &mesh,
        &homogeneous_params(1.0, 1.0, 4.0, 0.0).unwrap(),
        &walls(
            BoundaryCondition::dirichlet(1.0),
            BoundaryCondition::dirichlet(0.0),
        ),
    )
    .unwrap();
    let u = solve_steady(&sys).unwrap();
    for j in 0..=20 {
        for i in 0..=20 {
            let (a, b) = (
                u.values[mesh.node_index(i, j)],
                u.values[mesh.node_index(i, 20 - j)],
            );
            assert!((a - b).abs() <= 1e-10, "({i}, {j})");
        }
    }
}

#[test]
fn transient_approaches_steady_state() {
    let mesh = build_cartesian_mesh([0.0, 1.0], [0.0, 1.0], 12, 12).unwrap();
    let sys = assemble_system(
        &mesh,
        &homogeneous_params(1.0, 1.0, 1.0, 0.5).unwrap(),
        &walls(
            BoundaryCondition::dirichlet(1.0),
            BoundaryCondition::dirichlet(0.0),
        ),
    )
    .unwrap();
    let steady = solve_steady(&sys).unwrap();
    let u0 = FieldSolution::constant(mesh.node_count(), 0.0);
    let late = run_transient(&sys, &u0, 0.05, 40.0, &[]).unwrap();
    let worst = late
        .values
        .iter()
        .zip(&steady.values)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    assert!(worst <= 1e-8, "{worst}");
}

#[test]
fn snapshots_land_on_requested_times() {
    let mesh = build_cartesian_mesh([0.0, 1.0], [0.0, 1.0], 4, 4).unwrap();
    let sys = assemble_system(
        &mesh,
        &homogeneous_params(1.0, 1.0, 0.0, 0.0).unwrap(),
        &walls(
            BoundaryCondition::dirichlet(1.0),
            BoundaryCondition::dirichlet(0.0),
        ),
    )
    .unwrap();
    let u0 = FieldSolution::constant(mesh.node_count(), 0.0);
    let out = run_transient(&sys, &u0, 0.03, 0.1, &[0.0, 0.05, 0.1]).unwrap();
    let times: Vec<f64> = out.snapshots.iter().map(|s| s.time).collect();
    assert_eq!(times, vec![0.0, 0.05, 0.1]);
    assert_eq!(out.snapshot_at(0.1).unwrap().values, out.values);
}

#[test]
fn singular_and_capacity_free_setups_are_rejected() {
    let mesh = build_cartesian_mesh([0.0, 1.0], [0.0, 1.0], 4, 4).unwrap();
    let insulated = walls(
        BoundaryCondition::insulated(),
        BoundaryCondition::insulated(),
    );
    let sys = assemble_system(
        &mesh,
        &homogeneous_params(1.0, 1.0, 0.0, 1.0).unwrap(),
        &insulated,
    )
    .unwrap();
    assert!(matches!(solve_steady(&sys), Err(Error::Setup(_))));

    let sys = assemble_system(
        &mesh,
        &homogeneous_params(0.0, 1.0, 1.0, 0.0).unwrap(),
        &insulated,
    )
    .unwrap();
    let u0 = FieldSolution::constant(mesh.node_count(), 0.0);
    assert!(matches!(
        run_transient(&sys, &u0, 0.1, 1.0, &[]),
        Err(Error::Setup(_))
    ));
}

#[test]
fn sampling_examples() {
    let mesh = build_cartesian_mesh([0.0, 1.0], [0.0, 1.0], 1, 1).unwrap();
    let u = FieldSolution::new(vec![0.0, 1.0, 0.0, 1.0]);
    assert!((sample_solution(&mesh, &u, Point::new(0.5, 0.5)).unwrap() - 0.5).abs() <= 1e-15);
    assert!((sample_solution(&mesh, &u, Point::new(0.25, 0.9)).unwrap() - 0.25).abs() <= 1e-15);
    assert!(matches!(
        sample_solution(&mesh, &u, Point::new(2.0, 0.5)),
        Err(Error::NotFound { .. })
    ));
}
