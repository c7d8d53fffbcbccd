//! Legacy ASCII VTK structured grid with point data `u`.

use std::fmt::Write as _;

use commfield_core::mesh::Mesh;

pub fn format_vtk(mesh: &Mesh, values: &[f64], title: &str) -> String {
    let (ni, nj) = mesh.cells();
    let n = mesh.node_count();
    let mut out = String::new();
    out.push_str("# vtk DataFile Version 3.0\n");
    writeln!(out, "{}", title.replace('\n', " ")).unwrap();
    out.push_str("ASCII\nDATASET STRUCTURED_GRID\n");
    writeln!(out, "DIMENSIONS {} {} 1", ni + 1, nj + 1).unwrap();
    writeln!(out, "POINTS {n} double").unwrap();
    for p in mesh.nodes() {
        writeln!(out, "{:.16e} {:.16e} 0", p.x, p.y).unwrap();
    }
    writeln!(out, "POINT_DATA {n}").unwrap();
    out.push_str("SCALARS u double 1\nLOOKUP_TABLE default\n");
    for u in values {
        writeln!(out, "{u:.16e}").unwrap();
    }
    out
}
