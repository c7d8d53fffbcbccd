//! 8-bit grayscale heatmap (plain PGM), one pixel per node.
//!
//! Row `j = nj` is the top image row, so the picture has `y` pointing up.

use std::fmt::Write as _;

use commfield_core::mesh::Mesh;

/// Linear min–max normalization to `0..=255`; a constant field maps to 0.
pub fn gray_levels(values: &[f64]) -> Vec<u8> {
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let range = max - min;
    values
        .iter()
        .map(|&v| {
            if range > 0.0 {
                (255.0 * (v - min) / range).round().clamp(0.0, 255.0) as u8
            } else {
                0
            }
        })
        .collect()
}

pub fn format_pgm(mesh: &Mesh, values: &[f64]) -> String {
    let (ni, nj) = mesh.cells();
    let gray = gray_levels(values);
    let mut out = format!("P2\n{} {}\n255\n", ni + 1, nj + 1);
    for j in (0..=nj).rev() {
        let row: Vec<String> = (0..=ni)
            .map(|i| gray[mesh.node_index(i, j)].to_string())
            .collect();
        writeln!(out, "{}", row.join(" ")).unwrap();
    }
    out
}
