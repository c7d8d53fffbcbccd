//! Nodal field as `x,y,u` rows with 17 significant digits.

use std::fmt::Write as _;

use commfield_core::mesh::Mesh;
use commfield_core::Point;

pub const HEADER: &str = "x,y,u";

pub fn format_field_csv(mesh: &Mesh, values: &[f64]) -> String {
    format_rows(mesh.nodes().iter().zip(values).map(|(p, &u)| (*p, u)))
}

pub fn format_rows(rows: impl IntoIterator<Item = (Point, f64)>) -> String {
    let mut out = String::from(HEADER);
    out.push('\n');
    for (p, u) in rows {
        writeln!(out, "{:.16e},{:.16e},{:.16e}", p.x, p.y, u).expect("write to string");
    }
    out
}

/// Reads rows written by [`format_field_csv`].
pub fn parse_field_csv(text: &str) -> Result<Vec<(Point, f64)>, String> {
    let mut lines = text.lines();
    match lines.next() {
        Some(HEADER) => {}
        other => return Err(format!("expected header `{HEADER}`, found {other:?}")),
    }
    lines
        .enumerate()
        .map(|(k, line)| {
            let cols: Vec<&str> = line.split(',').collect();
            if cols.len() != 3 {
                return Err(format!(
                    "row {}: expected 3 columns, found {}",
                    k + 1,
                    cols.len()
                ));
            }
            let num = |s: &str| {
                s.parse::<f64>()
                    .map_err(|e| format!("row {}: `{s}`: {e}", k + 1))
            };
            Ok((Point::new(num(cols[0])?, num(cols[1])?), num(cols[2])?))
        })
        .collect()
}
