//! Marching squares on the structured node lattice.
//!
//! Crossings are placed by linear interpolation along cell edges in physical
//! coordinates; segments sharing an edge crossing are chained into polylines.
//! Saddle cells are split according to the cell-center average.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use commfield_core::mesh::Mesh;
use commfield_core::Point;

pub const LEVEL_COUNT: usize = 20;

#[derive(Debug, Clone, PartialEq)]
pub struct Polyline {
    pub level: f64,
    pub points: Vec<Point>,
}

/// `LEVEL_COUNT` equispaced interior levels `min + k(max − min)/(LEVEL_COUNT + 1)`.
pub fn equispaced_levels(values: &[f64], count: usize) -> Vec<f64> {
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(max > min) {
        return Vec::new();
    }
    (1..=count)
        .map(|k| min + (max - min) * k as f64 / (count + 1) as f64)
        .collect()
}

type EdgeKey = (usize, usize);

fn key(a: usize, b: usize) -> EdgeKey {
    (a.min(b), a.max(b))
}

/// Contour polylines of `values` at `level`.
pub fn contour_level(mesh: &Mesh, values: &[f64], level: f64) -> Vec<Polyline> {
    let nodes = mesh.nodes();
    let crossing = |a: usize, b: usize| -> Point {
        let (ua, ub) = (values[a], values[b]);
        let t = ((level - ua) / (ub - ua)).clamp(0.0, 1.0);
        nodes[a] + (nodes[b] - nodes[a]) * t
    };
    let above = |k: usize| values[k] >= level;

    let mut segments: Vec<[EdgeKey; 2]> = Vec::new();
    for el in mesh.elements() {
        // counter-clockwise corners and the edges between them
        let edges = [
            (el[0], el[1]),
            (el[1], el[2]),
            (el[2], el[3]),
            (el[3], el[0]),
        ];
        let cut: Vec<usize> = (0..4)
            .filter(|&e| above(edges[e].0) != above(edges[e].1))
            .collect();
        match cut.len() {
            2 => segments.push([
                key(edges[cut[0]].0, edges[cut[0]].1),
                key(edges[cut[1]].0, edges[cut[1]].1),
            ]),
            4 => {
                let center = el.iter().map(|&k| values[k]).sum::<f64>() / 4.0;
                // the corners on the other side of the center are cut off on their own
                let pairs = if (center >= level) == above(el[0]) {
                    [(0, 1), (2, 3)]
                } else {
                    [(3, 0), (1, 2)]
                };
                for (p, q) in pairs {
                    segments.push([key(edges[p].0, edges[p].1), key(edges[q].0, edges[q].1)]);
                }
            }
            _ => {}
        }
    }

    let mut by_edge: HashMap<EdgeKey, Vec<usize>> = HashMap::new();
    for (s, seg) in segments.iter().enumerate() {
        for &e in seg {
            by_edge.entry(e).or_default().push(s);
        }
    }
    let mut used = vec![false; segments.len()];
    let mut lines = Vec::new();
    // open chains first (start at an edge touched once), then closed loops
    let mut starts: Vec<usize> = (0..segments.len())
        .filter(|&s| segments[s].iter().any(|e| by_edge[e].len() == 1))
        .collect();
    starts.extend(0..segments.len());
    for start in starts {
        if used[start] {
            continue;
        }
        used[start] = true;
        let [a, b] = segments[start];
        let (first, mut tip) = if by_edge[&a].len() == 1 {
            (a, b)
        } else {
            (b, a)
        };
        let mut chain = vec![first, tip];
        loop {
            let next = by_edge[&tip].iter().copied().find(|&s| !used[s]);
            let Some(s) = next else { break };
            used[s] = true;
            let [p, q] = segments[s];
            tip = if p == tip { q } else { p };
            chain.push(tip);
        }
        lines.push(Polyline {
            level,
            points: chain.into_iter().map(|(a, b)| crossing(a, b)).collect(),
        });
    }
    lines
}

pub fn contours(mesh: &Mesh, values: &[f64], levels: &[f64]) -> Vec<Polyline> {
    levels
        .iter()
        .flat_map(|&l| contour_level(mesh, values, l))
        .collect()
}

/// One row per vertex: `level,polyline,vertex,x,y`; polylines are numbered per level.
pub fn format_contours_csv(lines: &[Polyline]) -> String {
    let mut out = String::from("level,polyline,vertex,x,y\n");
    let mut per_level: BTreeMap<u64, usize> = BTreeMap::new();
    for line in lines {
        let counter = per_level.entry(line.level.to_bits()).or_insert(0);
        for (v, p) in line.points.iter().enumerate() {
            writeln!(
                out,
                "{:.16e},{},{},{:.16e},{:.16e}",
                line.level, counter, v, p.x, p.y
            )
            .unwrap();
        }
        *counter += 1;
    }
    out
}
