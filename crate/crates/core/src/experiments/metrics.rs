//! Scalar metrics comparing and characterizing field solutions.

use crate::mesh::{Mesh, MeshKind};
use crate::solver::{FieldSolution, Snapshot};
use crate::{Error, Point, Result};

/// `sqrt(Σ (uA − uB)²) / sqrt(Σ uA²)` over the nodes inside `region`; `0/0 → 0`.
pub fn exterior_mismatch(
    mesh: &Mesh,
    ua: &FieldSolution,
    ub: &FieldSolution,
    region: impl Fn(Point) -> bool,
) -> Result<f64> {
    relative_l2(mesh, &ua.values, &ub.values, region)
}

pub fn relative_l2(
    mesh: &Mesh,
    ua: &[f64],
    ub: &[f64],
    region: impl Fn(Point) -> bool,
) -> Result<f64> {
    let n = mesh.node_count();
    if ua.len() != n || ub.len() != n {
        return Err(Error::Comparison(format!(
            "solutions of length {} and {} on a mesh with {n} nodes",
            ua.len(),
            ub.len()
        )));
    }
    let (mut diff, mut norm) = (0.0, 0.0);
    for ((p, a), b) in mesh.nodes().iter().zip(ua).zip(ub) {
        if region(*p) {
            diff += (a - b) * (a - b);
            norm += a * a;
        }
    }
    if diff == 0.0 {
        return Ok(0.0);
    }
    if norm == 0.0 {
        return Err(Error::Comparison(
            "reference field vanishes on the comparison region".into(),
        ));
    }
    Ok((diff / norm).sqrt())
}

/// `max |u|` over the nodes inside `region`.
pub fn max_abs_in(mesh: &Mesh, u: &[f64], region: impl Fn(Point) -> bool) -> f64 {
    mesh.nodes()
        .iter()
        .zip(u)
        .filter(|(p, _)| region(**p))
        .map(|(_, v)| v.abs())
        .fold(0.0, f64::max)
}

/// First time each probe reaches `level`, linearly interpolated between snapshots.
pub fn crossing_times(snapshots: &[Snapshot], probes: &[usize], level: f64) -> Result<Vec<f64>> {
    probes
        .iter()
        .enumerate()
        .map(|(k, &node)| {
            let mut prev: Option<(f64, f64)> = None;
            for s in snapshots {
                let v = s.values[node];
                if v >= level {
                    return Ok(match prev {
                        Some((t0, v0)) if v > v0 => t0 + (level - v0) / (v - v0) * (s.time - t0),
                        Some((t0, _)) => t0,
                        None => s.time,
                    });
                }
                prev = Some((s.time, v));
            }
            Err(Error::NonArrival { probe: k })
        })
        .collect()
}

/// `(max − min) / mean` of the crossing times of `threshold · u_input`.
pub fn arrival_spread(
    snapshots: &[Snapshot],
    probes: &[usize],
    threshold: f64,
    u_input: f64,
) -> Result<f64> {
    if probes.len() < 2 {
        return Err(Error::Validation(
            "arrival spread needs at least two probes".into(),
        ));
    }
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(Error::Validation(format!(
            "threshold must lie in (0, 1), got {threshold}"
        )));
    }
    let times = crossing_times(snapshots, probes, threshold * u_input)?;
    Ok(spread_of(&times))
}

pub fn spread_of(times: &[f64]) -> f64 {
    let max = times.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = times.iter().copied().fold(f64::INFINITY, f64::min);
    let mean = times.iter().sum::<f64>() / times.len() as f64;
    if max == min {
        0.0
    } else {
        (max - min) / mean
    }
}

/// Worst normalized variation of `u` along the radial mesh lines of a sector mesh.
pub fn contour_straightness(mesh: &Mesh, values: &[f64]) -> Result<f64> {
    if !matches!(mesh.kind(), MeshKind::AnnularSector { .. }) {
        return Err(Error::Unsupported(
            "contour straightness needs an annular-sector mesh".into(),
        ));
    }
    let worst = radial_variation(mesh, values)?;
    let range = global_range(values);
    Ok(if range == 0.0 { 0.0 } else { worst / range })
}

fn global_range(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    max - min
}

/// Largest `max − min` of `u` along a single radial line (fixed `j`).
pub fn radial_variation(mesh: &Mesh, values: &[f64]) -> Result<f64> {
    if values.len() != mesh.node_count() {
        return Err(Error::Comparison(
            "solution length does not match the mesh".into(),
        ));
    }
    let (ni, nj) = mesh.cells();
    let mut worst: f64 = 0.0;
    for j in 0..=nj {
        let column = (0..=ni).map(|i| values[mesh.node_index(i, j)]);
        let (lo, hi) = column.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
            (lo.min(v), hi.max(v))
        });
        worst = worst.max(hi - lo);
    }
    Ok(worst)
}
