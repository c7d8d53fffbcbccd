//! Structured bilinear quadrilateral meshes.
//!
//! Nodes are stored row-major: node `(i, j)` has index `j * (ni + 1) + i`, with
//! `i` the fast index. Elements list their corners counter-clockwise as
//! `(i, j), (i+1, j), (i+1, j+1), (i, j+1)`.

use std::collections::{BTreeMap, HashMap};

use nalgebra::{Matrix2, Vector2};

use crate::region::Rect;
use crate::transform::Mapping;
use crate::{Error, Point, Result};

/// Gauss abscissa of the 2-point rule on `[-1, 1]`.
pub const GAUSS_2: f64 = 0.577_350_269_189_625_8;

const NEWTON_MAX_ITERS: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MeshKind {
    Cartesian {
        x: [f64; 2],
        y: [f64; 2],
    },
    /// Polar sector about the origin; `i` runs radially, `j` in angle.
    AnnularSector {
        r1: f64,
        r2: f64,
        phi: f64,
    },
    /// Image of another structured mesh under a coordinate map.
    Mapped,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    nodes: Vec<Point>,
    elements: Vec<[usize; 4]>,
    boundary_tags: BTreeMap<String, Vec<[usize; 2]>>,
    cells: (usize, usize),
    kind: MeshKind,
}

/// Bilinear shape functions at local `(ξ, η)`.
pub fn shape_functions(xi: f64, eta: f64) -> [f64; 4] {
    [
        0.25 * (1.0 - xi) * (1.0 - eta),
        0.25 * (1.0 + xi) * (1.0 - eta),
        0.25 * (1.0 + xi) * (1.0 + eta),
        0.25 * (1.0 - xi) * (1.0 + eta),
    ]
}

/// Local derivatives `[∂N/∂ξ, ∂N/∂η]` of the bilinear shape functions.
pub fn shape_gradients(xi: f64, eta: f64) -> [[f64; 2]; 4] {
    [
        [-0.25 * (1.0 - eta), -0.25 * (1.0 - xi)],
        [0.25 * (1.0 - eta), -0.25 * (1.0 + xi)],
        [0.25 * (1.0 + eta), 0.25 * (1.0 + xi)],
        [-0.25 * (1.0 + eta), 0.25 * (1.0 - xi)],
    ]
}

/// Map from local to physical coordinates and its Jacobian
/// `J = [[∂x/∂ξ, ∂x/∂η], [∂y/∂ξ, ∂y/∂η]]`.
pub fn bilinear_map(corners: &[Point; 4], xi: f64, eta: f64) -> (Point, Matrix2<f64>) {
    let n = shape_functions(xi, eta);
    let dn = shape_gradients(xi, eta);
    let mut p = Vector2::zeros();
    let mut jac = Matrix2::zeros();
    for k in 0..4 {
        p += corners[k].coords * n[k];
        for d in 0..2 {
            jac[(0, d)] += corners[k].x * dn[k][d];
            jac[(1, d)] += corners[k].y * dn[k][d];
        }
    }
    (Point::from(p), jac)
}

fn lattice(n: usize, lo: f64, hi: f64) -> Vec<f64> {
    let w = hi - lo;
    (0..=n)
        .map(|i| {
            if i == n {
                hi
            } else {
                lo + (w * i as f64) / n as f64
            }
        })
        .collect()
}

fn structured(ni: usize, nj: usize, nodes: Vec<Point>, kind: MeshKind, tags: [&str; 4]) -> Mesh {
    let idx = |i: usize, j: usize| j * (ni + 1) + i;
    let mut elements = Vec::with_capacity(ni * nj);
    for j in 0..nj {
        for i in 0..ni {
            elements.push([idx(i, j), idx(i + 1, j), idx(i + 1, j + 1), idx(i, j + 1)]);
        }
    }
    // tags: [j = 0, i = ni, j = nj, i = 0], edges in counter-clockwise element order
    let [low_j, high_i, high_j, low_i] = tags;
    let mut boundary_tags = BTreeMap::new();
    boundary_tags.insert(
        low_j.to_string(),
        (0..ni).map(|i| [idx(i, 0), idx(i + 1, 0)]).collect(),
    );
    boundary_tags.insert(
        high_i.to_string(),
        (0..nj).map(|j| [idx(ni, j), idx(ni, j + 1)]).collect(),
    );
    boundary_tags.insert(
        high_j.to_string(),
        (0..ni).map(|i| [idx(i + 1, nj), idx(i, nj)]).collect(),
    );
    boundary_tags.insert(
        low_i.to_string(),
        (0..nj).map(|j| [idx(0, j + 1), idx(0, j)]).collect(),
    );
    Mesh {
        nodes,
        elements,
        boundary_tags,
        cells: (ni, nj),
        kind,
    }
}

pub fn build_cartesian_mesh(
    x_range: [f64; 2],
    y_range: [f64; 2],
    nx: usize,
    ny: usize,
) -> Result<Mesh> {
    if nx == 0 || ny == 0 {
        return Err(Error::Validation(format!(
            "mesh needs nx, ny >= 1, got {nx} x {ny}"
        )));
    }
    if !Rect::new(x_range, y_range).is_valid() {
        return Err(Error::Validation(
            "mesh ranges must be finite and nonempty".into(),
        ));
    }
    let xs = lattice(nx, x_range[0], x_range[1]);
    let ys = lattice(ny, y_range[0], y_range[1]);
    let nodes = ys
        .iter()
        .flat_map(|&y| xs.iter().map(move |&x| Point::new(x, y)))
        .collect();
    Ok(structured(
        nx,
        ny,
        nodes,
        MeshKind::Cartesian {
            x: x_range,
            y: y_range,
        },
        ["bottom", "right", "top", "left"],
    ))
}

/// Annular sector about the origin with geometric radial spacing
/// `r_i = r1·(r2/r1)^(i/nr)` and uniform angles `θ_j = j·φ/ntheta`.
pub fn build_annular_sector_mesh(
    r1: f64,
    r2: f64,
    phi: f64,
    nr: usize,
    ntheta: usize,
) -> Result<Mesh> {
    if nr == 0 || ntheta == 0 {
        return Err(Error::Validation(format!(
            "mesh needs nr, ntheta >= 1, got {nr} x {ntheta}"
        )));
    }
    if !(r1.is_finite() && r2.is_finite() && 0.0 < r1 && r1 < r2) {
        return Err(Error::Validation(format!(
            "sector radii must satisfy 0 < r1 < r2, got {r1}, {r2}"
        )));
    }
    if !(phi > 0.0 && phi <= std::f64::consts::TAU) {
        return Err(Error::Validation(format!(
            "sector angle must lie in (0, 2π], got {phi}"
        )));
    }
    let ratio = r2 / r1;
    let radii: Vec<f64> = (0..=nr)
        .map(|i| {
            if i == nr {
                r2
            } else {
                r1 * ratio.powf(i as f64 / nr as f64)
            }
        })
        .collect();
    let mut nodes = Vec::with_capacity((nr + 1) * (ntheta + 1));
    for j in 0..=ntheta {
        let theta = phi * j as f64 / ntheta as f64;
        let (s, c) = theta.sin_cos();
        nodes.extend(radii.iter().map(|&r| Point::new(r * c, r * s)));
    }
    Ok(structured(
        nr,
        ntheta,
        nodes,
        MeshKind::AnnularSector { r1, r2, phi },
        ["AD", "outer-arc", "CB", "inner-arc"],
    ))
}

/// Push every node of `mesh` through `map`; connectivity and tags are kept.
pub fn map_mesh(mesh: &Mesh, map: &Mapping) -> Result<Mesh> {
    let nodes = mesh
        .nodes
        .iter()
        .map(|&p| map.forward(p))
        .collect::<Result<Vec<_>>>()?;
    let mapped = Mesh {
        nodes,
        elements: mesh.elements.clone(),
        boundary_tags: mesh.boundary_tags.clone(),
        cells: mesh.cells,
        kind: MeshKind::Mapped,
    };
    mapped.check_orientation()?;
    Ok(mapped)
}

impl Mesh {
    pub fn nodes(&self) -> &[Point] {
        &self.nodes
    }

    pub fn elements(&self) -> &[[usize; 4]] {
        &self.elements
    }

    pub fn boundary_tags(&self) -> &BTreeMap<String, Vec<[usize; 2]>> {
        &self.boundary_tags
    }

    pub fn kind(&self) -> MeshKind {
        self.kind
    }

    /// Cell counts `(ni, nj)` along the two structured directions.
    pub fn cells(&self) -> (usize, usize) {
        self.cells
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn node_index(&self, i: usize, j: usize) -> usize {
        j * (self.cells.0 + 1) + i
    }

    /// Nodes carrying at least one edge of `tag`, ascending.
    pub fn tagged_nodes(&self, tag: &str) -> Vec<usize> {
        let mut nodes: Vec<usize> = self
            .boundary_tags
            .get(tag)
            .into_iter()
            .flatten()
            .flat_map(|e| e.iter().copied())
            .collect();
        nodes.sort_unstable();
        nodes.dedup();
        nodes
    }

    pub fn element_corners(&self, e: usize) -> [Point; 4] {
        self.elements[e].map(|n| self.nodes[n])
    }

    pub fn bounding_box(&self) -> Rect {
        Rect::bounding(self.nodes.iter().copied()).expect("mesh has nodes")
    }

    pub fn diameter(&self) -> f64 {
        self.bounding_box().diagonal()
    }

    pub fn element_area(&self, e: usize) -> f64 {
        let c = self.element_corners(e);
        gauss_points()
            .iter()
            .map(|&(xi, eta)| bilinear_map(&c, xi, eta).1.determinant())
            .sum()
    }

    /// Jacobian determinants at the four Gauss points of element `e`.
    pub fn gauss_determinants(&self, e: usize) -> [f64; 4] {
        let c = self.element_corners(e);
        gauss_points().map(|(xi, eta)| bilinear_map(&c, xi, eta).1.determinant())
    }

    fn check_orientation(&self) -> Result<()> {
        for e in 0..self.elements.len() {
            if self.gauss_determinants(e).iter().any(|&d| !(d > 0.0)) {
                return Err(Error::Geometry(format!(
                    "element {e} is inverted or degenerate"
                )));
            }
        }
        Ok(())
    }

    /// Checks the structural invariants: no inverted quads, every exterior edge
    /// tagged exactly once and owned by exactly one element.
    pub fn validate(&self) -> Result<()> {
        self.check_orientation()?;
        let mut owners: HashMap<(usize, usize), usize> = HashMap::new();
        for el in &self.elements {
            for k in 0..4 {
                let (a, b) = (el[k], el[(k + 1) % 4]);
                *owners.entry((a.min(b), a.max(b))).or_default() += 1;
            }
        }
        let mut tagged: HashMap<(usize, usize), usize> = HashMap::new();
        for edges in self.boundary_tags.values() {
            for &[a, b] in edges {
                *tagged.entry((a.min(b), a.max(b))).or_default() += 1;
            }
        }
        for (edge, &count) in &owners {
            let tags = tagged.get(edge).copied().unwrap_or(0);
            if count == 1 && tags != 1 {
                return Err(Error::Geometry(format!(
                    "exterior edge {edge:?} tagged {tags} times"
                )));
            }
            if count > 2 || (count == 2 && tags != 0) {
                return Err(Error::Geometry(format!(
                    "edge {edge:?} has inconsistent ownership"
                )));
            }
        }
        if tagged.keys().any(|e| owners.get(e) != Some(&1)) {
            return Err(Error::Geometry(
                "tagged edge is not an exterior edge".into(),
            ));
        }
        Ok(())
    }

    fn candidate_element(&self, p: Point) -> Option<usize> {
        let (ni, nj) = self.cells;
        let cell =
            |t: f64, n: usize| -> usize { ((t * n as f64).floor().max(0.0) as usize).min(n - 1) };
        match self.kind {
            MeshKind::Cartesian { x, y } => {
                let i = cell((p.x - x[0]) / (x[1] - x[0]), ni);
                let j = cell((p.y - y[0]) / (y[1] - y[0]), nj);
                Some(j * ni + i)
            }
            MeshKind::AnnularSector { r1, r2, phi } => {
                let r = p.coords.norm();
                if r <= 0.0 {
                    return None;
                }
                let mut theta = p.y.atan2(p.x);
                if theta < -1e-12 {
                    theta += std::f64::consts::TAU;
                }
                let i = cell((r / r1).ln() / (r2 / r1).ln(), ni);
                let j = cell(theta.max(0.0) / phi, nj);
                Some(j * ni + i)
            }
            MeshKind::Mapped => None,
        }
    }

    /// Element containing `p` and the local coordinates of `p` in it.
    pub fn locate_point(&self, p: Point) -> Result<(usize, [f64; 2])> {
        let diam = self.diameter();
        let slack = 1e-10 * diam;
        if !self.bounding_box().contains_with_slack(p, slack) {
            return Err(Error::NotFound { x: p.x, y: p.y });
        }
        let mut tried = Vec::new();
        if let Some(c) = self.candidate_element(p) {
            let (ni, nj) = self.cells;
            let (ci, cj) = ((c % ni) as isize, (c / ni) as isize);
            for dj in [0isize, -1, 1] {
                for di in [0isize, -1, 1] {
                    let (i, j) = (ci + di, cj + dj);
                    if i < 0 || j < 0 || i >= ni as isize || j >= nj as isize {
                        continue;
                    }
                    let e = j as usize * ni + i as usize;
                    tried.push(e);
                    if let Some(local) = self.try_element(e, p, diam)? {
                        return Ok((e, local));
                    }
                }
            }
        }
        for e in 0..self.elements.len() {
            if tried.contains(&e) {
                continue;
            }
            let bb = Rect::bounding(self.element_corners(e)).expect("four corners");
            if !bb.contains_with_slack(p, slack) {
                continue;
            }
            if let Some(local) = self.try_element(e, p, diam)? {
                return Ok((e, local));
            }
        }
        Err(Error::NotFound { x: p.x, y: p.y })
    }

    /// Newton inversion of the bilinear map of element `e`; `None` when the
    /// solution lies outside the reference square.
    fn try_element(&self, e: usize, p: Point, diam: f64) -> Result<Option<[f64; 2]>> {
        let corners = self.element_corners(e);
        let tol = 1e-12 * diam.max(1.0);
        let mut local = Vector2::zeros();
        for _ in 0..NEWTON_MAX_ITERS {
            let (x, jac) = bilinear_map(&corners, local[0], local[1]);
            let residual = x - p;
            if residual.norm() <= tol {
                let inside_tol = 1.0 + 1e-10;
                if local[0].abs() <= inside_tol && local[1].abs() <= inside_tol {
                    return Ok(Some([local[0].clamp(-1.0, 1.0), local[1].clamp(-1.0, 1.0)]));
                }
                return Ok(None);
            }
            let Some(inv) = jac.try_inverse() else {
                return Err(Error::Geometry(format!(
                    "singular element map in element {e}"
                )));
            };
            local -= inv * residual;
            // far outside the element: no point iterating further
            if local.amax() > 10.0 {
                return Ok(None);
            }
        }
        Err(Error::Geometry(format!(
            "point location did not converge in element {e} after {NEWTON_MAX_ITERS} iterations"
        )))
    }
}

/// The four 2×2 Gauss points in local coordinates, counter-clockwise from `(−,−)`.
pub fn gauss_points() -> [(f64, f64); 4] {
    let g = GAUSS_2;
    [(-g, -g), (g, -g), (g, g), (-g, g)]
}

pub fn locate_point(mesh: &Mesh, p: Point) -> Result<(usize, [f64; 2])> {
    mesh.locate_point(p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn cartesian_counts() {
        let m = build_cartesian_mesh([0.0, 1.0], [0.0, 1.0], 2, 2).unwrap();
        assert_eq!(m.node_count(), 9);
        assert_eq!(m.elements().len(), 4);
        let tags: Vec<_> = m.boundary_tags().keys().cloned().collect();
        assert_eq!(tags, ["bottom", "left", "right", "top"]);
        m.validate().unwrap();
    }

    #[test]
    fn cartesian_last_node() {
        let m = build_cartesian_mesh([0.0, 4.0], [0.0, 2.0], 4, 2).unwrap();
        assert_eq!(m.nodes()[(4 + 1) * (2 + 1) - 1], Point::new(4.0, 2.0));
    }

    #[test]
    fn cartesian_uniform_areas() {
        let m = build_cartesian_mesh([0.0, 3.0], [-1.0, 1.0], 6, 5).unwrap();
        for e in 0..m.elements().len() {
            assert_relative_eq!(m.element_area(e), 0.5 * 0.4, epsilon = 1e-14);
        }
    }

    #[test]
    fn zero_counts_rejected() {
        assert!(matches!(
            build_cartesian_mesh([0.0, 1.0], [0.0, 1.0], 0, 2),
            Err(Error::Validation(_))
        ));
        assert!(build_annular_sector_mesh(2.0, 1.0, FRAC_PI_2, 4, 4).is_err());
        assert!(build_annular_sector_mesh(1.0, 2.0, 7.0, 4, 4).is_err());
    }

    #[test]
    fn sector_single_element() {
        let m = build_annular_sector_mesh(1.0, FRAC_PI_2.exp(), FRAC_PI_2, 1, 1).unwrap();
        assert_eq!(m.node_count(), 4);
        assert_eq!(m.elements().len(), 1);
        let tags: Vec<_> = m.boundary_tags().keys().cloned().collect();
        assert_eq!(tags, ["AD", "CB", "inner-arc", "outer-arc"]);
        m.validate().unwrap();
    }

    #[test]
    fn sector_positive_determinants() {
        let m = build_annular_sector_mesh(1.0, 4.81, FRAC_PI_2, 16, 16).unwrap();
        for e in 0..m.elements().len() {
            assert!(m.gauss_determinants(e).iter().all(|&d| d > 0.0));
        }
        m.validate().unwrap();
    }

    #[test]
    fn sector_geometric_spacing() {
        let m = build_annular_sector_mesh(1.0, 4.81, FRAC_PI_2, 8, 2).unwrap();
        let radii: Vec<f64> = (0..=8)
            .map(|i| m.nodes()[m.node_index(i, 0)].coords.norm())
            .collect();
        let ratio = radii[1] / radii[0];
        for w in radii.windows(2) {
            assert_relative_eq!(w[1] / w[0], ratio, max_relative = 1e-13);
        }
    }

    #[test]
    fn locate_center_and_corner() {
        let m = build_cartesian_mesh([0.0, 2.0], [0.0, 1.0], 4, 2).unwrap();
        let (e, local) = m.locate_point(Point::new(0.75, 0.25)).unwrap();
        assert_eq!(e, 1);
        assert_relative_eq!(local[0], 0.0, epsilon = 1e-14);
        assert_relative_eq!(local[1], 0.0, epsilon = 1e-14);
        let (e, local) = m.locate_point(Point::new(0.0, 0.0)).unwrap();
        assert_eq!(e, 0);
        assert_eq!(local, [-1.0, -1.0]);
        let (e, local) = m.locate_point(Point::new(2.0, 1.0)).unwrap();
        let c = m.element_corners(e);
        let (x, _) = bilinear_map(&c, local[0], local[1]);
        assert_relative_eq!((x - Point::new(2.0, 1.0)).norm(), 0.0, epsilon = 1e-12);
        assert!(local[0].abs() == 1.0 && local[1].abs() == 1.0);
    }

    #[test]
    fn locate_outside_fails() {
        let m = build_cartesian_mesh([0.0, 1.0], [0.0, 1.0], 2, 2).unwrap();
        assert!(matches!(
            m.locate_point(Point::new(1.5, 0.5)),
            Err(Error::NotFound { .. })
        ));
        let s = build_annular_sector_mesh(1.0, 2.0, FRAC_PI_2, 4, 4).unwrap();
        // inside the bounding box, inside the hole
        assert!(matches!(
            s.locate_point(Point::new(0.3, 0.3)),
            Err(Error::NotFound { .. })
        ));
    }

    #[test]
    fn refinement_nesting_exact() {
        let coarse = build_cartesian_mesh([0.1, 2.3], [-0.7, 1.9], 5, 3).unwrap();
        let fine = build_cartesian_mesh([0.1, 2.3], [-0.7, 1.9], 10, 6).unwrap();
        for j in 0..=3 {
            for i in 0..=5 {
                assert_eq!(
                    coarse.nodes()[coarse.node_index(i, j)],
                    fine.nodes()[fine.node_index(2 * i, 2 * j)]
                );
            }
        }
    }

    #[test]
    fn tagged_nodes_cover_edges() {
        let m = build_cartesian_mesh([0.0, 1.0], [0.0, 1.0], 3, 2).unwrap();
        assert_eq!(m.tagged_nodes("left"), vec![0, 4, 8]);
        assert_eq!(m.tagged_nodes("bottom"), vec![0, 1, 2, 3]);
    }
}
