use commfield_cli::output::contour::{contour_level, equispaced_levels};
use commfield_cli::output::field_csv::format_rows;
use commfield_cli::output::pgm::gray_levels;
use commfield_cli::output::{
    contours, format_contours_csv, format_field_csv, format_pgm, format_vtk, parse_field_csv,
};
use commfield_core::mesh::build_cartesian_mesh;

#[test]
fn constant_field_gives_uniform_pgm() {
    let mesh = build_cartesian_mesh([0.0, 1.0], [0.0, 1.0], 2, 2).unwrap();
    let pgm = format_pgm(&mesh, &[0.7; 9]);
    let mut lines = pgm.lines();
    assert_eq!(lines.next(), Some("P2"));
    assert_eq!(lines.next(), Some("3 3"));
    assert_eq!(lines.next(), Some("255"));
    let pixels: Vec<u8> = lines
        .flat_map(|l| l.split_whitespace())
        .map(|s| s.parse().unwrap())
        .collect();
    assert_eq!(pixels.len(), 9);
    assert!(pixels.iter().all(|&p| p == pixels[0]));
}

#[test]
fn pgm_puts_high_y_on_top() {
    let mesh = build_cartesian_mesh([0.0, 1.0], [0.0, 1.0], 1, 1).unwrap();
    let values: Vec<f64> = mesh.nodes().iter().map(|p| p.y).collect();
    let pgm = format_pgm(&mesh, &values);
    let rows: Vec<&str> = pgm.lines().skip(3).collect();
    assert_eq!(rows, ["255 255", "0 0"]);
    assert_eq!(gray_levels(&[-1.0, 0.0, 1.0]), [0, 128, 255]);
}

#[test]
fn csv_has_one_row_per_node() {
    let mesh = build_cartesian_mesh([0.0, 2.0], [0.0, 1.0], 4, 3).unwrap();
    let values: Vec<f64> = mesh.nodes().iter().map(|p| p.x * p.y).collect();
    let csv = format_field_csv(&mesh, &values);
    assert_eq!(csv.lines().count(), mesh.node_count() + 1);
    assert_eq!(csv.lines().next(), Some("x,y,u"));
}

#[test]
fn csv_round_trip_is_byte_identical() {
    let mesh = build_cartesian_mesh([-0.3, 1.7], [0.1, 0.9], 7, 5).unwrap();
    let values: Vec<f64> = mesh
        .nodes()
        .iter()
        .map(|p| (p.x * 3.1).sin() * (p.y / 7.0).exp() + 1e-300)
        .collect();
    let text = format_field_csv(&mesh, &values);
    let rows = parse_field_csv(&text).unwrap();
    for ((p, u), (q, v)) in rows.iter().zip(mesh.nodes().iter().zip(&values)) {
        assert_eq!((p.x, p.y, *u), (q.x, q.y, *v));
    }
    assert_eq!(format_rows(rows), text);
}

#[test]
fn csv_parse_rejects_bad_input() {
    assert!(parse_field_csv("a,b,c\n").is_err());
    assert!(parse_field_csv("x,y,u\n1,2\n").is_err());
    assert!(parse_field_csv("x,y,u\n1,2,z\n").is_err());
}

#[test]
fn contours_of_linear_field_are_vertical() {
    let n = 10;
    let mesh = build_cartesian_mesh([0.0, 1.0], [0.0, 1.0], n, n).unwrap();
    let values: Vec<f64> = mesh.nodes().iter().map(|p| 1.0 - p.x).collect();
    let levels = equispaced_levels(&values, 20);
    assert_eq!(levels.len(), 20);
    let lines = contours(&mesh, &values, &levels);
    assert_eq!(lines.len(), 20);
    for line in &lines {
        let xs: Vec<f64> = line.points.iter().map(|p| p.x).collect();
        let spread = xs.iter().cloned().fold(f64::MIN, f64::max)
            - xs.iter().cloned().fold(f64::MAX, f64::min);
        assert!(
            spread <= 1.0 / n as f64,
            "level {} spread {spread}",
            line.level
        );
        assert!((xs[0] - (1.0 - line.level)).abs() <= 1e-12);
        // spans the full height as a single polyline
        let ys: Vec<f64> = line.points.iter().map(|p| p.y).collect();
        assert_eq!(ys.len(), n + 1);
        assert!(ys.contains(&0.0) && ys.contains(&1.0));
    }
    let csv = format_contours_csv(&lines);
    assert_eq!(csv.lines().count(), 1 + 20 * (n + 1));
}

#[test]
fn closed_contour_around_a_peak() {
    let mesh = build_cartesian_mesh([-1.0, 1.0], [-1.0, 1.0], 16, 16).unwrap();
    let values: Vec<f64> = mesh
        .nodes()
        .iter()
        .map(|p| -(p.x * p.x + p.y * p.y))
        .collect();
    let lines = contour_level(&mesh, &values, -0.25);
    assert_eq!(lines.len(), 1);
    let pts = &lines[0].points;
    assert_eq!(pts.first(), pts.last());
    for p in pts {
        assert!((p.coords.norm() - 0.5).abs() < 0.02, "{p}");
    }
}

#[test]
fn saddle_cell_splits_into_two_segments() {
    let mesh = build_cartesian_mesh([0.0, 1.0], [0.0, 1.0], 1, 1).unwrap();
    // corners (0,0), (1,0), (0,1), (1,1) by node index
    let values: Vec<f64> = mesh
        .nodes()
        .iter()
        .map(|p| if (p.x + p.y) % 2.0 == 0.0 { 1.0 } else { 0.0 })
        .collect();
    let lines = contour_level(&mesh, &values, 0.4);
    assert_eq!(lines.len(), 2);
    for l in &lines {
        assert_eq!(l.points.len(), 2);
    }
}

#[test]
fn constant_field_has_no_contours() {
    assert!(equispaced_levels(&[2.0; 9], 20).is_empty());
}

#[test]
fn vtk_structure() {
    let mesh = build_cartesian_mesh([0.0, 1.0], [0.0, 2.0], 3, 2).unwrap();
    let values = vec![1.5; mesh.node_count()];
    let vtk = format_vtk(&mesh, &values, "demo");
    let lines: Vec<&str> = vtk.lines().collect();
    assert_eq!(lines[0], "# vtk DataFile Version 3.0");
    assert_eq!(lines[1], "demo");
    assert_eq!(lines[2], "ASCII");
    assert_eq!(lines[3], "DATASET STRUCTURED_GRID");
    assert_eq!(lines[4], "DIMENSIONS 4 3 1");
    assert_eq!(lines[5], "POINTS 12 double");
    assert_eq!(lines[18], "POINT_DATA 12");
    assert_eq!(lines[19], "SCALARS u double 1");
    assert_eq!(lines.len(), 21 + 12);
}
