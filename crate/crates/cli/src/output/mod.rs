//! File emitters for fields, contours, heatmaps and metrics reports.

pub mod contour;
pub mod field_csv;
pub mod pgm;
pub mod report;
pub mod vtk;

use std::fs;
use std::path::{Path, PathBuf};

use commfield_core::mesh::Mesh;

use crate::config::OutputToggles;
use crate::CliError;

pub use contour::{contours, equispaced_levels, format_contours_csv, LEVEL_COUNT};
pub use field_csv::{format_field_csv, parse_field_csv};
pub use pgm::format_pgm;
pub use report::format_metrics;
pub use vtk::format_vtk;

/// A nodal field to be written, by name.
#[derive(Debug, Clone)]
pub struct NamedField {
    pub name: String,
    /// Index into the run's mesh list.
    pub mesh: usize,
    pub values: Vec<f64>,
}

pub fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Writes every enabled per-field file and returns the paths written.
pub fn emit_fields(
    dir: &Path,
    meshes: &[Mesh],
    fields: &[NamedField],
    toggles: OutputToggles,
) -> Result<Vec<PathBuf>, CliError> {
    fs::create_dir_all(dir).map_err(|source| CliError::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let mut written = Vec::new();
    for field in fields {
        let mesh = &meshes[field.mesh];
        let mut put = |suffix: &str, contents: String| -> Result<(), CliError> {
            let path = dir.join(format!("{}{suffix}", field.name));
            write_file(&path, &contents)?;
            written.push(path);
            Ok(())
        };
        if toggles.csv {
            put(".csv", format_field_csv(mesh, &field.values))?;
        }
        if toggles.vtk {
            put(".vtk", format_vtk(mesh, &field.values, &field.name))?;
        }
        if toggles.pgm {
            put(".pgm", format_pgm(mesh, &field.values))?;
        }
        if toggles.contours {
            let levels = equispaced_levels(&field.values, LEVEL_COUNT);
            put(
                "_contours.csv",
                format_contours_csv(&contours(mesh, &field.values, &levels)),
            )?;
        }
    }
    Ok(written)
}
