//! JSON input formats: the space file and the simulation query file.
//!
//! Space file schema:
//!
//! ```json
//! {
//!   "metric": "euclidean" | "explicit",
//!   "dim": 2,
//!   "points": [{"id": "a", "coords": [0.0, 0.5], "mass": 0.2}, ...],
//!   "distances": [[0.0, ...], ...]
//! }
//! ```
//!
//! `coords` drive the euclidean mode (with `distances`, when also present,
//! cross-checked to 1e-12 relative); `distances` drive the explicit mode.
//! Missing masses default to 0.

use std::path::Path;

use serde::Deserialize;

use shearer_core::{AtomicMeasure, FiniteMetricSpace, RegionSet};

use crate::CliError;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SpaceFile {
    metric: Metric,
    #[serde(default)]
    dim: Option<usize>,
    points: Vec<PointSpec>,
    #[serde(default)]
    distances: Option<Vec<Vec<f64>>>,
}

#[derive(Debug, Deserialize, Clone, Copy, PartialEq)]
#[serde(rename_all = "lowercase")]
enum Metric {
    Euclidean,
    Explicit,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct PointSpec {
    id: String,
    #[serde(default)]
    coords: Option<Vec<f64>>,
    #[serde(default)]
    mass: Option<f64>,
}

/// Reads and validates a space file; masses default to 0 when omitted.
pub fn parse_space_file(path: &Path) -> Result<(FiniteMetricSpace, AtomicMeasure), CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
    let file: SpaceFile = serde_json::from_str(&text)
        .map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;

    let ids: Vec<String> = file.points.iter().map(|p| p.id.clone()).collect();
    let masses: Vec<f64> = file.points.iter().map(|p| p.mass.unwrap_or(0.0)).collect();

    let space = match file.metric {
        Metric::Euclidean => {
            let mut coords = Vec::with_capacity(file.points.len());
            for p in &file.points {
                let c = p.coords.clone().ok_or_else(|| {
                    CliError::input(format!(
                        "{}: point `{}` has no coords in euclidean mode",
                        path.display(),
                        p.id
                    ))
                })?;
                if let Some(dim) = file.dim {
                    if c.len() != dim {
                        return Err(CliError::input(format!(
                            "{}: point `{}` has {} coords, dim is {dim}",
                            path.display(),
                            p.id,
                            c.len()
                        )));
                    }
                }
                coords.push(c);
            }
            let space = FiniteMetricSpace::from_coords(ids, coords)?;
            // A distances block, when present, must agree with the coords.
            if let Some(matrix) = &file.distances {
                check_matrix_shape(path, matrix, space.len())?;
                for i in 0..space.len() {
                    for j in 0..space.len() {
                        let computed = space.distance(i, j);
                        let given = matrix[i][j];
                        if (computed - given).abs() > 1e-12 * computed.abs().max(given.abs()) {
                            return Err(CliError::input(format!(
                                "{}: distance ({}, {}) is {given}, coords give {computed}",
                                path.display(),
                                space.id(i),
                                space.id(j)
                            )));
                        }
                    }
                }
            }
            space
        }
        Metric::Explicit => {
            let matrix = file.distances.as_ref().ok_or_else(|| {
                CliError::input(format!(
                    "{}: explicit metric needs a distances matrix",
                    path.display()
                ))
            })?;
            check_matrix_shape(path, matrix, ids.len())?;
            FiniteMetricSpace::from_distances(ids, matrix, true)?
        }
    };
    let measure = AtomicMeasure::new(&space, masses)?;
    Ok((space, measure))
}

fn check_matrix_shape(path: &Path, matrix: &[Vec<f64>], n: usize) -> Result<(), CliError> {
    if matrix.len() != n || matrix.iter().any(|row| row.len() != n) {
        return Err(CliError::input(format!(
            "{}: distances must be a {n}x{n} matrix",
            path.display()
        )));
    }
    Ok(())
}

/// One query in the simulation query file.
#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum QuerySpec {
    Avoidance { region: Vec<String> },
    Intensity { point: String },
    FactorialMoment { region: Vec<String>, order: u32 },
    Dependence { a: Vec<String>, b: Vec<String> },
    OneDependentMargin { a: Vec<String>, b: Vec<String> },
}

/// Reads the query file for `sim run`.
pub fn parse_queries(
    path: &Path,
    space: &FiniteMetricSpace,
) -> Result<Vec<shearer_core::sim::Query>, CliError> {
    use shearer_core::sim::Query;
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
    let specs: Vec<QuerySpec> = serde_json::from_str(&text)
        .map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
    let region = |ids: &[String]| RegionSet::from_ids(space, ids).map_err(CliError::from);
    specs
        .iter()
        .map(|spec| {
            Ok(match spec {
                QuerySpec::Avoidance { region: r } => Query::Avoidance(region(r)?),
                QuerySpec::Intensity { point } => Query::Intensity(space.index_of(point)?),
                QuerySpec::FactorialMoment { region: r, order } => {
                    Query::FactorialMoment(region(r)?, *order)
                }
                QuerySpec::Dependence { a, b } => Query::Dependence(region(a)?, region(b)?),
                QuerySpec::OneDependentMargin { a, b } => Query::OneDependentMargin {
                    a: region(a)?,
                    b: region(b)?,
                },
            })
        })
        .collect()
}

/// Reads an id → mass JSON object (the auxiliary measure for `lll kp`).
pub fn parse_measure_file(
    path: &Path,
    space: &FiniteMetricSpace,
) -> Result<AtomicMeasure, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
    let map: std::collections::HashMap<String, f64> = serde_json::from_str(&text)
        .map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
    AtomicMeasure::from_map(space, &map).map_err(CliError::from)
}
