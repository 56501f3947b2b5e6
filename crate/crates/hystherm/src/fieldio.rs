//! Field CSV files: header `x,t,value`, one row per grid node in time-major
//! order (all `x` of `t_0`, then all `x` of `t_1`, ...), every number written
//! with 17 significant digits so that reading a file back is bit-exact.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use hystherm_core::{SpaceTimeField, SpatialMesh, TimeGrid};

use crate::error::{CliError, Result};

pub const HEADER: [&str; 3] = ["x", "t", "value"];

/// Coordinates in a file may differ from the grid's by this much (relative
/// to the domain size) and still be accepted.
const COORD_TOLERANCE: f64 = 1e-9;

/// Scientific notation with 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_field(path: &Path, field: &SpaceTimeField) -> Result<()> {
    let file = File::create(path).map_err(|e| CliError::io(path, e))?;
    let mut out = BufWriter::new(file);
    let mesh = field.mesh();
    let grid = field.grid();
    let io = |e| CliError::io(path, e);
    writeln!(out, "{}", HEADER.join(",")).map_err(io)?;
    for k in 0..field.n_t() {
        let t = fmt_f64(grid.time(k));
        for i in 0..field.n_x() {
            writeln!(out, "{},{},{}", fmt_f64(mesh.coord(i)), t, fmt_f64(field.get(i, k))).map_err(io)?;
        }
    }
    out.flush().map_err(io)
}

pub fn read_field(path: &Path, mesh: SpatialMesh, grid: TimeGrid) -> Result<SpaceTimeField> {
    let bad = |message: String| CliError::FieldFile {
        path: path.to_path_buf(),
        message,
    };
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| match e.into_kind() {
            csv::ErrorKind::Io(io) => CliError::io(path, io),
            other => bad(format!("{other:?}")),
        })?;
    let headers = reader.headers().map_err(|e| bad(e.to_string()))?.clone();
    if headers.iter().collect::<Vec<_>>() != HEADER {
        return Err(bad(format!("header must be `{}`", HEADER.join(","))));
    }

    let (n_x, n_t) = (mesh.nodes(), grid.nodes());
    let mut field = SpaceTimeField::zeros(mesh, grid);
    let x_tol = COORD_TOLERANCE * mesh.length().max(1.0);
    let t_tol = COORD_TOLERANCE * grid.final_time().max(1.0);
    let mut count = 0usize;
    for (row, record) in reader.records().enumerate() {
        let line = row + 2;
        let record = record.map_err(|e| bad(format!("line {line}: {e}")))?;
        if record.len() != 3 {
            return Err(bad(format!("line {line}: expected 3 columns, found {}", record.len())));
        }
        let num = |j: usize| -> Result<f64> {
            let v: f64 = record[j]
                .parse()
                .map_err(|_| bad(format!("line {line}: `{}` is not a number", &record[j])))?;
            if v.is_finite() {
                Ok(v)
            } else {
                Err(bad(format!("line {line}: non-finite value")))
            }
        };
        if count >= n_x * n_t {
            return Err(bad(format!("more than n_x * n_t = {} data rows", n_x * n_t)));
        }
        let (k, i) = (count / n_x, count % n_x);
        let (x, t, v) = (num(0)?, num(1)?, num(2)?);
        if (x - mesh.coord(i)).abs() > x_tol || (t - grid.time(k)).abs() > t_tol {
            return Err(bad(format!(
                "line {line}: node ({x}, {t}) does not match grid node ({}, {}); rows must be time-major",
                mesh.coord(i),
                grid.time(k)
            )));
        }
        field.set(i, k, v);
        count += 1;
    }
    if count != n_x * n_t {
        return Err(bad(format!("expected {} data rows, found {count}", n_x * n_t)));
    }
    Ok(field)
}
