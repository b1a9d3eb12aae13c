//! One module per subcommand plus the plumbing they share.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use gp_core::kernels::parse_kernel_spec;
use gp_core::{KernelExpr, Matrix, OptOptions};

use crate::data::{parse_grid, read_table};
use crate::error::{kernel_spec_error, CliError};
use crate::TestPoints;

pub mod classify;
pub mod kernel_eval;
pub mod lvm;
pub mod regress;

/// Points in the default 1-D prediction grid.
const DEFAULT_GRID_POINTS: usize = 200;

pub(crate) fn parse_kernel(spec: &str) -> Result<KernelExpr, CliError> {
    parse_kernel_spec(spec).map_err(|e| kernel_spec_error(spec, &e))
}

pub(crate) fn check_kernel_dim(kernel: &KernelExpr, d: usize) -> Result<(), CliError> {
    kernel
        .check_dim(d)
        .map_err(|e| CliError::input(format!("kernel does not fit {d}-dimensional inputs: {e}")))
}

pub(crate) fn optimizer_options(seed: u64) -> OptOptions {
    OptOptions {
        seed,
        ..OptOptions::default()
    }
}

/// The table destination: `--out` if given, else standard output.
pub(crate) fn open_out(path: Option<&Path>) -> Result<Box<dyn Write>, CliError> {
    match path {
        Some(p) => {
            let f =
                File::create(p).map_err(|e| CliError::input(format!("{}: {e}", p.display())))?;
            Ok(Box::new(BufWriter::new(f)))
        }
        None => Ok(Box::new(BufWriter::new(io::stdout().lock()))),
    }
}

/// Prints a `key=value` summary line. It goes to standard output when the
/// table went to a file, and to standard error otherwise so that piped CSV
/// stays clean.
pub(crate) fn print_summary(line: &str, table_in_file: bool) {
    if table_in_file {
        println!("{line}");
    } else {
        eprintln!("{line}");
    }
}

pub(crate) fn write_svg(path: &Path, svg: &str) -> Result<(), CliError> {
    std::fs::write(path, svg).map_err(|e| CliError::input(format!("{}: {e}", path.display())))
}

pub(crate) fn require_1d(d: usize, what: &str) -> Result<(), CliError> {
    if d == 1 {
        Ok(())
    } else {
        Err(CliError::input(format!(
            "{what} needs 1-D inputs, data has {d} input columns"
        )))
    }
}

/// Reads test inputs with `d` columns; a trailing `y` or `label` column is
/// dropped.
pub(crate) fn read_test_inputs(path: &Path, d: usize) -> Result<Matrix, CliError> {
    let table = read_table(path)?;
    let cols = input_columns(&table.headers);
    if cols != d {
        return Err(CliError::input(format!(
            "{}: expected {d} input columns, found {cols}",
            table.name
        )));
    }
    table.numeric(0, cols)
}

/// Number of leading input columns, excluding a trailing target column.
pub(crate) fn input_columns(headers: &[String]) -> usize {
    match headers.last().map(String::as_str) {
        Some("y" | "label") => headers.len() - 1,
        _ => headers.len(),
    }
}

/// A 1-D grid spanning `values` with a 10% margin on each side.
pub(crate) fn default_grid(values: &[f64]) -> Vec<f64> {
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let pad = if hi > lo { 0.1 * (hi - lo) } else { 1.0 };
    let (lo, hi) = (lo - pad, hi + pad);
    let step = (hi - lo) / (DEFAULT_GRID_POINTS - 1) as f64;
    (0..DEFAULT_GRID_POINTS)
        .map(|i| lo + step * i as f64)
        .collect()
}

/// Resolves `--grid` / `--test`; without either, 1-D data get a default
/// grid and higher-dimensional data are predicted at the training inputs.
pub(crate) fn test_inputs(points: &TestPoints, xs: &Matrix) -> Result<Matrix, CliError> {
    let d = xs.cols();
    if let Some(spec) = &points.grid {
        require_1d(d, "--grid")?;
        return Ok(Matrix::column(&parse_grid(spec)?));
    }
    if let Some(path) = &points.test {
        return read_test_inputs(path, d);
    }
    if d == 1 {
        Ok(Matrix::column(&default_grid(&xs.col_vec(0))))
    } else {
        Ok(xs.clone())
    }
}

pub(crate) fn row_with(x: &[f64], rest: &[f64]) -> Vec<f64> {
    let mut row = x.to_vec();
    row.extend_from_slice(rest);
    row
}
