use std::io::Write;

use gp_core::Matrix;

use super::{check_kernel_dim, input_columns, open_out, parse_kernel, test_inputs};
use crate::data::read_table;
use crate::error::CliError;
use crate::KernelEvalArgs;

fn parse_point(text: &str, d: usize) -> Result<Matrix, CliError> {
    let coords: Result<Vec<f64>, _> = text.split(',').map(|s| s.trim().parse::<f64>()).collect();
    match coords {
        Ok(c) if c.len() == d && c.iter().all(|v| v.is_finite()) => {
            Matrix::from_row_slice(1, d, &c).map_err(|e| CliError::input(e.to_string()))
        }
        _ => Err(CliError::input(format!(
            "invalid --x-star {text:?}: expected {d} comma-separated number(s)"
        ))),
    }
}

/// Writes `name (r×c):` followed by the rows at two decimals.
pub fn write_matrix<W: Write>(out: &mut W, name: &str, m: &Matrix) -> std::io::Result<()> {
    writeln!(out, "{name} ({}x{}):", m.rows(), m.cols())?;
    for i in 0..m.rows() {
        let cells: Vec<String> = m.row(i).iter().map(|v| format!("{v:8.2}")).collect();
        writeln!(out, "{}", cells.join(""))?;
    }
    Ok(())
}

pub fn run(args: &KernelEvalArgs) -> Result<(), CliError> {
    let table = read_table(&args.data)?;
    let d = input_columns(&table.headers);
    if d == 0 {
        return Err(CliError::input(format!("{}: no input columns", table.name)));
    }
    let xs = table.numeric(0, d)?;
    let kernel = parse_kernel(&args.kernel)?;
    check_kernel_dim(&kernel, d)?;

    let x_star = match &args.x_star {
        Some(text) => Some(parse_point(text, d)?),
        None if args.points.grid.is_some() || args.points.test.is_some() => {
            Some(test_inputs(&args.points, &xs)?)
        }
        None => None,
    };

    let k = kernel.gram(&xs)?;
    let mut out = open_out(args.out.as_deref())?;
    write_matrix(&mut out, "K", &k)?;
    if let Some(x_star) = x_star {
        // One row per test point: [k(x*, x1) ... k(x*, xn)].
        write_matrix(&mut out, "K*", &kernel.cross(&xs, &x_star)?)?;
        write_matrix(&mut out, "K**", &kernel.test_covariance(&x_star)?)?;
    }
    out.flush()?;
    Ok(())
}
