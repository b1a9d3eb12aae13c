use gp_core::gpr::optimize_hyperparams;
use gp_core::GprModel;

use super::{
    check_kernel_dim, open_out, optimizer_options, parse_kernel, print_summary, require_1d,
    row_with, test_inputs, write_svg,
};
use crate::data::{fmt_f64, numbered, read_table, write_csv};
use crate::error::CliError;
use crate::svg::{Chart, Marker, PALETTE};
use crate::RegressArgs;

pub fn run(args: &RegressArgs) -> Result<(), CliError> {
    if !(args.band.is_finite() && args.band >= 0.0) {
        return Err(CliError::input(format!(
            "--band must be a non-negative number, got {}",
            args.band
        )));
    }
    let table = read_table(&args.common.data)?;
    if table.cols() < 2 {
        return Err(CliError::input(format!(
            "{}: expected header `x,y` or `x1..xk,y`, found {} column(s)",
            table.name,
            table.cols()
        )));
    }
    let d = table.cols() - 1;
    let xs = table.numeric(0, d)?;
    let y = table.numeric(d, d + 1)?.into_vec();

    let mut kernel = parse_kernel(&args.kernel)?;
    check_kernel_dim(&kernel, d)?;
    let table_in_file = args.common.out.is_some();
    if args.optimize {
        let (best, log_ml) =
            optimize_hyperparams(&xs, &y, &kernel, &optimizer_options(args.common.seed))?;
        print_summary(
            &format!("kernel={best:.6} log_ml={log_ml:.6}"),
            table_in_file,
        );
        kernel = best;
    }
    let model = GprModel::fit(xs.clone(), y.clone(), kernel)?;

    let x_star = test_inputs(&args.points, &xs)?;
    let pred = model.predict(&x_star)?;
    let (lo, hi) = pred.band(args.band);

    let mut header = numbered("x_star", d);
    header.extend(["mean", "variance", "lo", "hi"].map(String::from));
    let rows: Vec<Vec<f64>> = (0..x_star.rows())
        .map(|i| {
            row_with(
                x_star.row(i),
                &[pred.mean[i], pred.variance[i], lo[i], hi[i]],
            )
        })
        .collect();
    write_csv(open_out(args.common.out.as_deref())?, &header, &rows)?;

    if let Some(path) = &args.common.svg {
        require_1d(d, "--svg")?;
        let grid = x_star.col_vec(0);
        let xs1 = xs.col_vec(0);
        let title = format!(
            "GP regression, band = mean \u{b1} {} sd, log ML = {}",
            args.band,
            fmt_f64(model.log_marginal_likelihood())
        );
        let mut chart = Chart::covering(
            &title,
            grid.iter().chain(&xs1),
            lo.iter().chain(&hi).chain(&y).chain(&pred.mean),
        );
        chart.band("band", &grid, &lo, &hi, PALETTE[0]);
        chart.line("mean", &grid, &pred.mean, PALETTE[0]);
        chart.points("points", &xs1, &y, "#000000", Marker::Cross);
        write_svg(path, &chart.render())?;
    }
    Ok(())
}
