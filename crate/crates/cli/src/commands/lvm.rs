use gp_core::gplvm::fit_lvm;
use gp_core::{LvmConfig, Matrix};

use super::{open_out, print_summary, write_svg};
use crate::data::{numbered, read_table, write_csv};
use crate::error::CliError;
use crate::svg::{id_suffix, Chart, Marker, PALETTE};
use crate::LvmArgs;

pub fn run(args: &LvmArgs) -> Result<(), CliError> {
    let table = read_table(&args.common.data)?;
    let labels = table
        .has_label_column()
        .then(|| table.strings(table.cols() - 1));
    let d = table.cols() - usize::from(labels.is_some());
    if d == 0 {
        return Err(CliError::input(format!(
            "{}: no numeric columns",
            table.name
        )));
    }
    let y = table.numeric(0, d)?;
    let config = LvmConfig {
        q: args.q,
        max_iters: args.max_iters,
        seed: args.common.seed,
        ..LvmConfig::default()
    };
    let model = fit_lvm(&y, &config)?;

    let header = numbered("x", args.q);
    let rows: Vec<Vec<f64>> = (0..model.x_latent.rows())
        .map(|i| model.x_latent.row(i).to_vec())
        .collect();
    write_csv(open_out(args.common.out.as_deref())?, &header, &rows)?;

    let t = model.theta;
    let init = model
        .history
        .first()
        .copied()
        .unwrap_or(model.log_likelihood);
    print_summary(
        &format!(
            "sigma={:.6} length={:.6} beta={:.6} log_lik_init={:.6} log_lik_final={:.6} iterations={} converged={}",
            t.sigma, t.length, t.beta, init, model.log_likelihood, model.iterations, model.converged
        ),
        args.common.out.is_some(),
    );

    if let Some(path) = &args.common.svg {
        write_svg(path, &figure(&model.x_latent, labels.as_deref()).render())?;
    }
    Ok(())
}

/// Latent scatter; a one-dimensional latent space is spread over the row
/// index on the vertical axis.
fn figure(x: &Matrix, labels: Option<&[String]>) -> Chart {
    let n = x.rows();
    let px = x.col_vec(0);
    let py: Vec<f64> = if x.cols() >= 2 {
        x.col_vec(1)
    } else {
        (0..n).map(|i| i as f64).collect()
    };
    let mut chart = Chart::covering("GP-LVM latent space", &px, &py);
    let Some(labels) = labels else {
        chart.points("points", &px, &py, PALETTE[0], Marker::Circle);
        return chart;
    };
    let mut seen: Vec<&str> = Vec::new();
    for l in labels {
        if !seen.contains(&l.as_str()) {
            seen.push(l);
        }
    }
    for (k, label) in seen.iter().enumerate() {
        let (sx, sy): (Vec<f64>, Vec<f64>) = (0..n)
            .filter(|&i| labels[i] == *label)
            .map(|i| (px[i], py[i]))
            .unzip();
        let marker = if k % 2 == 0 {
            Marker::Circle
        } else {
            Marker::Cross
        };
        chart.points(
            &format!("points-{}", id_suffix(label)),
            &sx,
            &sy,
            PALETTE[k % PALETTE.len()],
            marker,
        );
    }
    chart
}
