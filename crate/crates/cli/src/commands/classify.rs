use gp_core::gpc::{fit_binary, fit_multi};
use gp_core::Matrix;

use super::{
    check_kernel_dim, open_out, optimizer_options, parse_kernel, print_summary, require_1d,
    row_with, test_inputs, write_svg,
};
use crate::data::{numbered, read_table, write_csv, RawTable};
use crate::error::CliError;
use crate::svg::{Chart, Marker, PALETTE};
use crate::ClassifyArgs;

#[derive(Debug, Clone, PartialEq)]
enum Labels {
    /// Every label is −1 or +1.
    Binary(Vec<f64>),
    /// Labels `0..classes`.
    Multi { labels: Vec<usize>, classes: usize },
}

/// Binary when any label is −1, otherwise non-negative integer classes.
fn parse_labels(table: &RawTable, col: usize) -> Result<Labels, CliError> {
    let mut values = Vec::with_capacity(table.rows());
    for (line, rec) in &table.records {
        let field = &rec[col];
        let v: f64 = field
            .parse()
            .ok()
            .filter(|v: &f64| v.is_finite())
            .ok_or_else(|| {
                CliError::input(format!(
                    "{}:{line}:{}: cannot parse label {field:?}",
                    table.name,
                    col + 1
                ))
            })?;
        values.push((*line, v));
    }
    if values.iter().any(|(_, v)| *v == -1.0) {
        if let Some((line, v)) = values.iter().find(|(_, v)| *v != -1.0 && *v != 1.0) {
            return Err(CliError::input(format!(
                "{}:{line}:{}: binary labels must be -1 or 1, got {v}",
                table.name,
                col + 1
            )));
        }
        return Ok(Labels::Binary(values.into_iter().map(|(_, v)| v).collect()));
    }
    let mut labels = Vec::with_capacity(values.len());
    for (line, v) in values {
        if v < 0.0 || v.fract() != 0.0 || v > u32::MAX as f64 {
            return Err(CliError::input(format!(
                "{}:{line}:{}: class labels must be -1/1 or 0..C-1, got {v}",
                table.name,
                col + 1
            )));
        }
        labels.push(v as usize);
    }
    let classes = labels.iter().max().map_or(0, |m| m + 1);
    Ok(Labels::Multi { labels, classes })
}

pub fn run(args: &ClassifyArgs) -> Result<(), CliError> {
    let table = read_table(&args.common.data)?;
    if table.cols() < 2 {
        return Err(CliError::input(format!(
            "{}: expected header `x,label` or `x1..xk,label`, found {} column(s)",
            table.name,
            table.cols()
        )));
    }
    let d = table.cols() - 1;
    let xs = table.numeric(0, d)?;
    let labels = parse_labels(&table, d)?;
    let kernel = parse_kernel(&args.kernel)?;
    check_kernel_dim(&kernel, d)?;
    let opts = optimizer_options(args.common.seed);
    let opts = args.optimize.then_some(&opts);
    let table_in_file = args.common.out.is_some();
    let x_star = test_inputs(&args.points, &xs)?;

    let (header, probs, curves): (Vec<String>, Vec<Vec<f64>>, usize) = match &labels {
        Labels::Binary(y) => {
            let model = fit_binary(xs.clone(), y.clone(), kernel, opts)?;
            if args.optimize {
                let line = format!(
                    "kernel={:.6} log_ml={:.6}",
                    model.kernel(),
                    model.log_marginal_likelihood()
                );
                print_summary(&line, table_in_file);
            }
            let p = model.predict_prob(&x_star)?;
            let mut header = numbered("x_star", d);
            header.push("prob".into());
            (header, p.into_iter().map(|v| vec![v]).collect(), 1)
        }
        Labels::Multi { labels, classes } => {
            let kernels = vec![kernel; *classes];
            let model = fit_multi(xs.clone(), labels.clone(), kernels, opts)?;
            if args.optimize {
                let mut line = String::new();
                for (c, k) in model.kernels().iter().enumerate() {
                    line.push_str(&format!("kernel_{c}={k:.6} "));
                }
                line.push_str(&format!("log_ml={:.6}", model.log_marginal_likelihood()?));
                print_summary(&line, table_in_file);
            }
            let p = model.predict_proba(&x_star)?;
            let mut header = numbered("x_star", d);
            header.extend((0..*classes).map(|c| format!("prob_{c}")));
            (header, p, *classes)
        }
    };

    let rows: Vec<Vec<f64>> = probs
        .iter()
        .enumerate()
        .map(|(i, p)| row_with(x_star.row(i), p))
        .collect();
    write_csv(open_out(args.common.out.as_deref())?, &header, &rows)?;

    if let Some(path) = &args.common.svg {
        require_1d(d, "--svg")?;
        let chart = figure(&xs, &labels, &x_star, &probs, curves);
        write_svg(path, &chart.render())?;
    }
    Ok(())
}

/// Probability curves with training marks at 0 and 1 (−1 drawn at 0).
fn figure(
    xs: &Matrix,
    labels: &Labels,
    x_star: &Matrix,
    probs: &[Vec<f64>],
    curves: usize,
) -> Chart {
    let grid = x_star.col_vec(0);
    let xs1 = xs.col_vec(0);
    let unit = [0.0, 1.0];
    let mut chart = Chart::covering("GP classification", grid.iter().chain(&xs1), unit.iter());
    match labels {
        Labels::Binary(y) => {
            let p: Vec<f64> = probs.iter().map(|r| r[0]).collect();
            chart.line("mean", &grid, &p, PALETTE[0]);
            let marks: Vec<f64> = y.iter().map(|v| if *v > 0.0 { 1.0 } else { 0.0 }).collect();
            chart.points("points", &xs1, &marks, "#000000", Marker::Cross);
        }
        Labels::Multi { labels, .. } => {
            for c in 0..curves {
                let colour = PALETTE[c % PALETTE.len()];
                let p: Vec<f64> = probs.iter().map(|r| r[c]).collect();
                chart.line(&format!("mean-{c}"), &grid, &p, colour);
                let (px, py): (Vec<f64>, Vec<f64>) = xs1
                    .iter()
                    .zip(labels)
                    .filter(|(_, l)| **l == c)
                    .map(|(x, _)| (*x, 1.0))
                    .unzip();
                chart.points(&format!("points-{c}"), &px, &py, colour, Marker::Cross);
            }
        }
    }
    chart
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table(labels: &[&str]) -> RawTable {
        RawTable {
            name: "t.csv".into(),
            headers: vec!["x".into(), "label".into()],
            records: labels
                .iter()
                .enumerate()
                .map(|(i, l)| (i as u64 + 2, vec![i.to_string(), (*l).to_string()]))
                .collect(),
        }
    }

    #[test]
    fn label_kinds() {
        assert_eq!(
            parse_labels(&table(&["-1", "1", "1"]), 1).unwrap(),
            Labels::Binary(vec![-1.0, 1.0, 1.0])
        );
        assert_eq!(
            parse_labels(&table(&["0", "2", "1"]), 1).unwrap(),
            Labels::Multi {
                labels: vec![0, 2, 1],
                classes: 3
            }
        );
        let err = parse_labels(&table(&["-1", "1", "0"]), 1).unwrap_err();
        assert!(err.to_string().contains("t.csv:4:2"), "{err}");
        assert!(parse_labels(&table(&["0", "1.5"]), 1).is_err());
        assert!(parse_labels(&table(&["0", "cat"]), 1).is_err());
    }
}
