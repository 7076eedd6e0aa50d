//! `stationary`: exact Lyapunov covariance plus Taylor predictions, and the
//! approximation-error map over a (alpha, beta, nu) grid.

use std::path::PathBuf;

use clap::Args;
use momentum_core::problem::MomentumParams;
use momentum_core::stationary::{build_system, error_map_cell, lyapunov_exact, ErrorMapCell};
use serde::Deserialize;
use serde_json::json;

use crate::output::{fmt9, write_text, Provenance};
use crate::pool::{par_map, thread_count};
use crate::problem_file::{DefaultProblem, ProblemArgs};
use crate::{load_config, Failure, EXIT_OK};

pub const CSV_HEADER: &str = "alpha,beta,nu,tr_exact,tr_pred1,tr_pred2,rel_err,stable\n";

#[derive(Debug, Args, Deserialize, Default)]
#[serde(rename_all = "kebab-case", deny_unknown_fields, default)]
pub struct StationaryArgs {
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub nu: Option<f64>,
    /// Run the approximation-error map instead of a single query.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub error_map: Option<bool>,
    /// Comma-separated alpha list for the error map.
    #[arg(long)]
    pub alphas: Option<String>,
    #[arg(long)]
    pub beta_grid: Option<usize>,
    #[arg(long)]
    pub nu_grid: Option<usize>,
    /// Relative-error threshold for the `exceeds` classification.
    #[arg(long)]
    pub threshold: Option<f64>,
    /// Dump the full covariance matrices of a single query as JSON here.
    #[arg(long)]
    pub matrices: Option<PathBuf>,
    #[arg(long)]
    pub threads: Option<usize>,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    #[command(flatten)]
    #[serde(flatten)]
    pub problem: ProblemArgs,
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

fn cell_line(cell: &ErrorMapCell) -> String {
    format!(
        "{},{},{},{},{},{},{},{}\n",
        fmt9(cell.alpha),
        fmt9(cell.beta),
        fmt9(cell.nu),
        fmt9(cell.tr_exact),
        fmt9(cell.tr_pred1),
        fmt9(cell.tr_pred2),
        fmt9(cell.rel_err),
        cell.stable
    )
}

pub fn run(mut args: StationaryArgs) -> Result<u8, Failure> {
    if let Some(path) = args.config.take() {
        let file: StationaryArgs = load_config(&path)?;
        args.alpha = args.alpha.or(file.alpha);
        args.beta = args.beta.or(file.beta);
        args.nu = args.nu.or(file.nu);
        args.error_map = args.error_map.or(file.error_map);
        args.alphas = args.alphas.take().or(file.alphas);
        args.beta_grid = args.beta_grid.or(file.beta_grid);
        args.nu_grid = args.nu_grid.or(file.nu_grid);
        args.threshold = args.threshold.or(file.threshold);
        args.matrices = args.matrices.take().or(file.matrices);
        args.threads = args.threads.or(file.threads);
        args.output = args.output.take().or(file.output);
        args.problem.merge(file.problem);
    }
    let problem = args.problem.resolve(DefaultProblem::Synthetic2D)?;
    let threshold = args.threshold.unwrap_or(0.2);

    if args.error_map.unwrap_or(false) {
        let alphas: Vec<f64> = match &args.alphas {
            Some(list) => list
                .split(',')
                .map(|t| {
                    t.trim()
                        .parse()
                        .map_err(|_| Failure::Usage(format!("bad alpha value {t:?}")))
                })
                .collect::<Result<_, _>>()?,
            None => vec![0.05, 0.1, 0.2],
        };
        let beta_grid = args.beta_grid.unwrap_or(20);
        let nu_grid = args.nu_grid.unwrap_or(20);
        if beta_grid == 0 || nu_grid == 0 || alphas.is_empty() {
            return Err(Failure::Usage("empty error-map grid".into()));
        }
        let config = json!({
            "error-map": true, "alphas": alphas, "beta-grid": beta_grid,
            "nu-grid": nu_grid, "threshold": threshold,
            "problem": args.problem.describe(),
        });
        let provenance = Provenance::new("stationary", config, None);
        let cells = beta_grid * nu_grid;
        let threads = thread_count(args.threads);
        let rows = par_map(alphas.len() * cells, threads, |idx| {
            let alpha = alphas[idx / cells];
            let rest = idx % cells;
            let beta = (rest / nu_grid) as f64 / beta_grid as f64;
            let nu = if nu_grid > 1 {
                (rest % nu_grid) as f64 / (nu_grid - 1) as f64
            } else {
                0.0
            };
            error_map_cell(alpha, beta, nu, &problem, threshold)
        });
        let mut csv = provenance.csv_header();
        csv.push_str(CSV_HEADER);
        for row in rows {
            csv.push_str(&cell_line(&row.map_err(Failure::from)?));
        }
        write_text(args.output.as_deref(), &csv)?;
        return Ok(EXIT_OK);
    }

    let alpha = args
        .alpha
        .ok_or_else(|| Failure::Usage("missing --alpha".into()))?;
    let beta = args.beta.unwrap_or(0.0);
    let nu = args.nu.unwrap_or(0.0);
    let params = MomentumParams::new(alpha, beta, nu).map_err(|e| Failure::Usage(e.to_string()))?;
    let config = json!({
        "alpha": alpha, "beta": beta, "nu": nu,
        "threshold": threshold, "problem": args.problem.describe(),
    });
    let provenance = Provenance::new("stationary", config, None);

    let system = build_system(&params, &problem);
    let report = lyapunov_exact(&system, &problem, 1e-12).map_err(Failure::from)?;
    if let Some(path) = &args.matrices {
        let doc = json!({
            "provenance": provenance.json(),
            "sigma_z": report.sigma_z,
            "sigma_x": report.sigma_x,
            "sigma_d": report.sigma_d,
            "sigma_dx": report.sigma_dx,
            "sigma_xd": report.sigma_xd,
            "residual": report.residual,
        });
        std::fs::write(path, serde_json::to_string_pretty(&doc).unwrap())?;
    }
    let cell = error_map_cell(alpha, beta, nu, &problem, threshold).map_err(Failure::from)?;
    let mut csv = provenance.csv_header();
    csv.push_str(CSV_HEADER);
    csv.push_str(&cell_line(&cell));
    write_text(args.output.as_deref(), &csv)?;
    Ok(EXIT_OK)
}
