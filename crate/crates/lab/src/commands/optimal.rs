//! `optimal`: best (alpha, beta) at fixed nu, nu sweeps, and the strided
//! monotonicity check of the optimal rate in nu.

use std::path::PathBuf;

use clap::Args;
use momentum_core::rate::optimal_params;
use serde::Deserialize;
use serde_json::json;

use crate::output::{fmt9, write_text, Provenance};
use crate::pool::{par_map, thread_count};
use crate::{load_config, Failure, EXIT_CHECK_FAILED, EXIT_OK};

#[derive(Debug, Args, Deserialize, Default)]
#[serde(rename_all = "kebab-case", deny_unknown_fields, default)]
pub struct OptimalArgs {
    /// Condition number L/mu.
    #[arg(long)]
    pub kappa: Option<f64>,
    /// Single-point query at this nu.
    #[arg(long)]
    pub nu: Option<f64>,
    /// Sweep nu over a uniform grid of this many points on [0, 1].
    #[arg(long)]
    pub sweep_nu: Option<usize>,
    /// Number of beta grid points for the inner search.
    #[arg(long)]
    pub beta_grid: Option<usize>,
    /// After a sweep, check that the rate column is non-increasing in nu
    /// (strided window 10, tolerance 1e-3); exit 1 on violation.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub check_monotonicity: Option<bool>,
    #[arg(long)]
    pub threads: Option<usize>,
    /// Output CSV path (stdout if omitted).
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

pub fn run(mut args: OptimalArgs) -> Result<u8, Failure> {
    if let Some(path) = args.config.take() {
        let file: OptimalArgs = load_config(&path)?;
        args.kappa = args.kappa.or(file.kappa);
        args.nu = args.nu.or(file.nu);
        args.sweep_nu = args.sweep_nu.or(file.sweep_nu);
        args.beta_grid = args.beta_grid.or(file.beta_grid);
        args.check_monotonicity = args.check_monotonicity.or(file.check_monotonicity);
        args.threads = args.threads.or(file.threads);
        args.output = args.output.take().or(file.output);
    }
    let kappa = args
        .kappa
        .ok_or_else(|| Failure::Usage("missing --kappa".into()))?;
    let beta_grid = args.beta_grid.unwrap_or(1000);
    let config = json!({
        "kappa": kappa, "nu": args.nu, "sweep-nu": args.sweep_nu,
        "beta-grid": beta_grid,
        "check-monotonicity": args.check_monotonicity.unwrap_or(false),
    });
    let provenance = Provenance::new("optimal", config, None);

    let nus: Vec<f64> = match (args.nu, args.sweep_nu) {
        (Some(nu), None) => vec![nu],
        (None, Some(n)) if n >= 2 => (0..n).map(|i| i as f64 / (n - 1) as f64).collect(),
        (None, Some(_)) => return Err(Failure::Usage("--sweep-nu needs at least 2 points".into())),
        (None, None) => return Err(Failure::Usage("need --nu or --sweep-nu".into())),
        (Some(_), Some(_)) => {
            return Err(Failure::Usage("--nu and --sweep-nu are exclusive".into()))
        }
    };

    let threads = thread_count(args.threads);
    let rows: Vec<Result<_, momentum_core::Error>> = par_map(nus.len(), threads, |i| {
        optimal_params(nus[i], kappa, beta_grid)
    });

    let mut csv = provenance.csv_header();
    csv.push_str("nu,alpha_star,beta_star,rate_star\n");
    let mut rates = Vec::with_capacity(nus.len());
    for (nu, row) in nus.iter().zip(rows) {
        let opt = row.map_err(Failure::from)?;
        csv.push_str(&format!(
            "{},{},{},{}\n",
            fmt9(*nu),
            fmt9(opt.alpha),
            fmt9(opt.beta),
            fmt9(opt.rate)
        ));
        rates.push(opt.rate);
    }
    write_text(args.output.as_deref(), &csv)?;

    if args.check_monotonicity.unwrap_or(false) {
        if args.sweep_nu.is_none() {
            return Err(Failure::Usage(
                "--check-monotonicity requires --sweep-nu".into(),
            ));
        }
        let stride = 10.min(rates.len().saturating_sub(1)).max(1);
        let worst = (0..rates.len().saturating_sub(stride))
            .map(|i| rates[i + stride] - rates[i])
            .fold(f64::NEG_INFINITY, f64::max);
        if worst >= 1e-3 {
            eprintln!("monotonicity violated: worst strided increase {worst}");
            return Ok(EXIT_CHECK_FAILED);
        }
        eprintln!("monotonicity ok: worst strided increase {worst}");
    }
    Ok(EXIT_OK)
}
