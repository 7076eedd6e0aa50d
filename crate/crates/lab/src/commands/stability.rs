//! `stability`: upper alpha bound and the nu=1 no-trade-off interval.

use std::path::PathBuf;

use clap::Args;
use momentum_core::problem::Spectrum;
use momentum_core::rate::{shb_no_tradeoff_interval, stability_max_alpha};
use serde::Deserialize;
use serde_json::json;

use crate::output::{print_json, sig9, Provenance};
use crate::{load_config, Failure, EXIT_OK};

#[derive(Debug, Args, Deserialize, Default)]
#[serde(rename_all = "kebab-case", deny_unknown_fields, default)]
pub struct StabilityArgs {
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub nu: Option<f64>,
    #[arg(long)]
    pub mu: Option<f64>,
    #[arg(long = "L")]
    #[serde(rename = "L")]
    pub ell: Option<f64>,
    /// Also print the alpha interval on which the nu=1 rate is exactly
    /// sqrt(beta); requires --mu.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub no_tradeoff: Option<bool>,
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

pub fn run(mut args: StabilityArgs) -> Result<u8, Failure> {
    if let Some(path) = args.config.take() {
        let file: StabilityArgs = load_config(&path)?;
        args.beta = args.beta.or(file.beta);
        args.nu = args.nu.or(file.nu);
        args.mu = args.mu.or(file.mu);
        args.ell = args.ell.or(file.ell);
        args.no_tradeoff = args.no_tradeoff.or(file.no_tradeoff);
    }
    let beta = args.beta.unwrap_or(0.0);
    let nu = args.nu.unwrap_or(0.0);
    let ell = args
        .ell
        .ok_or_else(|| Failure::Usage("missing --L".into()))?;
    if !(0.0..1.0).contains(&beta) || !(0.0..=1.0).contains(&nu) || ell <= 0.0 {
        return Err(Failure::Usage(
            "need beta in [0,1), nu in [0,1], L > 0".into(),
        ));
    }
    let alpha_max = stability_max_alpha(beta, nu, ell);
    let no_tradeoff = if args.no_tradeoff.unwrap_or(false) {
        let mu = args.mu.ok_or_else(|| {
            Failure::Usage("--no-tradeoff needs --mu to evaluate the interval".into())
        })?;
        let spectrum = Spectrum::new(mu, ell).map_err(|e| Failure::Usage(e.to_string()))?;
        shb_no_tradeoff_interval(beta, &spectrum).map(|(lo, hi)| json!([sig9(lo), sig9(hi)]))
    } else {
        None
    };
    let config = json!({
        "beta": beta, "nu": nu, "mu": args.mu, "L": ell,
        "no-tradeoff": args.no_tradeoff.unwrap_or(false),
    });
    let provenance = Provenance::new("stability", config, None);
    print_json(
        &provenance,
        json!({
            "alpha_max": sig9(alpha_max),
            "no_tradeoff_interval": no_tradeoff,
        }),
    );
    Ok(EXIT_OK)
}
