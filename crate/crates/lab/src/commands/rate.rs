//! `rate`: closed-form local convergence rate on a [mu, L] spectrum.

use std::path::PathBuf;

use clap::Args;
use momentum_core::problem::{MomentumParams, Spectrum};
use momentum_core::rate::global_rate;
use serde::Deserialize;
use serde_json::json;

use crate::output::{print_json, sig9, Provenance};
use crate::{load_config, Failure, EXIT_OK, EXIT_UNSTABLE};

#[derive(Debug, Args, Deserialize, Default)]
#[serde(rename_all = "kebab-case", deny_unknown_fields, default)]
pub struct RateArgs {
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub nu: Option<f64>,
    #[arg(long)]
    pub mu: Option<f64>,
    #[arg(long = "L")]
    #[serde(rename = "L")]
    pub ell: Option<f64>,
    /// JSON config file; explicit flags override its values.
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

pub fn run(mut args: RateArgs) -> Result<u8, Failure> {
    if let Some(path) = args.config.take() {
        let file: RateArgs = load_config(&path)?;
        args.alpha = args.alpha.or(file.alpha);
        args.beta = args.beta.or(file.beta);
        args.nu = args.nu.or(file.nu);
        args.mu = args.mu.or(file.mu);
        args.ell = args.ell.or(file.ell);
    }
    let alpha = args
        .alpha
        .ok_or_else(|| Failure::Usage("missing --alpha".into()))?;
    let beta = args.beta.unwrap_or(0.0);
    let nu = args.nu.unwrap_or(0.0);
    let mu = args
        .mu
        .ok_or_else(|| Failure::Usage("missing --mu".into()))?;
    let ell = args
        .ell
        .ok_or_else(|| Failure::Usage("missing --L".into()))?;

    let params = MomentumParams::new(alpha, beta, nu).map_err(|e| Failure::Usage(e.to_string()))?;
    let spectrum = Spectrum::new(mu, ell).map_err(|e| Failure::Usage(e.to_string()))?;
    let report = global_rate(&params, &spectrum);

    let config = json!({
        "alpha": alpha, "beta": beta, "nu": nu, "mu": mu, "L": ell,
    });
    let provenance = Provenance::new("rate", config, None);
    print_json(
        &provenance,
        json!({
            "r_mu": sig9(report.r_mu),
            "r_ell": sig9(report.r_ell),
            "regime_mu": report.regime_mu,
            "regime_ell": report.regime_ell,
            "rate": sig9(report.rate),
            "stable": report.stable,
        }),
    );
    Ok(if report.stable {
        EXIT_OK
    } else {
        EXIT_UNSTABLE
    })
}
