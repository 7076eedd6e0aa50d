//! `simulate`: deterministic rate measurement, stochastic stationary
//! statistics, decaying-schedule runs, constant-and-drop stages, and the
//! full (alpha, beta, nu) sweep.

use std::path::PathBuf;

use clap::{Args, Subcommand, ValueEnum};
use momentum_core::dynamics::{NuPolicy, ParamSchedule, Regime};
use momentum_core::problem::MomentumParams;
use momentum_core::rate::global_rate;
use momentum_core::rng::SplitMix64;
use momentum_core::sim::{
    run_asymptotic, run_constant_and_drop, run_deterministic, run_stochastic_from, NoiseModel,
};
use momentum_core::stationary::error_map_cell;
use serde::Deserialize;
use serde_json::json;

use crate::output::{fmt9, print_json, sig9, write_text, Provenance};
use crate::pool::{par_map, thread_count};
use crate::problem_file::{DefaultProblem, ProblemArgs};
use crate::{load_config, Failure, EXIT_OK, EXIT_UNSTABLE};

#[derive(Debug, Subcommand)]
pub enum SimulateCmd {
    /// Noiseless trajectory with fitted contraction rate.
    Det(DetArgs),
    /// Noisy trajectory; stationary statistics over the post-burn-in window.
    Stoch(StochArgs),
    /// Decaying-parameter schedule; running-min gradient-norm curve.
    Asym(AsymArgs),
    /// Constant-and-drop stages chained over one trajectory.
    Drop(DropArgs),
    /// Stationary-loss sweep over an (alpha, beta, nu) grid.
    Sweep(SweepArgs),
}

pub fn run(cmd: SimulateCmd) -> Result<u8, Failure> {
    match cmd {
        SimulateCmd::Det(args) => run_det(args),
        SimulateCmd::Stoch(args) => run_stoch(args),
        SimulateCmd::Asym(args) => run_asym(args),
        SimulateCmd::Drop(args) => run_drop(args),
        SimulateCmd::Sweep(args) => run_sweep(args),
    }
}

fn parse_x0(raw: &str) -> Result<Vec<f64>, Failure> {
    raw.split(',')
        .map(|t| {
            t.trim()
                .parse()
                .map_err(|_| Failure::Usage(format!("bad x0 component {t:?}")))
        })
        .collect()
}

fn resolve_x0(
    flag: &Option<String>,
    problem: &momentum_core::problem::QuadraticProblem,
    at_optimum: bool,
) -> Result<Vec<f64>, Failure> {
    match flag {
        Some(raw) => {
            let x0 = parse_x0(raw)?;
            if x0.len() != problem.dim() {
                return Err(Failure::Usage(format!(
                    "x0 has {} components, problem has dimension {}",
                    x0.len(),
                    problem.dim()
                )));
            }
            Ok(x0)
        }
        None if at_optimum => Ok(problem.optimum().to_vec()),
        None => Ok(problem.optimum().iter().map(|v| v + 1.0).collect()),
    }
}

// ---------------------------------------------------------------------------
// det

#[derive(Debug, Args, Deserialize, Default)]
#[serde(rename_all = "kebab-case", deny_unknown_fields, default)]
pub struct DetArgs {
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub nu: Option<f64>,
    #[arg(long)]
    pub steps: Option<usize>,
    /// Comma-separated starting point; defaults to optimum + 1 per coordinate.
    #[arg(long)]
    pub x0: Option<String>,
    /// Keep every k-th trajectory row in the CSV.
    #[arg(long)]
    pub thin: Option<usize>,
    /// Trajectory CSV destination; the summary JSON always goes to stdout.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    #[command(flatten)]
    #[serde(flatten)]
    pub problem: ProblemArgs,
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

fn run_det(mut args: DetArgs) -> Result<u8, Failure> {
    if let Some(path) = args.config.take() {
        let file: DetArgs = load_config(&path)?;
        args.alpha = args.alpha.or(file.alpha);
        args.beta = args.beta.or(file.beta);
        args.nu = args.nu.or(file.nu);
        args.steps = args.steps.or(file.steps);
        args.x0 = args.x0.take().or(file.x0);
        args.thin = args.thin.or(file.thin);
        args.output = args.output.take().or(file.output);
        args.problem.merge(file.problem);
    }
    let alpha = args
        .alpha
        .ok_or_else(|| Failure::Usage("missing --alpha".into()))?;
    let beta = args.beta.unwrap_or(0.0);
    let nu = args.nu.unwrap_or(0.0);
    let steps = args.steps.unwrap_or(2000);
    let thin = args.thin.unwrap_or(1).max(1);
    let params = MomentumParams::new(alpha, beta, nu).map_err(|e| Failure::Usage(e.to_string()))?;
    let problem = args.problem.resolve(DefaultProblem::Unit1D)?;
    let x0 = resolve_x0(&args.x0, &problem, false)?;

    let run = run_deterministic(&problem, &params, &x0, steps).map_err(Failure::from)?;
    let config = json!({
        "alpha": alpha, "beta": beta, "nu": nu, "steps": steps,
        "x0": x0, "thin": thin, "problem": args.problem.describe(),
    });
    let provenance = Provenance::new("simulate det", config, None);
    if let Some(path) = &args.output {
        let mut csv = provenance.csv_header();
        csv.push_str("step,distance,loss,grad_norm\n");
        for (k, ((d, l), g)) in run
            .distances
            .iter()
            .zip(&run.losses)
            .zip(&run.grad_norms)
            .enumerate()
        {
            if k % thin == 0 {
                csv.push_str(&format!("{k},{},{},{}\n", fmt9(*d), fmt9(*l), fmt9(*g)));
            }
        }
        write_text(Some(path), &csv)?;
    }
    print_json(
        &provenance,
        json!({
            "measured_rate": run.measured_rate.map(sig9),
            "predicted_rate": sig9(run.predicted_rate),
            "stable": run.stable,
            "diverged": run.diverged,
            "first_overflow_step": run.first_overflow_step,
            "final_distance": run.distances.last().map(|d| sig9(*d)),
        }),
    );
    Ok(if run.diverged { EXIT_UNSTABLE } else { EXIT_OK })
}

// ---------------------------------------------------------------------------
// stoch

#[derive(Debug, Args, Deserialize, Default)]
#[serde(rename_all = "kebab-case", deny_unknown_fields, default)]
pub struct StochArgs {
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub nu: Option<f64>,
    #[arg(long)]
    pub steps: Option<usize>,
    /// Steps excluded from the statistics window; defaults to steps / 2.
    #[arg(long)]
    pub burn_in: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Comma-separated starting point; defaults to the optimum.
    #[arg(long)]
    pub x0: Option<String>,
    #[command(flatten)]
    #[serde(flatten)]
    pub problem: ProblemArgs,
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

fn run_stoch(mut args: StochArgs) -> Result<u8, Failure> {
    if let Some(path) = args.config.take() {
        let file: StochArgs = load_config(&path)?;
        args.alpha = args.alpha.or(file.alpha);
        args.beta = args.beta.or(file.beta);
        args.nu = args.nu.or(file.nu);
        args.steps = args.steps.or(file.steps);
        args.burn_in = args.burn_in.or(file.burn_in);
        args.seed = args.seed.or(file.seed);
        args.x0 = args.x0.take().or(file.x0);
        args.problem.merge(file.problem);
    }
    let alpha = args
        .alpha
        .ok_or_else(|| Failure::Usage("missing --alpha".into()))?;
    let beta = args.beta.unwrap_or(0.0);
    let nu = args.nu.unwrap_or(0.0);
    let steps = args.steps.unwrap_or(1000);
    let burn_in = args.burn_in.unwrap_or(steps / 2);
    let seed = args.seed.unwrap_or(0);
    let params = MomentumParams::new(alpha, beta, nu).map_err(|e| Failure::Usage(e.to_string()))?;
    let problem = args.problem.resolve(DefaultProblem::Synthetic2D)?;
    let x0 = resolve_x0(&args.x0, &problem, true)?;
    if burn_in >= steps {
        return Err(Failure::Usage(format!(
            "burn-in {burn_in} must be below steps {steps}"
        )));
    }

    let schedule = ParamSchedule::Constant(params);
    let mut state = momentum_core::problem::OptimizerState::start(x0.clone());
    let mut rng = SplitMix64::new(seed);
    let stats = run_stochastic_from(&problem, &schedule, &mut state, &mut rng, steps, burn_in)
        .map_err(Failure::from)?;
    let tr_a_emp = problem.curvature().matmul(&stats.empirical_cov).trace();
    let config = json!({
        "alpha": alpha, "beta": beta, "nu": nu, "steps": steps,
        "burn-in": burn_in, "x0": x0, "problem": args.problem.describe(),
    });
    let provenance = Provenance::new("simulate stoch", config, Some(seed));
    print_json(
        &provenance,
        json!({
            "iterates_kept": stats.iterates_kept,
            "mean_loss_window": sig9(stats.mean_loss_window),
            "tr_a_empirical_cov": sig9(tr_a_emp),
            "grad_norm_min": sig9(stats.grad_norm_min),
            "diverged": stats.diverged,
            "diverged_step": stats.diverged_step,
            "warnings": stats.warnings,
        }),
    );
    Ok(if stats.diverged {
        EXIT_UNSTABLE
    } else {
        EXIT_OK
    })
}

// ---------------------------------------------------------------------------
// asym

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegimeFlag {
    Theorem1,
    Theorem2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseFlag {
    Gaussian,
    Truncated,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NuPolicyFlag {
    EqualToBeta,
    One,
}

#[derive(Debug, Args, Deserialize, Default)]
#[serde(rename_all = "kebab-case", deny_unknown_fields, default)]
pub struct AsymArgs {
    /// Which convergence regime the schedule is meant to satisfy.
    #[arg(long, value_enum)]
    pub regime: Option<RegimeFlag>,
    /// Step-size decay exponent: alpha_k proportional to (k+1)^-omega.
    #[arg(long)]
    pub omega: Option<f64>,
    /// beta -> 1 exponent: 1 - nu_k beta_k = (k+1)^-c.
    #[arg(long)]
    pub c: Option<f64>,
    /// Initial beta of the beta -> 0 schedule.
    #[arg(long)]
    pub beta0: Option<f64>,
    /// Geometric beta decay factor of the beta -> 0 schedule.
    #[arg(long)]
    pub decay: Option<f64>,
    /// Step-size prefactor of the beta -> 0 schedule.
    #[arg(long)]
    pub alpha0: Option<f64>,
    /// Fixed nu of the beta -> 0 schedule.
    #[arg(long)]
    pub nu: Option<f64>,
    /// nu policy of the beta -> 1 schedule.
    #[arg(long, value_enum)]
    pub nu_policy: Option<NuPolicyFlag>,
    #[arg(long, value_enum)]
    pub noise: Option<NoiseFlag>,
    /// Almost-sure noise bound for truncated noise.
    #[arg(long)]
    pub bound: Option<f64>,
    #[arg(long)]
    pub steps: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Comma-separated starting point; defaults to optimum + 1 per coordinate.
    #[arg(long)]
    pub x0: Option<String>,
    /// Running-min gradient-norm curve CSV destination.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    /// Keep every k-th curve row in the CSV.
    #[arg(long)]
    pub thin: Option<usize>,
    #[command(flatten)]
    #[serde(flatten)]
    pub problem: ProblemArgs,
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

fn run_asym(mut args: AsymArgs) -> Result<u8, Failure> {
    if let Some(path) = args.config.take() {
        let file: AsymArgs = load_config(&path)?;
        args.regime = args.regime.or(file.regime);
        args.omega = args.omega.or(file.omega);
        args.c = args.c.or(file.c);
        args.beta0 = args.beta0.or(file.beta0);
        args.decay = args.decay.or(file.decay);
        args.alpha0 = args.alpha0.or(file.alpha0);
        args.nu = args.nu.or(file.nu);
        args.nu_policy = args.nu_policy.or(file.nu_policy);
        args.noise = args.noise.or(file.noise);
        args.bound = args.bound.or(file.bound);
        args.steps = args.steps.or(file.steps);
        args.seed = args.seed.or(file.seed);
        args.x0 = args.x0.take().or(file.x0);
        args.output = args.output.take().or(file.output);
        args.thin = args.thin.or(file.thin);
        args.problem.merge(file.problem);
    }
    let regime_flag = args.regime.unwrap_or(RegimeFlag::Theorem1);
    let regime = match regime_flag {
        RegimeFlag::Theorem1 => Regime::Theorem1,
        RegimeFlag::Theorem2 => Regime::Theorem2,
    };
    let schedule = match regime_flag {
        RegimeFlag::Theorem1 => ParamSchedule::BetaToZero {
            omega: args.omega.unwrap_or(1.0),
            beta0: args.beta0.unwrap_or(0.5),
            beta_decay: args.decay.unwrap_or(0.99),
            alpha0: args.alpha0.unwrap_or(1.0),
            nu: args.nu.unwrap_or(1.0),
        },
        RegimeFlag::Theorem2 => ParamSchedule::BetaToOne {
            omega: args.omega.unwrap_or(0.9),
            c: args.c.unwrap_or(0.6),
            nu_policy: match args.nu_policy.unwrap_or(NuPolicyFlag::One) {
                NuPolicyFlag::EqualToBeta => NuPolicy::EqualToBeta,
                NuPolicyFlag::One => NuPolicy::One,
            },
        },
    };
    let noise = match args.noise.unwrap_or(match regime_flag {
        RegimeFlag::Theorem1 => NoiseFlag::Gaussian,
        RegimeFlag::Theorem2 => NoiseFlag::Truncated,
    }) {
        NoiseFlag::Gaussian => NoiseModel::Gaussian,
        NoiseFlag::Truncated => NoiseModel::TruncatedGaussian {
            bound: args.bound.unwrap_or(10.0),
        },
    };
    let steps = args.steps.unwrap_or(100_000);
    let seed = args.seed.unwrap_or(0);
    let thin = args.thin.unwrap_or(1).max(1);
    let problem = args.problem.resolve(DefaultProblem::Synthetic2D)?;
    let x0 = resolve_x0(&args.x0, &problem, false)?;

    let run = run_asymptotic(&problem, &schedule, regime, &x0, steps, seed, noise)
        .map_err(Failure::from)?;
    let config = json!({
        "regime": format!("{regime_flag:?}").to_lowercase(),
        "schedule": schedule, "noise": noise, "steps": steps,
        "x0": x0, "problem": args.problem.describe(),
    });
    let provenance = Provenance::new("simulate asym", config, Some(seed));
    if let Some(path) = &args.output {
        let mut csv = provenance.csv_header();
        csv.push_str("step,grad_norm_min\n");
        for (k, g) in run.grad_norm_min_curve.iter().enumerate() {
            if k % thin == 0 {
                csv.push_str(&format!("{k},{}\n", fmt9(*g)));
            }
        }
        write_text(Some(path), &csv)?;
    }
    print_json(
        &provenance,
        json!({
            "initial_grad_norm": sig9(run.initial_grad_norm),
            "final_grad_norm_min": sig9(run.final_grad_norm_min),
            "reduction_factor": sig9(run.initial_grad_norm / run.final_grad_norm_min.max(1e-300)),
            "warnings": run.warnings,
        }),
    );
    Ok(EXIT_OK)
}

// ---------------------------------------------------------------------------
// drop

#[derive(Debug, Args, Deserialize, Default)]
#[serde(rename_all = "kebab-case", deny_unknown_fields, default)]
pub struct DropArgs {
    /// Stages as `alpha:steps` pairs, e.g. `0.5:10000,0.05:10000`.
    #[arg(long)]
    pub stages: Option<String>,
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub nu: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Comma-separated starting point; defaults to the optimum.
    #[arg(long)]
    pub x0: Option<String>,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    #[command(flatten)]
    #[serde(flatten)]
    pub problem: ProblemArgs,
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

fn run_drop(mut args: DropArgs) -> Result<u8, Failure> {
    if let Some(path) = args.config.take() {
        let file: DropArgs = load_config(&path)?;
        args.stages = args.stages.take().or(file.stages);
        args.beta = args.beta.or(file.beta);
        args.nu = args.nu.or(file.nu);
        args.seed = args.seed.or(file.seed);
        args.x0 = args.x0.take().or(file.x0);
        args.output = args.output.take().or(file.output);
        args.problem.merge(file.problem);
    }
    let raw = args
        .stages
        .as_deref()
        .ok_or_else(|| Failure::Usage("missing --stages".into()))?;
    let beta = args.beta.unwrap_or(0.0);
    let nu = args.nu.unwrap_or(0.0);
    let seed = args.seed.unwrap_or(0);
    let mut stages = Vec::new();
    for token in raw.split(',') {
        let (a, s) = token
            .split_once(':')
            .ok_or_else(|| Failure::Usage(format!("bad stage {token:?}, want alpha:steps")))?;
        let alpha: f64 = a
            .trim()
            .parse()
            .map_err(|_| Failure::Usage(format!("bad stage alpha {a:?}")))?;
        let steps: u64 = s
            .trim()
            .parse()
            .map_err(|_| Failure::Usage(format!("bad stage step count {s:?}")))?;
        let params =
            MomentumParams::new(alpha, beta, nu).map_err(|e| Failure::Usage(e.to_string()))?;
        stages.push((params, steps));
    }
    let problem = args.problem.resolve(DefaultProblem::Synthetic2D)?;
    let x0 = resolve_x0(&args.x0, &problem, true)?;
    let spectrum = problem.spectrum();
    for (i, (params, _)) in stages.iter().enumerate() {
        let report = global_rate(params, &spectrum);
        if !report.stable {
            return Err(Failure::Unstable(format!(
                "stage {i} (alpha={}) is unstable: rate {}",
                params.alpha, report.rate
            )));
        }
    }

    let stats = run_constant_and_drop(&problem, &stages, &x0, seed).map_err(Failure::from)?;
    let config = json!({
        "stages": raw, "beta": beta, "nu": nu, "x0": x0,
        "problem": args.problem.describe(),
    });
    let provenance = Provenance::new("simulate drop", config, Some(seed));
    let mut csv = provenance.csv_header();
    csv.push_str("stage,alpha,beta,nu,steps,mean_loss,predicted_rate\n");
    let mut diverged = false;
    for (i, ((params, steps), st)) in stages.iter().zip(&stats).enumerate() {
        diverged |= st.diverged;
        let rate = global_rate(params, &spectrum).rate;
        csv.push_str(&format!(
            "{i},{},{},{},{steps},{},{}\n",
            fmt9(params.alpha),
            fmt9(params.beta),
            fmt9(params.nu),
            fmt9(st.mean_loss_window),
            fmt9(rate)
        ));
    }
    write_text(args.output.as_deref(), &csv)?;
    Ok(if diverged { EXIT_UNSTABLE } else { EXIT_OK })
}

// ---------------------------------------------------------------------------
// sweep

#[derive(Debug, Args, Deserialize, Default)]
#[serde(rename_all = "kebab-case", deny_unknown_fields, default)]
pub struct SweepArgs {
    /// Grid shape `NAxNBxNN`: alpha on [0.01, 1.5], beta on [0, 0.999],
    /// nu on [0, 1].
    #[arg(long)]
    pub grid: Option<String>,
    #[arg(long)]
    pub steps: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Start every cell at the optimum instead of optimum + 1.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub start_at_optimum: Option<bool>,
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

fn parse_grid(raw: &str) -> Result<(usize, usize, usize), Failure> {
    let parts: Vec<&str> = raw.split('x').collect();
    if parts.len() != 3 {
        return Err(Failure::Usage(format!("bad grid {raw:?}, want NAxNBxNN")));
    }
    let mut dims = [0usize; 3];
    for (slot, part) in dims.iter_mut().zip(&parts) {
        *slot = part
            .trim()
            .parse()
            .map_err(|_| Failure::Usage(format!("bad grid dimension {part:?}")))?;
        if *slot == 0 {
            return Err(Failure::Usage("grid dimensions must be positive".into()));
        }
    }
    Ok((dims[0], dims[1], dims[2]))
}

fn grid_point(lo: f64, hi: f64, i: usize, n: usize) -> f64 {
    if n <= 1 {
        lo
    } else {
        lo + (hi - lo) * i as f64 / (n - 1) as f64
    }
}

fn run_sweep(mut args: SweepArgs) -> Result<u8, Failure> {
    if let Some(path) = args.config.take() {
        let file: SweepArgs = load_config(&path)?;
        args.grid = args.grid.take().or(file.grid);
        args.steps = args.steps.or(file.steps);
        args.seed = args.seed.or(file.seed);
        args.start_at_optimum = args.start_at_optimum.or(file.start_at_optimum);
        args.threads = args.threads.or(file.threads);
        args.output = args.output.take().or(file.output);
        args.problem.merge(file.problem);
    }
    let (na, nb, nn) = parse_grid(args.grid.as_deref().unwrap_or("30x30x30"))?;
    let steps = args.steps.unwrap_or(1000);
    let seed = args.seed.unwrap_or(0);
    let at_optimum = args.start_at_optimum.unwrap_or(false);
    let problem = args.problem.resolve(DefaultProblem::Synthetic2D)?;
    let x0 = resolve_x0(&None, &problem, at_optimum)?;
    let spectrum = problem.spectrum();

    let config = json!({
        "grid": format!("{na}x{nb}x{nn}"), "steps": steps,
        "start-at-optimum": at_optimum, "problem": args.problem.describe(),
    });
    let provenance = Provenance::new("simulate sweep", config, Some(seed));
    let threads = thread_count(args.threads);
    let rows = par_map(na * nb * nn, threads, |idx| {
        let ai = idx / (nb * nn);
        let bi = (idx / nn) % nb;
        let ni = idx % nn;
        let alpha = grid_point(0.01, 1.5, ai, na);
        let beta = grid_point(0.0, 0.999, bi, nb);
        let nu = grid_point(0.0, 1.0, ni, nn);
        let params = MomentumParams::new(alpha, beta, nu).expect("grid point in range");
        if !global_rate(&params, &spectrum).stable {
            return Ok::<String, momentum_core::Error>(format!(
                "{},{},{},,,,,false,\n",
                fmt9(alpha),
                fmt9(beta),
                fmt9(nu)
            ));
        }
        let cell = error_map_cell(alpha, beta, nu, &problem, 0.2)?;
        let schedule = ParamSchedule::Constant(params);
        let mut state = momentum_core::problem::OptimizerState::start(x0.clone());
        let mut rng = SplitMix64::derive(seed, idx as u64);
        let stats =
            run_stochastic_from(&problem, &schedule, &mut state, &mut rng, steps, steps / 2)?;
        let mean_loss = if stats.diverged {
            f64::NAN
        } else {
            stats.mean_loss_window
        };
        Ok(format!(
            "{},{},{},{},{},{},{},{},{}\n",
            fmt9(alpha),
            fmt9(beta),
            fmt9(nu),
            fmt9(cell.tr_exact),
            fmt9(cell.tr_pred1),
            fmt9(cell.tr_pred2),
            fmt9(cell.rel_err),
            cell.stable && !stats.diverged,
            fmt9(mean_loss)
        ))
    });
    let mut csv = provenance.csv_header();
    csv.push_str("alpha,beta,nu,tr_exact,tr_pred1,tr_pred2,rel_err,stable,mean_loss_emp\n");
    for row in rows {
        csv.push_str(&row.map_err(Failure::from)?);
    }
    write_text(args.output.as_deref(), &csv)?;
    Ok(EXIT_OK)
}
