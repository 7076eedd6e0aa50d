//! Trajectory simulation on quadratic problems: deterministic rate
//! measurement, stochastic stationary statistics, schedule-driven
//! asymptotic runs, and the constant-and-drop experiment.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::dynamics::{
    check_asymptotic_conditions, qhm_step, schedule_at, ParamSchedule, Regime as ScheduleRegime,
};
use crate::linalg::{norm, outer, sub as vec_sub, Mat};
use crate::math;
use crate::problem::{gaussian_noise_draw, MomentumParams, OptimizerState, QuadraticProblem};
use crate::rate::{global_rate, Regime};
use crate::rng::SplitMix64;
use crate::Error;

/// Distance at which a run is declared divergent and stopped.
pub const DIVERGENCE_THRESHOLD: f64 = 1e12;

/// Post-run summary of a stochastic trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryStats {
    pub iterates_kept: usize,
    /// Average loss over the post-burn-in window.
    pub mean_loss_window: f64,
    /// Empirical covariance of x - x* over the window.
    pub empirical_cov: Mat,
    pub measured_rate: Option<f64>,
    pub grad_norm_min: f64,
    pub diverged: bool,
    pub diverged_step: Option<u64>,
    pub warnings: Vec<String>,
}

/// Noiseless trajectory with per-step records for CSV export.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeterministicRun {
    pub distances: Vec<f64>,
    pub losses: Vec<f64>,
    pub grad_norms: Vec<f64>,
    /// `exp` of the least-squares slope of `log distance` vs step over the
    /// second half of the run; `None` when the trajectory hits the optimum.
    pub measured_rate: Option<f64>,
    pub predicted_rate: f64,
    pub stable: bool,
    pub diverged: bool,
    pub first_overflow_step: Option<usize>,
}

/// Runs noiseless QHM and fits the contraction rate. Oscillatory regimes
/// (complex or negative-real dominant eigenvalues) are fit on the local-max
/// peak envelope of the distance curve, since only the envelope contracts
/// at the predicted rate.
pub fn run_deterministic(
    problem: &QuadraticProblem,
    params: &MomentumParams,
    x0: &[f64],
    max_steps: usize,
) -> Result<DeterministicRun, Error> {
    if x0.len() != problem.dim() {
        return Err(Error::DimensionMismatch {
            expected: problem.dim(),
            got: x0.len(),
        });
    }
    let report = global_rate(params, &problem.spectrum());
    let mut state = OptimizerState::start(x0.to_vec());
    let mut distances = Vec::with_capacity(max_steps + 1);
    let mut losses = Vec::with_capacity(max_steps + 1);
    let mut grad_norms = Vec::with_capacity(max_steps + 1);
    let mut diverged = false;
    let mut first_overflow_step = None;
    for step in 0..=max_steps {
        let delta = vec_sub(&state.x, problem.optimum());
        let dist = norm(&delta);
        let grad = problem.gradient(&state.x);
        distances.push(dist);
        losses.push(problem.loss(&state.x));
        grad_norms.push(norm(&grad));
        if !dist.is_finite() || dist > DIVERGENCE_THRESHOLD {
            diverged = true;
            first_overflow_step = Some(step);
            break;
        }
        if step < max_steps {
            state = qhm_step(&state, &grad, params)?;
        }
    }
    let measured_rate = if diverged {
        None
    } else {
        let oscillatory = matches!(
            dominant_regime(&report),
            Regime::Complex | Regime::RealNegativeC1
        );
        fit_rate(&distances, oscillatory)
    };
    Ok(DeterministicRun {
        distances,
        losses,
        grad_norms,
        measured_rate,
        predicted_rate: report.rate,
        stable: report.stable,
        diverged,
        first_overflow_step,
    })
}

fn dominant_regime(report: &crate::rate::RateReport) -> Regime {
    if report.r_mu >= report.r_ell {
        report.regime_mu
    } else {
        report.regime_ell
    }
}

/// Least-squares slope of `log distance` vs step over the second half of
/// the curve (optionally reduced to its local-max envelope). Returns `None`
/// when the tail of the trajectory has effectively reached the optimum.
fn fit_rate(distances: &[f64], envelope_only: bool) -> Option<f64> {
    let n = distances.len();
    if n < 4 {
        return None;
    }
    let start = n / 2;
    let collect = |envelope: bool| {
        let mut points: Vec<(f64, f64)> = Vec::new();
        for k in start..n {
            let d = distances[k];
            if d < 1e-280 {
                continue;
            }
            if envelope {
                let left = if k > 0 { distances[k - 1] } else { 0.0 };
                let right = if k + 1 < n { distances[k + 1] } else { 0.0 };
                if d < left || d < right {
                    continue;
                }
            }
            points.push((k as f64, math::ln(d)));
        }
        points
    };
    let mut points = collect(envelope_only);
    if envelope_only && points.len() < 2 {
        // Near-critical damping: the oscillation period can exceed the
        // window, leaving no peaks; fall back to the raw curve.
        points = collect(false);
    }
    if points.len() < 2 {
        return None;
    }
    let m = points.len() as f64;
    let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
    for &(x, y) in &points {
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    let denom = m * sxx - sx * sx;
    if denom <= 0.0 {
        return None;
    }
    Some(math::exp((m * sxy - sx * sy) / denom))
}

/// Runs QHM with fresh Gaussian noise each step; statistics are collected
/// over the post-burn-in window. Deterministic given the seed.
pub fn run_stochastic(
    problem: &QuadraticProblem,
    schedule: &ParamSchedule,
    x0: &[f64],
    max_steps: usize,
    burn_in: usize,
    seed: u64,
) -> Result<TrajectoryStats, Error> {
    if burn_in >= max_steps {
        return Err(Error::InvalidArgument(format!(
            "burn_in {burn_in} must be below max_steps {max_steps}"
        )));
    }
    let mut rng = SplitMix64::new(seed);
    let mut state = OptimizerState::start(x0.to_vec());
    run_stochastic_from(problem, schedule, &mut state, &mut rng, max_steps, burn_in)
}

/// Same as [`run_stochastic`] but continues from explicit optimizer and RNG
/// state, so stages can be chained.
pub fn run_stochastic_from(
    problem: &QuadraticProblem,
    schedule: &ParamSchedule,
    state: &mut OptimizerState,
    rng: &mut SplitMix64,
    max_steps: usize,
    burn_in: usize,
) -> Result<TrajectoryStats, Error> {
    let n = problem.dim();
    let mut cov_sum = Mat::zeros(n, n);
    let mut loss_sum = 0.0;
    let mut kept = 0usize;
    let mut grad_norm_min = f64::INFINITY;
    let mut diverged = false;
    let mut diverged_step = None;
    for step in 0..max_steps {
        let grad_clean = problem.gradient(&state.x);
        let gn = norm(&grad_clean);
        if gn < grad_norm_min {
            grad_norm_min = gn;
        }
        let noise = gaussian_noise_draw(problem, rng);
        let grad: Vec<f64> = grad_clean
            .iter()
            .zip(&noise)
            .map(|(g, xi)| g + xi)
            .collect();
        let params = schedule_at(schedule, state.k);
        *state = qhm_step(state, &grad, &params)?;
        let delta = vec_sub(&state.x, problem.optimum());
        let dist = norm(&delta);
        if !dist.is_finite() || dist > DIVERGENCE_THRESHOLD {
            diverged = true;
            diverged_step = Some(state.k);
            break;
        }
        if step >= burn_in {
            cov_sum = cov_sum.add(&outer(&delta, &delta));
            loss_sum += problem.loss(&state.x);
            kept += 1;
        }
    }
    let empirical_cov = if kept > 0 {
        cov_sum.scale(1.0 / kept as f64)
    } else {
        cov_sum
    };
    let mean_loss_window = if kept > 0 {
        loss_sum / kept as f64
    } else {
        0.0
    };
    let mut warnings = Vec::new();
    if diverged {
        warnings.push(format!(
            "trajectory diverged at step {}; statistics are partial",
            diverged_step.unwrap_or(0)
        ));
    }
    Ok(TrajectoryStats {
        iterates_kept: kept,
        mean_loss_window,
        empirical_cov,
        measured_rate: None,
        grad_norm_min,
        diverged,
        diverged_step,
        warnings,
    })
}

/// Noise model for asymptotic runs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NoiseModel {
    Gaussian,
    /// Gaussian resampled until its norm is within the bound; matches the
    /// almost-surely-bounded-noise assumption of the beta -> 1 regime.
    TruncatedGaussian {
        bound: f64,
    },
}

/// Result of a schedule-driven asymptotic run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticRun {
    /// Running minimum of the clean gradient norm, one entry per step.
    pub grad_norm_min_curve: Vec<f64>,
    pub initial_grad_norm: f64,
    pub final_grad_norm_min: f64,
    pub warnings: Vec<String>,
}

/// Runs a decaying-parameter schedule and records the running minimum of
/// the (noiseless) gradient norm. Schedules failing the regime's summability
/// conditions still run, with a warning attached.
pub fn run_asymptotic(
    problem: &QuadraticProblem,
    schedule: &ParamSchedule,
    regime: ScheduleRegime,
    x0: &[f64],
    max_steps: usize,
    seed: u64,
    noise: NoiseModel,
) -> Result<AsymptoticRun, Error> {
    let mut warnings = Vec::new();
    let report = check_asymptotic_conditions(schedule, regime);
    if !report.satisfied {
        warnings.push(format!(
            "schedule fails the declared regime conditions: {}",
            report.violated.join("; ")
        ));
    }
    let mut rng = SplitMix64::new(seed);
    let mut state = OptimizerState::start(x0.to_vec());
    let initial_grad_norm = norm(&problem.gradient(x0));
    let mut running_min = initial_grad_norm;
    let mut curve = Vec::with_capacity(max_steps);
    for _ in 0..max_steps {
        let grad_clean = problem.gradient(&state.x);
        let gn = norm(&grad_clean);
        if gn < running_min {
            running_min = gn;
        }
        curve.push(running_min);
        let noise_draw = draw_noise(problem, &mut rng, noise);
        let grad: Vec<f64> = grad_clean
            .iter()
            .zip(&noise_draw)
            .map(|(g, xi)| g + xi)
            .collect();
        let params = schedule_at(schedule, state.k);
        state = qhm_step(&state, &grad, &params)?;
        let dist = norm(&vec_sub(&state.x, problem.optimum()));
        if !dist.is_finite() || dist > DIVERGENCE_THRESHOLD {
            warnings.push(format!("trajectory diverged at step {}", state.k));
            break;
        }
    }
    Ok(AsymptoticRun {
        initial_grad_norm,
        final_grad_norm_min: running_min,
        grad_norm_min_curve: curve,
        warnings,
    })
}

fn draw_noise(problem: &QuadraticProblem, rng: &mut SplitMix64, model: NoiseModel) -> Vec<f64> {
    match model {
        NoiseModel::Gaussian => gaussian_noise_draw(problem, rng),
        NoiseModel::TruncatedGaussian { bound } => {
            for _ in 0..100 {
                let xi = gaussian_noise_draw(problem, rng);
                if norm(&xi) <= bound {
                    return xi;
                }
            }
            // Pathologically tight bound: rescale rather than loop forever.
            let xi = gaussian_noise_draw(problem, rng);
            let n = norm(&xi);
            if n > 0.0 {
                xi.iter().map(|v| v * bound / n).collect()
            } else {
                xi
            }
        }
    }
}

/// Chains stochastic stages carrying (x, d) state; each stage reports its
/// own trailing-window statistics (burn-in = half the stage length).
pub fn run_constant_and_drop(
    problem: &QuadraticProblem,
    stages: &[(MomentumParams, u64)],
    x0: &[f64],
    seed: u64,
) -> Result<Vec<TrajectoryStats>, Error> {
    if stages.is_empty() {
        return Err(Error::InvalidArgument("no stages given".into()));
    }
    let spectrum = problem.spectrum();
    for (i, (params, _)) in stages.iter().enumerate() {
        let report = global_rate(params, &spectrum);
        if !report.stable {
            return Err(Error::UnstableSystem {
                spectral_radius: report.rate,
            })
            .map_err(|_| {
                Error::InvalidArgument(format!(
                    "stage {i} (alpha={}, beta={}, nu={}) is unstable on this spectrum (rate {})",
                    params.alpha, params.beta, params.nu, report.rate
                ))
            });
        }
    }
    let mut rng = SplitMix64::new(seed);
    let mut state = OptimizerState::start(x0.to_vec());
    let mut out = Vec::with_capacity(stages.len());
    for (params, steps) in stages {
        let steps = *steps as usize;
        let schedule = ParamSchedule::Constant(*params);
        let stats =
            run_stochastic_from(problem, &schedule, &mut state, &mut rng, steps, steps / 2)?;
        out.push(stats);
    }
    Ok(out)
}
