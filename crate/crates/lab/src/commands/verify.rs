//! `verify`: self-contained cross-checks of every closed form against an
//! independent brute-force computation, printed as a pass/fail table.

use clap::Args;
use momentum_core::dynamics::{nag_original_step, qhm_step};
use momentum_core::linalg::{norm, sub as vec_sub, Mat};
use momentum_core::problem::{
    random_spd_problem, MomentumParams, OptimizerState, QuadraticProblem, Spectrum,
};
use momentum_core::rate::{
    char_coeffs_raw, global_rate, local_rate_raw, shb_no_tradeoff_interval,
    spectral_radius_oracle_raw, stability_max_alpha,
};
use momentum_core::rng::SplitMix64;
use momentum_core::stationary::{build_system, lyapunov_exact, predict_first_order};

use crate::{Failure, EXIT_CHECK_FAILED, EXIT_OK};

const GROUPS: &[&str] = &[
    "rate-oracle",
    "stability",
    "lyapunov",
    "taylor",
    "nag",
    "reductions",
    "plateau",
];

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Run a single check group.
    #[arg(long)]
    pub only: Option<String>,
    /// Flip the sign of C2 inside the rate comparison; exercises the
    /// harness's ability to catch a wrong closed form.
    #[arg(long, hide = true)]
    pub mutate_c2: bool,
}

pub fn run(args: VerifyArgs) -> Result<u8, Failure> {
    if let Some(only) = &args.only {
        if !GROUPS.contains(&only.as_str()) {
            return Err(Failure::Usage(format!(
                "unknown group {only:?}; available: {}",
                GROUPS.join(", ")
            )));
        }
    }
    let mut failed = false;
    for &group in GROUPS {
        if args.only.as_deref().is_some_and(|o| o != group) {
            continue;
        }
        let outcome = match group {
            "rate-oracle" => check_rate_oracle(args.mutate_c2),
            "stability" => check_stability(),
            "lyapunov" => check_lyapunov(),
            "taylor" => check_taylor(),
            "nag" => check_nag(),
            "reductions" => check_reductions(),
            "plateau" => check_plateau(),
            _ => unreachable!(),
        };
        match outcome {
            Ok(()) => println!("[PASS] {group}"),
            Err(msg) => {
                println!("[FAIL] {group}: {msg}");
                failed = true;
            }
        }
    }
    Ok(if failed { EXIT_CHECK_FAILED } else { EXIT_OK })
}

fn reference_problem() -> QuadraticProblem {
    QuadraticProblem::new(
        Mat::diag(&[0.1, 10.0]),
        vec![0.0, 0.0],
        Mat::diag(&[0.3, 0.3]),
    )
    .unwrap()
}

/// Piecewise closed-form rate recomputed from possibly mutated coefficients.
fn rate_from_coeffs(c1: f64, c2: f64) -> f64 {
    let disc = c1 * c1 - 4.0 * c2;
    if disc < 0.0 {
        c2.sqrt()
    } else if c1 >= 0.0 {
        0.5 * (disc.sqrt() + c1)
    } else {
        0.5 * (disc.sqrt() - c1)
    }
}

fn check_rate_oracle(mutate_c2: bool) -> Result<(), String> {
    let mut rng = SplitMix64::new(0x5eed);
    for i in 0..2000 {
        let alpha = 0.001 + 3.0 * rng.next_f64();
        let beta = 0.99 * rng.next_f64();
        let nu = rng.next_f64();
        let lambda = 0.01 + 100.0 * rng.next_f64();
        let c = char_coeffs_raw(alpha, beta, nu, lambda);
        let c2 = if mutate_c2 { -c.c2 } else { c.c2 };
        let closed = rate_from_coeffs(c.c1, c2);
        let oracle = spectral_radius_oracle_raw(alpha, beta, nu, lambda);
        if (closed - oracle).abs() >= 1e-12 {
            return Err(format!(
                "sample {i}: closed form {closed} vs eigenvalue oracle {oracle} \
                 at (alpha={alpha}, beta={beta}, nu={nu}, lambda={lambda})"
            ));
        }
    }
    Ok(())
}

fn check_stability() -> Result<(), String> {
    let mut rng = SplitMix64::new(0xb0a2);
    for i in 0..100 {
        let beta = 0.95 * rng.next_f64();
        let nu = rng.next_f64();
        let ell = 0.1 + 100.0 * rng.next_f64();
        let a_max = stability_max_alpha(beta, nu, ell);
        let (inside, _) = local_rate_raw(a_max * (1.0 - 1e-6), beta, nu, ell);
        let (outside, _) = local_rate_raw(a_max * (1.0 + 1e-6), beta, nu, ell);
        if inside >= 1.0 || outside < 1.0 {
            return Err(format!(
                "sample {i}: rate {inside} just inside / {outside} just outside \
                 alpha_max={a_max} (beta={beta}, nu={nu}, L={ell})"
            ));
        }
    }
    Ok(())
}

fn check_lyapunov() -> Result<(), String> {
    let mut rng = SplitMix64::new(0x17ab);
    for i in 0..20 {
        let dim = 1 + (rng.next_u64() % 8) as usize;
        let mu = 0.05 + rng.next_f64();
        let ell = mu * (1.0 + 50.0 * rng.next_f64());
        let problem = random_spd_problem(dim, Spectrum::new(mu, ell).unwrap(), 0.2, 100 + i)
            .map_err(|e| e.to_string())?;
        let beta = 0.95 * rng.next_f64();
        let nu = rng.next_f64();
        let alpha = 0.9 * stability_max_alpha(beta, nu, ell) * (0.05 + 0.95 * rng.next_f64());
        let params = MomentumParams::new(alpha, beta, nu).map_err(|e| e.to_string())?;
        let system = build_system(&params, &problem);
        let report = lyapunov_exact(&system, &problem, 1e-12).map_err(|e| e.to_string())?;
        if report.residual >= 1e-12 {
            return Err(format!("sample {i}: Lyapunov residual {}", report.residual));
        }
    }
    // 1-D SGD: the stationary chain is AR(1), so tr(A Sigma_x) has the
    // closed form alpha sigma^2 / (2 - alpha a).
    let (a, sigma2, alpha) = (1.3, 0.7, 0.4);
    let problem = QuadraticProblem::new(
        Mat::from_rows(1, 1, vec![a]).unwrap(),
        vec![0.0],
        Mat::from_rows(1, 1, vec![sigma2]).unwrap(),
    )
    .unwrap();
    let params = MomentumParams::new(alpha, 0.0, 0.0).unwrap();
    let report = lyapunov_exact(&build_system(&params, &problem), &problem, 1e-12)
        .map_err(|e| e.to_string())?;
    let expected = alpha * sigma2 / (2.0 - alpha * a);
    if (report.tr_a_sigma_x - expected).abs() >= 1e-12 {
        return Err(format!(
            "1-D SGD: tr(A Sigma_x) {} vs AR(1) closed form {expected}",
            report.tr_a_sigma_x
        ));
    }
    Ok(())
}

fn fit_slope(alphas: &[f64], errs: &[f64]) -> f64 {
    let n = alphas.len() as f64;
    let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
    for (a, e) in alphas.iter().zip(errs) {
        let (x, y) = (a.ln(), e.ln());
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    (n * sxy - sx * sy) / (n * sxx - sx * sx)
}

fn check_taylor() -> Result<(), String> {
    let problem = reference_problem();
    let alphas = [0.2, 0.1, 0.05, 0.025];
    let (beta, nu) = (0.9, 1.0);
    let mut first = Vec::new();
    let mut second = Vec::new();
    for &alpha in &alphas {
        let params = MomentumParams::new(alpha, beta, nu).unwrap();
        let report = lyapunov_exact(&build_system(&params, &problem), &problem, 1e-12)
            .map_err(|e| e.to_string())?;
        let (_, res) = predict_first_order(&params, &problem, &report);
        first.push(res);
        second.push((report.tr_a_sigma_x - report.second_order_trace).abs());
    }
    let s1 = fit_slope(&alphas, &first);
    let s2 = fit_slope(&alphas, &second);
    if !(1.7..=2.3).contains(&s1) {
        return Err(format!(
            "first-order residual slope {s1} outside [1.7, 2.3]"
        ));
    }
    if !(2.6..=3.4).contains(&s2) {
        return Err(format!("second-order error slope {s2} outside [2.6, 3.4]"));
    }
    Ok(())
}

fn check_nag() -> Result<(), String> {
    let mut rng = SplitMix64::new(0xa6);
    for case in 0..5u64 {
        let dim = 1 + (rng.next_u64() % 4) as usize;
        let (mu, beta) = (0.1, 0.3 + 0.6 * rng.next_f64());
        let ell = mu * (1.0 + 30.0 * rng.next_f64());
        let problem = random_spd_problem(dim, Spectrum::new(mu, ell).unwrap(), 0.0, 7 + case)
            .map_err(|e| e.to_string())?;
        let alpha_n = 0.5 * stability_max_alpha(beta, beta, ell);
        let alpha_u = alpha_n * (1.0 - beta);
        let params = MomentumParams::new(alpha_n, beta, beta).map_err(|e| e.to_string())?;
        let mut x0 = Vec::with_capacity(dim);
        for _ in 0..dim {
            x0.push(rng.next_gaussian());
        }
        let mut state = OptimizerState::start(x0.clone());
        let mut x_nag = x0;
        let mut d_nag = vec![0.0; dim];
        for step in 0..100 {
            let grad = problem.gradient(&state.x);
            state = qhm_step(&state, &grad, &params).map_err(|e| e.to_string())?;
            let (xn, dn) =
                nag_original_step(&x_nag, &d_nag, |p| problem.gradient(p), alpha_u, beta);
            x_nag = xn;
            d_nag = dn;
            // QHM's iterate is NAG's lookahead point y = x - alpha_u beta d.
            let shifted: Vec<f64> = x_nag
                .iter()
                .zip(&d_nag)
                .map(|(x, d)| x - alpha_u * beta * d)
                .collect();
            let gap = norm(&vec_sub(&state.x, &shifted));
            if gap >= 1e-10 {
                return Err(format!("case {case} step {step}: iterate gap {gap}"));
            }
        }
    }
    Ok(())
}

fn check_reductions() -> Result<(), String> {
    let problem = reference_problem();
    let (alpha, beta) = (0.05, 0.9);
    let mut noise_rng = SplitMix64::new(41);
    let sgd = MomentumParams::new(alpha, 0.5, 0.0).unwrap();
    let shb = MomentumParams::new(alpha, beta, 1.0).unwrap();
    let mut s_sgd = OptimizerState::start(vec![1.0, -1.0]);
    let mut s_shb = OptimizerState::start(vec![1.0, -1.0]);
    let mut x_plain = vec![1.0, -1.0];
    let mut x_hb = vec![1.0, -1.0];
    let mut d_hb = [0.0, 0.0];
    for step in 0..1000 {
        let mut g = |x: &[f64]| -> Vec<f64> {
            let mut g = problem.gradient(x);
            for gi in &mut g {
                *gi += 0.1 * noise_rng.next_gaussian();
            }
            g
        };
        // SGD leg: nu = 0 ignores the momentum buffer entirely.
        let grad = g(&s_sgd.x);
        s_sgd = qhm_step(&s_sgd, &grad, &sgd).map_err(|e| e.to_string())?;
        for (x, gi) in x_plain.iter_mut().zip(&grad) {
            *x -= alpha * gi;
        }
        if s_sgd.x != x_plain {
            return Err(format!("nu=0 differs from plain SGD at step {step}"));
        }
        // Normalized heavy-ball leg: nu = 1.
        let grad = g(&s_shb.x);
        s_shb = qhm_step(&s_shb, &grad, &shb).map_err(|e| e.to_string())?;
        for i in 0..2 {
            d_hb[i] = (1.0 - beta) * grad[i] + beta * d_hb[i];
            x_hb[i] -= alpha * d_hb[i];
        }
        if s_shb.x != x_hb {
            return Err(format!("nu=1 differs from normalized SHB at step {step}"));
        }
    }
    Ok(())
}

fn check_plateau() -> Result<(), String> {
    let beta = 0.9;
    let spectrum = Spectrum::new(1.0, 10.0).unwrap();
    let (lo, hi) =
        shb_no_tradeoff_interval(beta, &spectrum).ok_or("no-trade-off interval is empty")?;
    let target = beta.sqrt();
    for i in 0..10 {
        let alpha = lo + (hi - lo) * (i as f64 + 0.5) / 10.0;
        let params = MomentumParams::new(alpha, beta, 1.0).unwrap();
        let rate = global_rate(&params, &spectrum).rate;
        if (rate - target).abs() >= 1e-12 {
            return Err(format!(
                "alpha={alpha}: rate {rate} deviates from sqrt(beta) {target}"
            ));
        }
    }
    Ok(())
}
