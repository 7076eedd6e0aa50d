//! Cross-form equivalences: the original (unnormalized, lookahead) NAG
//! iteration against QHM with nu = beta, and the named special cases.

use momentum_core::dynamics::{nag_original_step, qhm_step};
use momentum_core::problem::{random_spd_problem, MomentumParams, OptimizerState, Spectrum};
use momentum_core::rate::stability_max_alpha;
use momentum_core::SplitMix64;

/// Original NAG with unnormalized step alpha_u run on the lookahead points
/// y_k = x_k - alpha_u beta d_{k-1} coincides with normalized QHM at
/// (alpha_u / (1 - beta), beta, nu = beta).
#[test]
#[allow(clippy::needless_range_loop)]
fn nag_matches_qhm_nu_beta() {
    let mut rng = SplitMix64::new(20_240_816);
    for case in 0..20 {
        let dim = 1 + (case % 5);
        let ell = 1.0 + 9.0 * rng.next_f64();
        let spectrum = Spectrum { mu: 0.1, ell };
        let problem = random_spd_problem(dim, spectrum, 0.0, 1000 + case as u64).unwrap();
        let beta = 0.05 + 0.9 * rng.next_f64();
        let alpha_n = 0.5 * stability_max_alpha(beta, beta, ell);
        let alpha_u = alpha_n * (1.0 - beta);
        let params = MomentumParams::new(alpha_n, beta, beta).unwrap();

        let x0: Vec<f64> = (0..dim).map(|_| rng.next_gaussian()).collect();
        let mut qhm = OptimizerState::start(x0.clone());
        let mut nag_x = x0;
        let mut nag_d = vec![0.0; dim];

        for step in 0..100 {
            // Lookahead point of the *current* NAG state.
            let y: Vec<f64> = nag_x
                .iter()
                .zip(&nag_d)
                .map(|(x, d)| x - alpha_u * beta * d)
                .collect();
            for i in 0..dim {
                assert!(
                    (qhm.x[i] - y[i]).abs() < 1e-10,
                    "case {case} step {step} coord {i}: qhm {} vs nag lookahead {}",
                    qhm.x[i],
                    y[i]
                );
            }
            let grad = problem.gradient(&qhm.x);
            qhm = qhm_step(&qhm, &grad, &params).unwrap();
            let (x_new, d_new) =
                nag_original_step(&nag_x, &nag_d, |p| problem.gradient(p), alpha_u, beta);
            nag_x = x_new;
            nag_d = d_new;
        }
    }
}

/// nu = 0 is plain SGD bit-for-bit; nu = 1 is normalized SHB bit-for-bit.
#[test]
fn named_reductions_are_bit_exact() {
    let problem = random_spd_problem(3, Spectrum { mu: 0.5, ell: 5.0 }, 0.4, 7).unwrap();
    let x0 = vec![1.0, -2.0, 0.5];

    // nu = 0 vs hand-rolled SGD.
    let params = MomentumParams::new(0.05, 0.9, 0.0).unwrap();
    let mut rng = SplitMix64::new(1);
    let mut state = OptimizerState::start(x0.clone());
    let mut sgd_x = x0.clone();
    for _ in 0..1000 {
        let noise = momentum_core::problem::gaussian_noise_draw(&problem, &mut rng);
        let grad: Vec<f64> = problem
            .gradient(&state.x)
            .iter()
            .zip(&noise)
            .map(|(g, xi)| g + xi)
            .collect();
        state = qhm_step(&state, &grad, &params).unwrap();
        for i in 0..3 {
            sgd_x[i] -= 0.05 * grad[i];
        }
        assert_eq!(state.x, sgd_x);
    }

    // nu = 1 vs hand-rolled normalized heavy ball.
    let params = MomentumParams::new(0.05, 0.9, 1.0).unwrap();
    let mut rng = SplitMix64::new(2);
    let mut state = OptimizerState::start(x0.clone());
    let mut shb_x = x0;
    let mut shb_d = vec![0.0; 3];
    for _ in 0..1000 {
        let noise = momentum_core::problem::gaussian_noise_draw(&problem, &mut rng);
        let grad: Vec<f64> = problem
            .gradient(&state.x)
            .iter()
            .zip(&noise)
            .map(|(g, xi)| g + xi)
            .collect();
        state = qhm_step(&state, &grad, &params).unwrap();
        for i in 0..3 {
            shb_d[i] = (1.0 - 0.9) * grad[i] + 0.9 * shb_d[i];
            shb_x[i] -= 0.05 * shb_d[i];
        }
        assert_eq!(state.x, shb_x);
        assert_eq!(state.d, shb_d);
    }
}
