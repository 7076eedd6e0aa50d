//! Stationary covariance of QHM iterates under additive gradient noise.
//!
//! The augmented state `z = [d; x - x*]` follows the linear recursion
//! `z_{k+1} = T z_k + S xi_k`, so the stationary covariance solves the
//! discrete Lyapunov equation `Sigma_z = T Sigma_z T^t + S Sigma_xi S^t`.
//! This module solves it exactly (the oracle) and evaluates the first- and
//! second-order Taylor predictions of `tr(A Sigma_x)` in the step size.

use alloc::format;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::linalg::Mat;
use crate::problem::{MomentumParams, QuadraticProblem};
use crate::rate::local_rate;
use crate::Error;

/// The linear dynamics `z_{k+1} = T z_k + S xi_k` of the augmented state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AugmentedSystem {
    /// 2n x 2n transition matrix.
    pub t_matrix: Mat,
    /// 2n x n noise injection matrix.
    pub s_matrix: Mat,
    pub params: MomentumParams,
    /// Curvature A of the underlying quadratic (symmetrized copy).
    pub curvature: Mat,
}

/// Exact stationary second moments plus the Taylor predictions evaluated at
/// the same parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StationaryReport {
    pub sigma_z: Mat,
    pub sigma_x: Mat,
    pub sigma_d: Mat,
    pub sigma_dx: Mat,
    pub sigma_xd: Mat,
    pub tr_a_sigma_x: f64,
    /// Max-abs Lyapunov residual of the returned solution.
    pub residual: f64,
    /// Max-abs norm of `A Sigma_x + Sigma_x A - alpha Sigma_xi`; O(alpha^2).
    pub first_order_matrix_residual: f64,
    /// Two-term Taylor value of `tr(A Sigma_x)`.
    pub second_order_trace: f64,
}

pub fn build_system(params: &MomentumParams, problem: &QuadraticProblem) -> AugmentedSystem {
    let n = problem.dim();
    let a = problem.curvature();
    let (alpha, beta, nu) = (params.alpha, params.beta, params.nu);
    let mut t = Mat::zeros(2 * n, 2 * n);
    let mut s = Mat::zeros(2 * n, n);
    for i in 0..n {
        t[(i, i)] = beta;
        t[(n + i, n + i)] = 1.0;
        t[(n + i, i)] = -alpha * nu * beta;
        s[(i, i)] = 1.0 - beta;
        s[(n + i, i)] = -alpha * (1.0 - nu * beta);
        for j in 0..n {
            t[(i, n + j)] += (1.0 - beta) * a[(i, j)];
            t[(n + i, n + j)] -= alpha * (1.0 - nu * beta) * a[(i, j)];
        }
    }
    AugmentedSystem {
        t_matrix: t,
        s_matrix: s,
        params: *params,
        curvature: a.clone(),
    }
}

/// Spectral radius of T, computed mode-by-mode from the eigenvalues of A.
pub fn system_spectral_radius(system: &AugmentedSystem, problem: &QuadraticProblem) -> f64 {
    problem
        .eigenvalues()
        .iter()
        .map(|&lam| local_rate(&system.params, lam).0)
        .fold(0.0, f64::max)
}

/// Solves `Sigma_z = T Sigma_z T^t + Q` with `Q = S Sigma_xi S^t`: a dense
/// vectorized linear solve for 2n <= 40, fixed-point iteration beyond.
pub fn lyapunov_exact(
    system: &AugmentedSystem,
    problem: &QuadraticProblem,
    tol: f64,
) -> Result<StationaryReport, Error> {
    let rho = system_spectral_radius(system, problem);
    if rho >= 1.0 {
        return Err(Error::UnstableSystem {
            spectral_radius: rho,
        });
    }
    let n = problem.dim();
    let m = 2 * n;
    let t = &system.t_matrix;
    let s = &system.s_matrix;
    let q = s.matmul(problem.noise_cov()).matmul(&s.transpose());
    let sigma_z = if m <= 40 {
        // vec(Sigma) = (I - T (x) T)^-1 vec(Q), row-major vec convention.
        let kron = t.kron(t);
        let mut lhs = Mat::identity(m * m);
        lhs = lhs.sub(&kron);
        let sol = lhs.solve(&q.vec_rows())?;
        Mat::from_rows(m, m, sol)?
    } else {
        let mut sigma = q.clone();
        let mut converged = false;
        for _ in 0..1_000_000 {
            let next = t.matmul(&sigma).matmul(&t.transpose()).add(&q);
            let diff = next.sub(&sigma).max_abs();
            sigma = next;
            if diff < 0.01 * tol {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::NoOptimum(format!(
                "Lyapunov fixed-point iteration did not converge (rho = {rho})"
            )));
        }
        sigma
    };
    let sigma_z = sigma_z.symmetrize();
    let residual = sigma_z
        .sub(&t.matmul(&sigma_z).matmul(&t.transpose()))
        .sub(&q)
        .max_abs();
    let sigma_d = sigma_z.block(0, 0, n, n);
    let sigma_dx = sigma_z.block(0, n, n, n);
    let sigma_xd = sigma_z.block(n, 0, n, n);
    let sigma_x = sigma_z.block(n, n, n, n);
    let tr_a_sigma_x = system.curvature.matmul(&sigma_x).trace();
    let first_order_matrix_residual =
        first_order_residual_matrix(&system.params, problem, &sigma_x).max_abs();
    let second_order_trace = predict_tr_second_order(&system.params, problem);
    Ok(StationaryReport {
        sigma_z,
        sigma_x,
        sigma_d,
        sigma_dx,
        sigma_xd,
        tr_a_sigma_x,
        residual,
        first_order_matrix_residual,
        second_order_trace,
    })
}

/// `A Sigma_x + Sigma_x A - alpha Sigma_xi`; shrinks as O(alpha^2).
pub fn first_order_residual_matrix(
    params: &MomentumParams,
    problem: &QuadraticProblem,
    sigma_x: &Mat,
) -> Mat {
    let a = problem.curvature();
    a.matmul(sigma_x)
        .add(&sigma_x.matmul(a))
        .sub(&problem.noise_cov().scale(params.alpha))
}

/// First-order residual of an exact solution.
pub fn predict_first_order(
    params: &MomentumParams,
    problem: &QuadraticProblem,
    report: &StationaryReport,
) -> (Mat, f64) {
    let r = first_order_residual_matrix(params, problem, &report.sigma_x);
    let norm = r.max_abs();
    (r, norm)
}

/// Coefficient of the alpha^2 term:
/// `1 + (2 nu beta / (1 - beta)) ((2 nu beta / (1 + beta)) - 1)`.
pub fn second_order_coefficient(beta: f64, nu: f64) -> f64 {
    let nb = 2.0 * nu * beta;
    1.0 + (nb / (1.0 - beta)) * (nb / (1.0 + beta) - 1.0)
}

/// Two-term Taylor expansion of the stationary excess loss:
/// `tr(A Sigma_x) ~ (alpha/2) tr(Sigma_xi) + (alpha^2/4) c(beta, nu) tr(A Sigma_xi)`.
pub fn predict_tr_second_order(params: &MomentumParams, problem: &QuadraticProblem) -> f64 {
    predict_tr_second_order_raw(
        params.alpha,
        params.beta,
        params.nu,
        problem.noise_cov().trace(),
        problem.curvature().matmul(problem.noise_cov()).trace(),
    )
}

pub fn predict_tr_second_order_raw(
    alpha: f64,
    beta: f64,
    nu: f64,
    tr_noise: f64,
    tr_a_noise: f64,
) -> f64 {
    0.5 * alpha * tr_noise + 0.25 * alpha * alpha * second_order_coefficient(beta, nu) * tr_a_noise
}

/// The nu minimizing the alpha^2 coefficient at fixed beta:
/// `(1 + beta) / (4 beta)` once that falls inside [0, 1], otherwise 1.
pub fn optimal_nu_prediction(beta: f64) -> f64 {
    if (1.0 / 3.0..1.0).contains(&beta) {
        (1.0 + beta) / (4.0 * beta)
    } else {
        1.0
    }
}

/// One cell of the approximation-error map.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorMapCell {
    pub alpha: f64,
    pub beta: f64,
    pub nu: f64,
    pub tr_exact: f64,
    pub tr_pred1: f64,
    pub tr_pred2: f64,
    pub rel_err: f64,
    pub stable: bool,
    pub exceeds: bool,
    pub degenerate: bool,
}

/// Relative error of the second-order prediction over a uniform
/// (alpha, beta, nu) grid: beta on [0, 1) with `beta_grid` points, nu on
/// [0, 1] with `nu_grid` points. Unstable cells are flagged and skipped;
/// cells with a vanishing exact trace are flagged degenerate. Output is
/// row-major: alpha outermost, then beta, then nu.
pub fn approx_error_map(
    alpha_list: &[f64],
    beta_grid: usize,
    nu_grid: usize,
    problem: &QuadraticProblem,
    threshold: f64,
) -> Result<Vec<ErrorMapCell>, Error> {
    if beta_grid == 0 || nu_grid == 0 {
        return Err(Error::InvalidArgument("empty error-map grid".into()));
    }
    let mut cells = Vec::with_capacity(alpha_list.len() * beta_grid * nu_grid);
    for &alpha in alpha_list {
        for bi in 0..beta_grid {
            let beta = bi as f64 / beta_grid as f64;
            for ni in 0..nu_grid {
                let nu = if nu_grid > 1 {
                    ni as f64 / (nu_grid - 1) as f64
                } else {
                    0.0
                };
                cells.push(error_map_cell(alpha, beta, nu, problem, threshold)?);
            }
        }
    }
    Ok(cells)
}

pub fn error_map_cell(
    alpha: f64,
    beta: f64,
    nu: f64,
    problem: &QuadraticProblem,
    threshold: f64,
) -> Result<ErrorMapCell, Error> {
    let params = MomentumParams::new(alpha, beta, nu)?;
    let tr_pred1 = 0.5 * alpha * problem.noise_cov().trace();
    let system = build_system(&params, problem);
    match lyapunov_exact(&system, problem, 1e-12) {
        Ok(report) => {
            let degenerate = report.tr_a_sigma_x.abs() < 1e-15;
            let rel_err = if degenerate {
                f64::NAN
            } else {
                (report.tr_a_sigma_x - report.second_order_trace).abs() / report.tr_a_sigma_x
            };
            Ok(ErrorMapCell {
                alpha,
                beta,
                nu,
                tr_exact: report.tr_a_sigma_x,
                tr_pred1,
                tr_pred2: report.second_order_trace,
                rel_err,
                stable: true,
                exceeds: !degenerate && rel_err > threshold,
                degenerate,
            })
        }
        Err(Error::UnstableSystem { .. }) => Ok(ErrorMapCell {
            alpha,
            beta,
            nu,
            tr_exact: f64::NAN,
            tr_pred1,
            tr_pred2: f64::NAN,
            rel_err: f64::NAN,
            stable: false,
            exceeds: false,
            degenerate: false,
        }),
        Err(e) => Err(e),
    }
}
