//! Shared domain types: momentum parameters, curvature spectra, quadratic
//! test problems and optimizer state.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::linalg::{self, Mat};
use crate::math;
use crate::rng::SplitMix64;
use crate::Error;

/// The QHM parameter triple (alpha, beta, nu).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentumParams {
    pub alpha: f64,
    pub beta: f64,
    pub nu: f64,
}

impl MomentumParams {
    /// Requires alpha > 0, 0 <= beta < 1, 0 <= nu <= 1.
    // Negated comparisons are deliberate: they reject NaN inputs too.
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    pub fn new(alpha: f64, beta: f64, nu: f64) -> Result<Self, Error> {
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "alpha must be positive, got {alpha}"
            )));
        }
        if !(0.0..1.0).contains(&beta) {
            return Err(Error::InvalidArgument(format!(
                "beta must be in [0, 1), got {beta}"
            )));
        }
        if !(0.0..=1.0).contains(&nu) {
            return Err(Error::InvalidArgument(format!(
                "nu must be in [0, 1], got {nu}"
            )));
        }
        Ok(MomentumParams { alpha, beta, nu })
    }
}

/// Curvature spectrum endpoints: mu = smallest eigenvalue, ell = largest (L).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    pub mu: f64,
    pub ell: f64,
}

impl Spectrum {
    // Negated comparisons are deliberate: they reject NaN inputs too.
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    pub fn new(mu: f64, ell: f64) -> Result<Self, Error> {
        if !(mu > 0.0) || !(ell >= mu) || !ell.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "need 0 < mu <= ell, got mu={mu}, ell={ell}"
            )));
        }
        Ok(Spectrum { mu, ell })
    }

    /// Condition number L / mu.
    pub fn kappa(&self) -> f64 {
        self.ell / self.mu
    }
}

/// Quadratic problem F(x) = (1/2)(x - x*)^T A (x - x*) with additive
/// gradient noise of covariance `noise_cov`.
#[derive(Debug, Clone)]
pub struct QuadraticProblem {
    dim: usize,
    curvature: Mat,
    optimum: Vec<f64>,
    noise_cov: Mat,
    noise_chol: Mat,
    eigenvalues: Vec<f64>,
}

impl QuadraticProblem {
    /// Validates and stores a problem. The curvature is symmetrized as
    /// (A + A^T)/2 before validation; it must then be symmetric to 1e-12
    /// relative tolerance with strictly positive eigenvalues. The noise
    /// covariance must be symmetric PSD (Cholesky-factorizable after
    /// a diagonal jitter of at most 1e-14).
    pub fn new(curvature: Mat, optimum: Vec<f64>, noise_cov: Mat) -> Result<Self, Error> {
        let dim = curvature.rows();
        if dim == 0 {
            return Err(Error::InvalidArgument("dim must be >= 1".into()));
        }
        if curvature.cols() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: curvature.cols(),
            });
        }
        if optimum.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: optimum.len(),
            });
        }
        if noise_cov.rows() != dim || noise_cov.cols() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: noise_cov.rows(),
            });
        }
        if curvature.asymmetry() > 1e-12 {
            return Err(Error::InvalidArgument(format!(
                "curvature asymmetry {} exceeds 1e-12",
                curvature.asymmetry()
            )));
        }
        let curvature = curvature.symmetrize();
        let eigenvalues = curvature.sym_eigenvalues();
        if eigenvalues[0] <= 0.0 {
            return Err(Error::InvalidArgument(format!(
                "curvature must be positive definite, min eigenvalue {}",
                eigenvalues[0]
            )));
        }
        let noise_cov = noise_cov.symmetrize();
        let noise_chol = noise_cov.cholesky_psd(1e-14)?;
        Ok(QuadraticProblem {
            dim,
            curvature,
            optimum,
            noise_cov,
            noise_chol,
            eigenvalues,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn curvature(&self) -> &Mat {
        &self.curvature
    }

    pub fn optimum(&self) -> &[f64] {
        &self.optimum
    }

    pub fn noise_cov(&self) -> &Mat {
        &self.noise_cov
    }

    /// Eigenvalues of the curvature matrix, ascending.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn spectrum(&self) -> Spectrum {
        Spectrum {
            mu: self.eigenvalues[0],
            ell: self.eigenvalues[self.dim - 1],
        }
    }

    /// F(x) = (1/2)(x - x*)^T A (x - x*).
    pub fn loss(&self, x: &[f64]) -> f64 {
        let d = linalg::sub(x, &self.optimum);
        0.5 * linalg::dot(&d, &self.curvature.matvec(&d))
    }

    /// Exact gradient A (x - x*).
    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let d = linalg::sub(x, &self.optimum);
        self.curvature.matvec(&d)
    }
}

/// QHM iterate state: point x, momentum buffer d (d^{-1} = 0 convention)
/// and the step counter.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerState {
    pub x: Vec<f64>,
    pub d: Vec<f64>,
    pub k: u64,
}

impl OptimizerState {
    /// Initial state at `x0` with zero momentum buffer.
    pub fn start(x0: Vec<f64>) -> Self {
        let d = vec![0.0; x0.len()];
        OptimizerState { x: x0, d, k: 0 }
    }
}

/// Random SPD test problem: A = Q diag(lambda) Q^T with eigenvalues
/// log-uniformly spaced on [mu, L] (both endpoints included when dim >= 2),
/// Q the orthogonalization of a seeded Gaussian matrix, x* = 0 and
/// noise covariance `noise_scale * I`. Deterministic given the seed.
pub fn random_spd_problem(
    dim: usize,
    spectrum: Spectrum,
    noise_scale: f64,
    seed: u64,
) -> Result<QuadraticProblem, Error> {
    if dim == 0 {
        return Err(Error::InvalidArgument("dim must be >= 1".into()));
    }
    if noise_scale < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "noise_scale must be nonnegative, got {noise_scale}"
        )));
    }
    let mut eigs = vec![0.0; dim];
    if dim == 1 {
        eigs[0] = spectrum.mu;
    } else {
        let log_mu = math::ln(spectrum.mu);
        let log_ell = math::ln(spectrum.ell);
        for (i, e) in eigs.iter_mut().enumerate() {
            let t = i as f64 / (dim - 1) as f64;
            *e = math::exp(log_mu + t * (log_ell - log_mu));
        }
        // Pin the endpoints exactly.
        eigs[0] = spectrum.mu;
        eigs[dim - 1] = spectrum.ell;
    }
    let q = random_orthogonal(dim, seed);
    let a = q
        .matmul(&Mat::diag(&eigs))
        .matmul(&q.transpose())
        .symmetrize();
    let noise = Mat::identity(dim).scale(noise_scale);
    QuadraticProblem::new(a, vec![0.0; dim], noise)
}

/// Random orthogonal matrix: Gram-Schmidt orthogonalization of a seeded
/// Gaussian matrix.
fn random_orthogonal(dim: usize, seed: u64) -> Mat {
    let mut rng = SplitMix64::new(seed);
    let mut cols: Vec<Vec<f64>> = (0..dim)
        .map(|_| (0..dim).map(|_| rng.next_gaussian()).collect())
        .collect();
    for j in 0..dim {
        for i in 0..j {
            let proj = linalg::dot(&cols[j], &cols[i]);
            let prev = cols[i].clone();
            linalg::axpy(&mut cols[j], -proj, &prev);
        }
        let nrm = linalg::norm(&cols[j]);
        // A Gaussian matrix is full rank almost surely; re-randomize the
        // astronomically unlikely degenerate column.
        if nrm < 1e-12 {
            for v in cols[j].iter_mut() {
                *v = rng.next_gaussian();
            }
            let nrm2 = linalg::norm(&cols[j]);
            for v in cols[j].iter_mut() {
                *v /= nrm2;
            }
            continue;
        }
        for v in cols[j].iter_mut() {
            *v /= nrm;
        }
    }
    let mut q = Mat::zeros(dim, dim);
    for (j, col) in cols.iter().enumerate() {
        for i in 0..dim {
            q[(i, j)] = col[i];
        }
    }
    q
}

/// One noise draw xi ~ N(0, noise_cov), computed as L z with L the stored
/// Cholesky factor and z standard normal.
pub fn gaussian_noise_draw(problem: &QuadraticProblem, rng: &mut SplitMix64) -> Vec<f64> {
    let n = problem.dim;
    if problem.noise_chol.max_abs() == 0.0 {
        // Degenerate covariance: keep the RNG stream untouched.
        return vec![0.0; n];
    }
    let z: Vec<f64> = (0..n).map(|_| rng.next_gaussian()).collect();
    problem.noise_chol.matvec(&z)
}
