//! Problem input: JSON problem files, generator flags, and the built-in
//! defaults used when neither is given.

use std::fs;
use std::path::PathBuf;

use clap::Args;
use momentum_core::linalg::Mat;
use momentum_core::problem::{random_spd_problem, QuadraticProblem, Spectrum};
use serde::Deserialize;
use serde_json::{json, Value};

use crate::Failure;

/// On-disk problem description. `curvature` and `noise_cov` are row-major
/// `dim x dim` matrices.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSpec {
    pub dim: usize,
    pub curvature: Vec<f64>,
    pub optimum: Vec<f64>,
    pub noise_cov: Vec<f64>,
    /// Provenance-only: the seed that generated the file, if any.
    #[serde(default)]
    #[allow(dead_code)]
    pub seed: Option<u64>,
}

impl ProblemSpec {
    pub fn build(&self) -> Result<QuadraticProblem, Failure> {
        let n = self.dim;
        let a = Mat::from_rows(n, n, self.curvature.clone())
            .map_err(|e| Failure::Usage(format!("bad curvature matrix: {e}")))?;
        let s = Mat::from_rows(n, n, self.noise_cov.clone())
            .map_err(|e| Failure::Usage(format!("bad noise covariance: {e}")))?;
        QuadraticProblem::new(a, self.optimum.clone(), s)
            .map_err(|e| Failure::Usage(format!("invalid problem: {e}")))
    }
}

/// Which problem a command falls back to without `--problem` or generator
/// flags.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DefaultProblem {
    /// 1-D, unit curvature, no noise.
    Unit1D,
    /// 2-D, eigenvalues {0.1, 10}, noise covariance 0.3 I.
    Synthetic2D,
}

/// Problem selection flags shared by the analysis and simulation commands.
#[derive(Debug, Clone, Args, Deserialize, Default)]
#[serde(rename_all = "kebab-case", deny_unknown_fields, default)]
pub struct ProblemArgs {
    /// JSON problem file (dim, curvature, optimum, noise_cov, seed).
    #[arg(long)]
    pub problem: Option<PathBuf>,
    /// Generate a random SPD problem of this dimension instead.
    #[arg(long)]
    pub dim: Option<usize>,
    /// Smallest curvature eigenvalue of the generated problem.
    #[arg(long)]
    pub mu: Option<f64>,
    /// Largest curvature eigenvalue of the generated problem.
    #[arg(long = "L")]
    #[serde(rename = "L")]
    pub ell: Option<f64>,
    /// Isotropic gradient-noise variance of the generated problem.
    #[arg(long)]
    pub noise_scale: Option<f64>,
    /// Seed for the generated problem's rotation.
    #[arg(long)]
    pub problem_seed: Option<u64>,
}

impl ProblemArgs {
    pub fn merge(&mut self, file: ProblemArgs) {
        self.problem = self.problem.take().or(file.problem);
        self.dim = self.dim.or(file.dim);
        self.mu = self.mu.or(file.mu);
        self.ell = self.ell.or(file.ell);
        self.noise_scale = self.noise_scale.or(file.noise_scale);
        self.problem_seed = self.problem_seed.or(file.problem_seed);
    }

    pub fn resolve(&self, default: DefaultProblem) -> Result<QuadraticProblem, Failure> {
        if let Some(path) = &self.problem {
            let raw = fs::read_to_string(path)
                .map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))?;
            let spec: ProblemSpec = serde_json::from_str(&raw)
                .map_err(|e| Failure::Usage(format!("bad problem file {}: {e}", path.display())))?;
            return spec.build();
        }
        if self.dim.is_some() || self.mu.is_some() || self.ell.is_some() {
            let dim = self.dim.unwrap_or(2);
            let mu = self.mu.unwrap_or(0.1);
            let ell = self.ell.unwrap_or(10.0);
            let spectrum =
                Spectrum::new(mu, ell).map_err(|e| Failure::Usage(format!("bad spectrum: {e}")))?;
            let noise = self.noise_scale.unwrap_or(0.3);
            let seed = self.problem_seed.unwrap_or(0);
            return random_spd_problem(dim, spectrum, noise, seed)
                .map_err(|e| Failure::Usage(format!("cannot generate problem: {e}")));
        }
        Ok(match default {
            DefaultProblem::Unit1D => QuadraticProblem::new(
                Mat::diag(&[1.0]),
                vec![0.0],
                Mat::diag(&[self.noise_scale.unwrap_or(0.0)]),
            )
            .unwrap(),
            DefaultProblem::Synthetic2D => QuadraticProblem::new(
                Mat::diag(&[0.1, 10.0]),
                vec![0.0, 0.0],
                Mat::diag(&[
                    self.noise_scale.unwrap_or(0.3),
                    self.noise_scale.unwrap_or(0.3),
                ]),
            )
            .unwrap(),
        })
    }

    pub fn describe(&self) -> Value {
        json!({
            "problem": self.problem.as_ref().map(|p| p.display().to_string()),
            "dim": self.dim,
            "mu": self.mu,
            "L": self.ell,
            "noise-scale": self.noise_scale,
            "problem-seed": self.problem_seed,
        })
    }
}
