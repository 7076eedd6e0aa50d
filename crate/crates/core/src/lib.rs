//! Analysis and simulation toolkit for the quasi-hyperbolic momentum (QHM)
//! family of stochastic gradient methods on quadratic models.
//!
//! QHM is the two-parameter momentum update
//!
//! ```text
//! d_k = (1 - beta) g_k + beta d_{k-1}
//! x_{k+1} = x_k - alpha [ (1 - nu) g_k + nu d_k ]
//! ```
//!
//! with `nu` interpolating between SGD (`nu = 0`) and normalized heavy ball
//! (`nu = 1`). For a quadratic objective with curvature matrix `A` the
//! iterates follow a linear dynamical system, which makes the local
//! convergence rate, the stability region and the stationary covariance of
//! the noisy iterates all computable in closed form. This crate implements
//! those closed forms together with independent brute-force oracles
//! (companion-matrix eigenvalues, exact discrete Lyapunov solves, seeded
//! Monte Carlo) so every formula can be cross-checked.
//!
//! The crate is `no_std` + `alloc`; all IO, file formats and the CLI live in
//! the companion `momentum-lab` crate.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod dynamics;
mod error;
pub mod linalg;
mod math;
pub mod problem;
pub mod rate;
pub mod rng;
pub mod sim;
pub mod stationary;

pub use error::Error;
pub use linalg::Mat;
pub use problem::{MomentumParams, OptimizerState, QuadraticProblem, Spectrum};
pub use rng::SplitMix64;
