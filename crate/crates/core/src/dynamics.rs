//! QHM update rules, named special cases, parameter schedules and the
//! asymptotic-regime condition checkers.

use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::linalg;
use crate::math;
use crate::problem::{MomentumParams, OptimizerState};
use crate::Error;

/// One normalized QHM step:
/// `d_new = (1-beta) g + beta d`, `x_new = x - alpha [(1-nu) g + nu d_new]`.
// Indexed loop walks three slices in lockstep; zip chains read worse here.
#[allow(clippy::needless_range_loop)]
pub fn qhm_step(
    state: &OptimizerState,
    gradient: &[f64],
    params: &MomentumParams,
) -> Result<OptimizerState, Error> {
    let n = state.x.len();
    if gradient.len() != n || state.d.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: gradient.len(),
        });
    }
    let MomentumParams { alpha, beta, nu } = *params;
    let mut d_new = Vec::with_capacity(n);
    let mut x_new = Vec::with_capacity(n);
    for i in 0..n {
        let d = (1.0 - beta) * gradient[i] + beta * state.d[i];
        d_new.push(d);
        x_new.push(state.x[i] - alpha * ((1.0 - nu) * gradient[i] + nu * d));
    }
    Ok(OptimizerState {
        x: x_new,
        d: d_new,
        k: state.k + 1,
    })
}

/// Binary momentum switch: drop the buffer when its norm exceeds rho.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SwitchConfig {
    pub enabled: bool,
    pub rho: f64,
}

impl SwitchConfig {
    // Negated comparison is deliberate: it rejects NaN too.
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    pub fn new(rho: f64) -> Result<Self, Error> {
        if !(rho > 0.0) {
            return Err(Error::InvalidArgument(
                "switch threshold rho must be positive".into(),
            ));
        }
        Ok(SwitchConfig { enabled: true, rho })
    }
}

/// The unnormalized switched update used in the beta -> 0 convergence
/// analysis: `d_new = g + i_k beta d` with `i_k = 1` iff `||d|| <= rho`,
/// then `x_new = x - alpha [(1-nu) g + nu d_new]`.
#[allow(clippy::needless_range_loop)]
pub fn qhm_step_switched(
    state: &OptimizerState,
    gradient: &[f64],
    params: &MomentumParams,
    switch: &SwitchConfig,
) -> Result<OptimizerState, Error> {
    let n = state.x.len();
    if gradient.len() != n || state.d.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: gradient.len(),
        });
    }
    debug_assert!(switch.enabled);
    let MomentumParams { alpha, beta, nu } = *params;
    let i_k = if linalg::norm(&state.d) <= switch.rho {
        1.0
    } else {
        0.0
    };
    let mut d_new = Vec::with_capacity(n);
    let mut x_new = Vec::with_capacity(n);
    for i in 0..n {
        let d = gradient[i] + i_k * beta * state.d[i];
        d_new.push(d);
        let b = (1.0 - nu) * gradient[i] + nu * d;
        x_new.push(state.x[i] - alpha * b);
    }
    Ok(OptimizerState {
        x: x_new,
        d: d_new,
        k: state.k + 1,
    })
}

/// Original NAG in the unnormalized lookahead form:
/// `d_new = beta d + grad(x - alpha beta d)`, `x_new = x - alpha d_new`.
///
/// The gradient oracle is evaluated at the shifted point, which is why this
/// stepper takes a closure rather than a precomputed gradient.
#[allow(clippy::needless_range_loop)]
pub fn nag_original_step<G>(
    x: &[f64],
    d: &[f64],
    gradient_oracle: G,
    alpha: f64,
    beta: f64,
) -> (Vec<f64>, Vec<f64>)
where
    G: FnOnce(&[f64]) -> Vec<f64>,
{
    let n = x.len();
    let mut lookahead = Vec::with_capacity(n);
    for i in 0..n {
        lookahead.push(x[i] - alpha * beta * d[i]);
    }
    let g = gradient_oracle(&lookahead);
    debug_assert_eq!(g.len(), n);
    let mut d_new = Vec::with_capacity(n);
    let mut x_new = Vec::with_capacity(n);
    for i in 0..n {
        let dn = beta * d[i] + g[i];
        d_new.push(dn);
        x_new.push(x[i] - alpha * dn);
    }
    (x_new, d_new)
}

/// Policy for `nu_k` in the beta -> 1 power-law family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NuPolicy {
    /// nu_k = beta_k = sqrt(1 - (k+1)^{-c}).
    EqualToBeta,
    /// nu_k = 1, beta_k = 1 - (k+1)^{-c}.
    One,
}

/// Parameter schedule over the iteration index k.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case")]
pub enum ParamSchedule {
    /// Fixed (alpha, beta, nu).
    Constant(MomentumParams),
    /// alpha_k = alpha0 (k+1)^{-omega}, beta_k = beta0 decay^k, fixed nu.
    BetaToZero {
        omega: f64,
        beta0: f64,
        beta_decay: f64,
        #[serde(default = "default_one")]
        alpha0: f64,
        #[serde(default = "default_one")]
        nu: f64,
    },
    /// alpha_k = (k+1)^{-omega}, 1 - nu_k beta_k = (k+1)^{-c}.
    BetaToOne {
        omega: f64,
        c: f64,
        nu_policy: NuPolicy,
    },
    /// Constant stages run back to back; each entry is (params, step count).
    ConstantAndDrop { stages: Vec<(MomentumParams, u64)> },
}

fn default_one() -> f64 {
    1.0
}

/// Parameters at step k (k >= 0; powers use k+1 so k = 0 is well defined).
pub fn schedule_at(schedule: &ParamSchedule, k: u64) -> MomentumParams {
    match schedule {
        ParamSchedule::Constant(p) => *p,
        ParamSchedule::BetaToZero {
            omega,
            beta0,
            beta_decay,
            alpha0,
            nu,
        } => {
            let kk = (k + 1) as f64;
            MomentumParams {
                alpha: alpha0 * math::powf(kk, -omega),
                beta: beta0 * math::powf(*beta_decay, k as f64),
                nu: *nu,
            }
        }
        ParamSchedule::BetaToOne {
            omega,
            c,
            nu_policy,
        } => {
            let kk = (k + 1) as f64;
            let alpha = math::powf(kk, -omega);
            // nu_k beta_k = 1 - (k+1)^{-c}
            let prod = 1.0 - math::powf(kk, -c);
            let (beta, nu) = match nu_policy {
                NuPolicy::EqualToBeta => {
                    let b = math::sqrt(prod.max(0.0));
                    (b, b)
                }
                NuPolicy::One => (prod.max(0.0), 1.0),
            };
            MomentumParams { alpha, beta, nu }
        }
        ParamSchedule::ConstantAndDrop { stages } => {
            let mut remaining = k;
            for (params, steps) in stages {
                if remaining < *steps {
                    return *params;
                }
                remaining -= steps;
            }
            // Past the final stage the last parameters stick.
            stages
                .last()
                .map(|(p, _)| *p)
                .expect("constant-and-drop schedule has no stages")
        }
    }
}

/// Which asymptotic-convergence theorem's conditions to check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// beta_k -> 0 regime: sum alpha = inf, sum alpha^2 < inf,
    /// beta_k -> 0, sup beta_k < 1.
    Theorem1,
    /// nu_k beta_k -> 1 regime: sum alpha = inf,
    /// sum (1 - nu beta)^2 < inf, sum alpha^2/(1 - nu beta) < inf,
    /// beta_k -> 1.
    Theorem2,
}

/// Outcome of the symbolic condition check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub satisfied: bool,
    pub violated: Vec<String>,
}

/// Checks the power-law schedule families against the stated regime
/// exactly (p-series inequalities on the exponents, no numeric truncation).
// Negated comparisons are deliberate: NaN exponents violate every condition.
#[allow(clippy::neg_cmp_op_on_partial_ord)]
pub fn check_asymptotic_conditions(schedule: &ParamSchedule, regime: Regime) -> ConditionReport {
    let mut violated: Vec<String> = Vec::new();
    match (schedule, regime) {
        (ParamSchedule::Constant(_), _) => {
            violated.push("constant tail".into());
        }
        (ParamSchedule::ConstantAndDrop { .. }, _) => {
            violated.push("constant tail".into());
        }
        (
            ParamSchedule::BetaToZero {
                omega,
                beta0,
                beta_decay,
                ..
            },
            Regime::Theorem1,
        ) => {
            // alpha_k = alpha0 k^{-omega}: divergent sum iff omega <= 1,
            // square-summable iff omega > 1/2.
            if !(*omega <= 1.0) {
                violated.push("sum alpha_k = inf".into());
            }
            if !(*omega > 0.5) {
                violated.push("sum alpha_k^2 < inf".into());
            }
            if !(*beta_decay < 1.0) && *beta0 > 0.0 {
                violated.push("beta_k -> 0".into());
            }
            if !(*beta0 < 1.0) {
                violated.push("sup beta_k < 1".into());
            }
        }
        (ParamSchedule::BetaToZero { .. }, Regime::Theorem2) => {
            violated.push("beta_k -> 1".into());
        }
        (ParamSchedule::BetaToOne { omega, c, .. }, Regime::Theorem2) => {
            if !(*omega <= 1.0) {
                violated.push("sum alpha_k = inf".into());
            }
            // sum (1 - nu beta)^2 = sum k^{-2c}
            if !(*c > 0.5) {
                violated.push("sum (1 - nu_k beta_k)^2 < inf".into());
            }
            // sum alpha^2 / (1 - nu beta) = sum k^{-(2 omega - c)}
            if !(2.0 * omega - c > 1.0) {
                violated.push("sum alpha_k^2 / (1 - nu_k beta_k) < inf".into());
            }
            if !(*c > 0.0) {
                violated.push("beta_k -> 1".into());
            }
        }
        (ParamSchedule::BetaToOne { .. }, Regime::Theorem1) => {
            violated.push("beta_k -> 0".into());
        }
    }
    ConditionReport {
        satisfied: violated.is_empty(),
        violated,
    }
}
