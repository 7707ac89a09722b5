//! Average-cost dynamic programming oracle for the penalty process.
//!
//! The chain is truncated at a ceiling `S_max`: growth from the ceiling
//! stays at the ceiling. Every state keeps a positive self-return structure
//! (state 0 self-loops with probability p_R, the ceiling with its growth
//! probability), so the truncated model is unichain and aperiodic under any
//! policy and relative value iteration applies as-is.
//!
//! Per-slot cost is the penalty itself plus `lambda` per transmission.
//! Iterates are re-anchored at state 0 each sweep and convergence is
//! declared on the span of successive differences; the gain estimate is the
//! midpoint of the final difference bounds, which squeezes the true gain
//! once the span is below tolerance.
//!
//! This module exists to cross-check the closed forms from
//! [`crate::analysis`] by a route that never sees them: it only knows the
//! one-step kernel and the cost. Ties between actions break toward idling,
//! so with `lambda = 0` the do-nothing-when-synced policy is reported even
//! though transmitting from a synced state would cost the same.

use crate::model::SystemParams;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum MdpError {
    #[error("value iteration span still {span:e} after {iters} sweeps (tolerance {tol:e})")]
    NoConvergence { span: f64, iters: u64, tol: f64 },
    #[error("invalid solver config: {0}")]
    InvalidConfig(String),
    #[error("policy is not a threshold rule: transmits at {transmit_at} yet idles at {idle_at}")]
    NotThreshold { transmit_at: usize, idle_at: usize },
}

/// Truncation and stopping controls for the value iteration.
#[derive(Debug, Clone, Copy)]
pub struct MdpConfig {
    /// Ceiling state `S_max`; the chain lives on 0..=S_max.
    pub truncation: usize,
    /// Span-of-differences stopping tolerance.
    pub tol: f64,
    pub max_iters: u64,
}

impl Default for MdpConfig {
    fn default() -> Self {
        Self {
            truncation: 500,
            tol: 1e-10,
            max_iters: 1_000_000,
        }
    }
}

impl MdpConfig {
    fn validate(&self) -> Result<(), MdpError> {
        if self.truncation < 2 {
            return Err(MdpError::InvalidConfig(format!(
                "truncation must be at least 2, got {}",
                self.truncation
            )));
        }
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(MdpError::InvalidConfig(format!(
                "tolerance must be positive and finite, got {}",
                self.tol
            )));
        }
        if self.max_iters == 0 {
            return Err(MdpError::InvalidConfig("max_iters must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Action {
    Idle,
    Transmit,
}

/// Converged solve: long-run average cost, bias values anchored at
/// `value[0] = 0`, and the slot decision per state.
#[derive(Debug, Clone)]
pub struct MdpSolution {
    pub gain: f64,
    pub value: Vec<f64>,
    pub policy: Vec<Action>,
    pub iterations: u64,
}

/// First state that transmits under a monotone policy.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ThresholdDecision {
    At(u64),
    /// No state below the ceiling transmits; transmission has been priced
    /// out of the truncated model entirely.
    Never,
}

/// One backup of the two action values at state `s` (1..=ceiling).
/// Returns (idle value, transmit value).
fn backup(
    p: &SystemParams,
    lambda: f64,
    s: usize,
    ceiling: usize,
    v: &[f64],
) -> (f64, f64) {
    let up = v[(s + 1).min(ceiling)];
    let cost = s as f64;
    let reset_tx = p.p_remain() * p.p_success() + p.p_failure() * p.p_transition();
    let idle = cost + p.p_transition() * v[0] + p.growth_idle() * up;
    let tx = cost + lambda + reset_tx * v[0] + p.growth_transmit() * up;
    (idle, tx)
}

fn rvi<F>(
    p: &SystemParams,
    lambda: f64,
    cfg: &MdpConfig,
    mut choose: F,
) -> Result<MdpSolution, MdpError>
where
    F: FnMut(usize, f64, f64) -> (f64, Action),
{
    cfg.validate()?;
    if !lambda.is_finite() {
        return Err(MdpError::InvalidConfig(format!(
            "transmission price must be finite, got {lambda}"
        )));
    }
    let ceiling = cfg.truncation;
    let mut v = vec![0.0_f64; ceiling + 1];
    let mut next = vec![0.0_f64; ceiling + 1];
    let mut policy = vec![Action::Idle; ceiling + 1];
    let mut span = f64::INFINITY;

    for it in 1..=cfg.max_iters {
        // State 0: a delivered sample only confirms the estimate, so the
        // next-state law is action-free and only the price differs.
        let drift0 = p.p_remain() * v[0] + p.flip_total() * v[1];
        let (v0, a0) = choose(0, drift0, lambda + drift0);
        next[0] = v0;
        policy[0] = a0;
        for s in 1..=ceiling {
            let (idle, tx) = backup(p, lambda, s, ceiling, &v);
            let (val, act) = choose(s, idle, tx);
            next[s] = val;
            policy[s] = act;
        }

        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for s in 0..=ceiling {
            let d = next[s] - v[s];
            lo = lo.min(d);
            hi = hi.max(d);
        }
        span = hi - lo;
        let anchor = next[0];
        for (dst, src) in v.iter_mut().zip(next.iter()) {
            *dst = src - anchor;
        }
        if span < cfg.tol {
            return Ok(MdpSolution {
                gain: 0.5 * (hi + lo),
                value: v,
                policy,
                iterations: it,
            });
        }
    }
    Err(MdpError::NoConvergence {
        span,
        iters: cfg.max_iters,
        tol: cfg.tol,
    })
}

/// Optimal decisions when a transmission costs `lambda` on top of the
/// penalty. Ties break toward idling.
pub fn solve_lagrangian(
    p: &SystemParams,
    lambda: f64,
    cfg: &MdpConfig,
) -> Result<MdpSolution, MdpError> {
    rvi(p, lambda, cfg, |_, idle, tx| {
        if idle <= tx {
            (idle, Action::Idle)
        } else {
            (tx, Action::Transmit)
        }
    })
}

/// Optimal decisions for the bare penalty (price 0).
pub fn solve_unconstrained(p: &SystemParams, cfg: &MdpConfig) -> Result<MdpSolution, MdpError> {
    solve_lagrangian(p, 0.0, cfg)
}

/// Average cost of the fixed rule "transmit exactly from penalty `n` up",
/// evaluated on the same truncated model the optimizing solve uses. A
/// threshold beyond the ceiling never transmits.
pub fn evaluate_threshold(
    p: &SystemParams,
    n: u64,
    lambda: f64,
    cfg: &MdpConfig,
) -> Result<f64, MdpError> {
    let sol = rvi(p, lambda, cfg, |s, idle, tx| {
        if (s as u64) >= n {
            (tx, Action::Transmit)
        } else {
            (idle, Action::Idle)
        }
    })?;
    Ok(sol.gain)
}

/// Read the switching point off a solved policy, verifying monotonicity:
/// once a state transmits, every higher state must too.
pub fn extract_threshold(sol: &MdpSolution) -> Result<ThresholdDecision, MdpError> {
    let first_tx = sol.policy.iter().position(|a| *a == Action::Transmit);
    match first_tx {
        None => Ok(ThresholdDecision::Never),
        Some(i) => {
            if let Some(j) = sol.policy[i..].iter().position(|a| *a == Action::Idle) {
                return Err(MdpError::NotThreshold {
                    transmit_at: i,
                    idle_at: i + j,
                });
            }
            Ok(ThresholdDecision::At(i as u64))
        }
    }
}
