//! Source, channel, and penalty-process primitives.
//!
//! A remote source X(t) evolves on {0, .., N-1} in discrete slots: it keeps
//! its state with probability p_R and otherwise jumps to one of the other
//! N-1 states uniformly, so each particular jump has probability
//! p_t = (1 - p_R)/(N - 1). A monitor holds the estimate Xhat(t), the last
//! successfully delivered sample. Sending a sample takes one slot and
//! succeeds with probability p_s.
//!
//! The penalty tracked here is the age of incorrect information
//! S(t) = consecutive slots with Xhat(t) != X(t). Symmetry of the source
//! makes S(t) Markov on its own, with a two-point next-step law from every
//! state: reset to 0 or grow by 1. [`aoii_kernel`] is that law; the growth
//! probabilities it is built from are
//!
//!   a = p_R(1 - p_s) + (N-2)p_t + p_s p_t   (transmitting while in error)
//!   b = p_R + (N-2)p_t                      (idling while in error)
//!
//! with b - a = p_s(p_R - p_t): transmitting helps exactly when the source
//! holds still more often than it lands on any given other state.

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ParamError {
    #[error("source needs at least 2 states, got {0}")]
    TooFewStates(u32),
    #[error("p_remain must lie strictly inside (0, 1), got {0}")]
    RemainOutOfRange(f64),
    #[error("p_success must lie in [0, 1], got {0}")]
    SuccessOutOfRange(f64),
}

/// Symmetric N-state source plus erasure-channel parameters.
///
/// Fields are private so the derived jump probability stays consistent;
/// construct through [`SystemParams::new`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SystemParams {
    num_states: u32,
    p_remain: f64,
    p_transition: f64,
    p_success: f64,
}

impl SystemParams {
    pub fn new(num_states: u32, p_remain: f64, p_success: f64) -> Result<Self, ParamError> {
        if num_states < 2 {
            return Err(ParamError::TooFewStates(num_states));
        }
        if !(p_remain > 0.0 && p_remain < 1.0) {
            return Err(ParamError::RemainOutOfRange(p_remain));
        }
        if !(0.0..=1.0).contains(&p_success) {
            return Err(ParamError::SuccessOutOfRange(p_success));
        }
        Ok(Self {
            num_states,
            p_remain,
            p_transition: (1.0 - p_remain) / (num_states - 1) as f64,
            p_success,
        })
    }

    pub fn num_states(&self) -> u32 {
        self.num_states
    }

    pub fn p_remain(&self) -> f64 {
        self.p_remain
    }

    /// Probability of the source jumping to one particular other state.
    pub fn p_transition(&self) -> f64 {
        self.p_transition
    }

    pub fn p_success(&self) -> f64 {
        self.p_success
    }

    pub fn p_failure(&self) -> f64 {
        1.0 - self.p_success
    }

    /// Total probability that the source leaves its current state,
    /// (N-1) p_t = 1 - p_R.
    pub fn flip_total(&self) -> f64 {
        (self.num_states - 1) as f64 * self.p_transition
    }

    /// Growth probability `a` of the penalty when transmitting from an
    /// erroneous state: the update must fail to land (channel failure while
    /// the source avoids the stale estimate) or succeed while the source
    /// moves on within the same slot.
    pub fn growth_transmit(&self) -> f64 {
        self.p_remain * self.p_failure()
            + (self.num_states - 2) as f64 * self.p_transition
            + self.p_success * self.p_transition
    }

    /// Growth probability `b` of the penalty when idling in an erroneous
    /// state: the source must not wander back to the stale estimate.
    pub fn growth_idle(&self) -> f64 {
        self.p_remain + (self.num_states - 2) as f64 * self.p_transition
    }
}

/// Two-point next-step law of the penalty process: reset to 0 or grow by 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransitionDistribution {
    pub p_reset: f64,
    pub p_grow: f64,
}

/// One-slot transition law of S(t) given the current penalty and the
/// transmit decision.
///
/// From a synced state (s = 0) the decision is irrelevant: a delivered
/// sample would only confirm what the monitor already holds, so the penalty
/// grows exactly when the source moves.
pub fn aoii_kernel(params: &SystemParams, s: u64, transmit: bool) -> TransitionDistribution {
    if s == 0 {
        TransitionDistribution {
            p_reset: params.p_remain(),
            p_grow: params.flip_total(),
        }
    } else if transmit {
        TransitionDistribution {
            p_reset: params.p_remain() * params.p_success()
                + params.p_failure() * params.p_transition(),
            p_grow: params.growth_transmit(),
        }
    } else {
        TransitionDistribution {
            p_reset: params.p_transition(),
            p_grow: params.growth_idle(),
        }
    }
}

/// Advance the penalty one slot using a uniform draw `u` in [0, 1).
pub fn step_aoii(params: &SystemParams, s: u64, transmit: bool, u: f64) -> u64 {
    let kernel = aoii_kernel(params, s, transmit);
    if u < kernel.p_reset {
        0
    } else {
        s + 1
    }
}

/// Advance the classical age of information one slot.
///
/// A sample taken at slot t arrives (if the channel cooperates) by t+1, so a
/// successful transmission leaves age 1, not 0. Everything else ages by one.
/// This is the single place the reset convention lives; swap it here if a
/// reset-to-0 bookkeeping is ever preferred.
pub fn step_aoi(delta: u64, transmit: bool, channel_success: bool) -> u64 {
    if transmit && channel_success {
        1
    } else {
        delta + 1
    }
}

/// Joint penalty bookkeeping carried by the simulator.
///
/// `aoii` and `aoi` reset on different events (correctness vs delivery), so
/// neither bounds the other pathwise: a delivery that races a source change
/// resets `aoi` to 1 while `aoii` keeps climbing.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PenaltyState {
    pub aoii: u64,
    pub aoi: u64,
}

impl PenaltyState {
    /// Synced start: estimate correct, no outstanding staleness.
    pub fn synced() -> Self {
        Self { aoii: 0, aoi: 0 }
    }

    /// The monitor is wrong exactly while the penalty is positive.
    pub fn in_error(&self) -> bool {
        self.aoii > 0
    }
}
