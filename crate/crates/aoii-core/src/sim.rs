//! Monte Carlo runs of the full source/estimator/channel system.
//!
//! The simulator never touches the reduced penalty kernel: it carries the
//! actual source state and the monitor's estimate, delivers samples through
//! the lossy channel, and recomputes both penalties from scratch each slot.
//! Agreement between its time averages and the closed forms is therefore a
//! real cross-check, not a tautology.
//!
//! Slot order: decide from the current penalties, transmit, deliver on
//! channel success, let the source move, then re-derive the penalties. A
//! delivered sample carries the source value from the *start* of the slot,
//! so a success that races a source change leaves the monitor wrong with a
//! fresh timestamp: age resets to 1 while the penalty keeps climbing.
//!
//! Standard errors come from 30 batch means over the post-burn-in window.
//! Identical seeds give identical metrics, bit for bit.

use crate::model::{step_aoi, PenaltyState, SystemParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

const BATCHES: usize = 30;

#[derive(Debug, Error, PartialEq)]
pub enum SimError {
    #[error("horizon {horizon} too short: need at least 10x the burn-in ({burn_in}) and one slot per batch")]
    HorizonTooShort { horizon: u64, burn_in: u64 },
    #[error("mixture weight must lie in [0, 1], got {0}")]
    BadMixWeight(f64),
}

/// Decision rule the simulator applies each slot.
///
/// `Mixture` flips its coin only while the penalty sits exactly at `n0` and
/// always transmits above; `MixturePerState` is the alternative reading
/// that transmits with weight `rho` at `n0`, weight `1 - rho` at `n0 + 1`,
/// and always above. Both land on the budget in the long run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PolicySpec {
    AlwaysUpdate,
    NeverUpdate,
    /// Transmit whenever the penalty is at `n` or above.
    Threshold(u64),
    Mixture {
        n0: u64,
        rho: f64,
    },
    MixturePerState {
        n0: u64,
        rho: f64,
    },
    /// Transmit whenever the age is at `m` or above.
    AoiThreshold(u64),
    AoiMixture {
        m0: u64,
        rho: f64,
    },
}

impl PolicySpec {
    fn validate(&self) -> Result<(), SimError> {
        let rho = match self {
            PolicySpec::Mixture { rho, .. }
            | PolicySpec::MixturePerState { rho, .. }
            | PolicySpec::AoiMixture { rho, .. } => *rho,
            _ => return Ok(()),
        };
        if !(0.0..=1.0).contains(&rho) {
            return Err(SimError::BadMixWeight(rho));
        }
        Ok(())
    }

    fn decide(&self, pen: &PenaltyState, rng: &mut ChaCha12Rng) -> bool {
        match *self {
            PolicySpec::AlwaysUpdate => true,
            PolicySpec::NeverUpdate => false,
            PolicySpec::Threshold(n) => pen.aoii >= n,
            PolicySpec::Mixture { n0, rho } => {
                if pen.aoii > n0 {
                    true
                } else if pen.aoii == n0 {
                    rng.gen::<f64>() < rho
                } else {
                    false
                }
            }
            PolicySpec::MixturePerState { n0, rho } => {
                if pen.aoii > n0 + 1 {
                    true
                } else if pen.aoii == n0 + 1 {
                    rng.gen::<f64>() < 1.0 - rho
                } else if pen.aoii == n0 {
                    rng.gen::<f64>() < rho
                } else {
                    false
                }
            }
            PolicySpec::AoiThreshold(m) => pen.aoi >= m,
            PolicySpec::AoiMixture { m0, rho } => {
                if pen.aoi > m0 {
                    true
                } else if pen.aoi == m0 {
                    rng.gen::<f64>() < rho
                } else {
                    false
                }
            }
        }
    }
}

/// Time averages over the measured window with batch-means standard
/// errors. `error_rate` is the fraction of slots spent with a wrong
/// estimate, so `1 - error_rate` estimates the stationary synced mass.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SimMetrics {
    pub avg_aoii: f64,
    pub avg_aoi: f64,
    pub error_rate: f64,
    pub tx_fraction: f64,
    pub se_aoii: f64,
    pub se_aoi: f64,
    pub se_error: f64,
    pub se_tx: f64,
    pub horizon: u64,
    pub seed: u64,
}

/// Per-series accumulator: grand total plus per-batch totals.
struct Series {
    total: f64,
    batch: [f64; BATCHES],
}

impl Series {
    fn new() -> Self {
        Self {
            total: 0.0,
            batch: [0.0; BATCHES],
        }
    }

    fn push(&mut self, idx: u64, batch_len: u64, value: f64) {
        self.total += value;
        let b = (idx / batch_len) as usize;
        if b < BATCHES {
            self.batch[b] += value;
        }
    }

    fn mean(&self, horizon: u64) -> f64 {
        self.total / horizon as f64
    }

    fn se(&self, batch_len: u64) -> f64 {
        let means: Vec<f64> = self.batch.iter().map(|s| s / batch_len as f64).collect();
        let grand = means.iter().sum::<f64>() / BATCHES as f64;
        let var = means.iter().map(|m| (m - grand).powi(2)).sum::<f64>() / (BATCHES - 1) as f64;
        (var / BATCHES as f64).sqrt()
    }
}

/// Run one trajectory for `horizon` measured slots after `burn_in`
/// discarded ones, from a synced start.
pub fn run(
    params: &SystemParams,
    policy: PolicySpec,
    horizon: u64,
    seed: u64,
    burn_in: u64,
) -> Result<SimMetrics, SimError> {
    policy.validate()?;
    if horizon < (BATCHES as u64) || horizon < burn_in.saturating_mul(10) {
        return Err(SimError::HorizonTooShort { horizon, burn_in });
    }
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let n = params.num_states() as u64;
    let mut x = 0u64;
    let mut xhat = 0u64;
    let mut pen = PenaltyState::synced();

    let batch_len = horizon / BATCHES as u64;
    let mut aoii = Series::new();
    let mut aoi = Series::new();
    let mut err = Series::new();
    let mut tx = Series::new();

    for t in 0..burn_in + horizon {
        let transmit = policy.decide(&pen, &mut rng);
        if t >= burn_in {
            let i = t - burn_in;
            aoii.push(i, batch_len, pen.aoii as f64);
            aoi.push(i, batch_len, pen.aoi as f64);
            err.push(i, batch_len, if pen.in_error() { 1.0 } else { 0.0 });
            tx.push(i, batch_len, if transmit { 1.0 } else { 0.0 });
        }
        let success = transmit && rng.gen::<f64>() < params.p_success();
        if success {
            xhat = x;
        }
        if rng.gen::<f64>() >= params.p_remain() {
            // Uniform over the other states, phrased as a cyclic offset.
            x = (x + rng.gen_range(1..n)) % n;
        }
        pen.aoii = if x == xhat { 0 } else { pen.aoii + 1 };
        pen.aoi = step_aoi(pen.aoi, transmit, success);
    }

    Ok(SimMetrics {
        avg_aoii: aoii.mean(horizon),
        avg_aoi: aoi.mean(horizon),
        error_rate: err.mean(horizon),
        tx_fraction: tx.mean(horizon),
        se_aoii: aoii.se(batch_len),
        se_aoi: aoi.se(batch_len),
        se_error: err.se(batch_len),
        se_tx: tx.se(batch_len),
        horizon,
        seed,
    })
}

/// One configuration of a sweep grid.
#[derive(Debug, Clone)]
pub struct SweepCell {
    pub params: SystemParams,
    pub policy: PolicySpec,
    pub label: String,
}

#[derive(Debug, Clone)]
pub struct SweepRow {
    pub label: String,
    pub params: SystemParams,
    pub policy: PolicySpec,
    pub metrics: SimMetrics,
}

/// Run every cell, seeding cell `i` with `base_seed + i`. Cells execute in
/// parallel; the output order is the input order regardless.
pub fn run_sweep(
    cells: &[SweepCell],
    horizon: u64,
    burn_in: u64,
    base_seed: u64,
) -> Result<Vec<SweepRow>, SimError> {
    cells
        .par_iter()
        .enumerate()
        .map(|(i, cell)| {
            let metrics = run(
                &cell.params,
                cell.policy,
                horizon,
                base_seed.wrapping_add(i as u64),
                burn_in,
            )?;
            Ok(SweepRow {
                label: cell.label.clone(),
                params: cell.params,
                policy: cell.policy,
                metrics,
            })
        })
        .collect()
}
