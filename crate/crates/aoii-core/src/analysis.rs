//! Exact steady-state analysis of threshold transmission policies.
//!
//! A threshold-n policy transmits whenever the penalty sits at n or above
//! and idles below. Under such a policy the penalty process is a birth-death
//! chain pushed toward 0, and everything of interest has a closed form:
//! the stationary law ([`stationary`]), the long-run average penalty
//! ([`avg_penalty`]), the long-run fraction of transmitting slots
//! ([`active_fraction`]), and the price [`lambda_intersection`] at which a
//! cost of `lambda` per transmission makes thresholds n and n+1 equally
//! attractive.
//!
//! Geometric tails are summed in closed form throughout; nothing here
//! truncates a series. Powers `b^n` are evaluated on the log scale once `n`
//! is large, and when `b^n` falls below 1e-300 the expressions degrade
//! exactly to their never-transmit limits, which keeps every function finite
//! and monotone for arbitrarily large thresholds.

use crate::model::SystemParams;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum AnalysisError {
    /// Adjacent thresholds occupy the active region identically, so no
    /// finite price separates them.
    #[error("thresholds {0} and {0}+1 have identical active occupancy; no finite price separates them")]
    NoSeparation(u64),
}

/// `base^n` for probability bases, safe for huge exponents.
///
/// Below 1e-300 the result is snapped to 0 before subnormals can poison
/// downstream ratios; callers rely on the exact-0 never-transmit limits.
fn pow_u(base: f64, n: u64) -> f64 {
    if n == 0 {
        return 1.0;
    }
    if base == 0.0 {
        return 0.0;
    }
    let log = n as f64 * base.ln();
    if log < -690.7755 {
        // ln(1e-300)
        return 0.0;
    }
    if n <= i32::MAX as u64 {
        base.powi(n as i32)
    } else {
        log.exp()
    }
}

/// `1 - base^n` computed without cancellation when `base^n` is close to 1.
fn one_minus_pow(base: f64, n: u64) -> f64 {
    if n == 0 {
        return 0.0;
    }
    -f64::exp_m1(n as f64 * base.ln())
}

/// Reset probability while transmitting in error, `1 - a`, assembled from
/// first principles so no cancellation against `a` occurs.
fn reset_transmit(p: &SystemParams) -> f64 {
    p.p_remain() * p.p_success() + p.p_failure() * p.p_transition()
}

/// Reset probability while idling in error, `1 - b`. Equals the per-state
/// jump probability exactly.
fn reset_idle(p: &SystemParams) -> f64 {
    p.p_transition()
}

/// Normalizer D(n) = 1/pi_0(n) of the threshold-n stationary law, n >= 1.
fn normalizer(p: &SystemParams, n: u64) -> f64 {
    let w = p.flip_total();
    let b = p.growth_idle();
    let a = p.growth_transmit();
    1.0 + w * one_minus_pow(b, n) / reset_idle(p) + w * a * pow_u(b, n - 1) / reset_transmit(p)
}

/// Long-run average penalty when transmitting every slot.
pub fn cost_always_update(p: &SystemParams) -> f64 {
    let w = p.flip_total();
    let r = reset_transmit(p);
    w * (1.0 / (r * r)) / (1.0 + w / r)
}

/// Long-run average penalty when never transmitting: the source must wander
/// back to the stale estimate on its own.
pub fn cost_never_update(p: &SystemParams) -> f64 {
    let w = p.flip_total();
    let r = reset_idle(p);
    w * (1.0 / (r * r)) / (1.0 + w / r)
}

/// Stationary law of the penalty chain under a threshold-n policy.
///
/// Mass decays geometrically with ratio `b` through the idle band (below n)
/// and ratio `a` through the active band (at and above n).
#[derive(Debug, Clone, Copy)]
pub struct StationaryDistribution {
    params: SystemParams,
    threshold: u64,
    pi0: f64,
}

impl StationaryDistribution {
    pub fn threshold(&self) -> u64 {
        self.threshold
    }

    pub fn pi0(&self) -> f64 {
        self.pi0
    }

    /// Point mass at penalty value k.
    pub fn pi(&self, k: u64) -> f64 {
        let p = &self.params;
        let n = self.threshold;
        if k == 0 {
            return self.pi0;
        }
        let w = p.flip_total();
        if k <= n {
            w * pow_u(p.growth_idle(), k - 1) * self.pi0
        } else {
            w * pow_u(p.growth_idle(), n - 1) * pow_u(p.growth_transmit(), k - n) * self.pi0
        }
    }
}

/// Stationary law under the threshold-n policy.
///
/// Thresholds 0 and 1 induce the same chain (a transmission from a synced
/// state cannot change anything the monitor holds), so n = 0 delegates to
/// n = 1.
pub fn stationary(p: &SystemParams, n: u64) -> StationaryDistribution {
    let n = n.max(1);
    StationaryDistribution {
        params: *p,
        threshold: n,
        pi0: 1.0 / normalizer(p, n),
    }
}

/// Long-run average penalty under the threshold-n policy.
pub fn avg_penalty(p: &SystemParams, n: u64) -> f64 {
    if n == 0 {
        return cost_always_update(p);
    }
    let w = p.flip_total();
    let a = p.growth_transmit();
    let b = p.growth_idle();
    let ri = reset_idle(p);
    let rt = reset_transmit(p);
    let bn1 = pow_u(b, n - 1);
    // 1 + b^n (nb - n - 1) rewritten as (1 - b^n) - n b^n (1 - b); the
    // naive form loses half the mantissa once n(1-b) is small.
    let idle_band = (one_minus_pow(b, n) - n as f64 * bn1 * b * ri) / (ri * ri);
    let active_band = bn1 * a * (n as f64 + 1.0 / rt) / rt;
    w * (idle_band + active_band) / normalizer(p, n)
}

/// Long-run fraction of slots spent transmitting under the threshold-n
/// policy: the stationary mass at or above the threshold. Threshold 0
/// transmits every slot.
pub fn active_fraction(p: &SystemParams, n: u64) -> f64 {
    if n == 0 {
        return 1.0;
    }
    let w = p.flip_total();
    w * pow_u(p.growth_idle(), n - 1) / (reset_transmit(p) * normalizer(p, n))
}

/// Average penalty plus priced transmission budget overshoot for a
/// threshold-n policy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolicyCost {
    pub penalty: f64,
    pub lagrange: f64,
    pub total: f64,
}

/// Decomposed priced cost of threshold n: average penalty, plus `lambda`
/// times the amount the policy's transmit fraction exceeds the budget
/// `alpha`.
pub fn policy_cost(p: &SystemParams, n: u64, lambda: f64, alpha: f64) -> PolicyCost {
    let penalty = avg_penalty(p, n);
    let lagrange = lambda * (active_fraction(p, n) - alpha);
    PolicyCost {
        penalty,
        lagrange,
        total: penalty + lagrange,
    }
}

/// Total priced cost of threshold n; see [`policy_cost`].
pub fn lagrange_cost(p: &SystemParams, n: u64, lambda: f64, alpha: f64) -> f64 {
    policy_cost(p, n, lambda, alpha).total
}

/// Price per transmission at which thresholds n and n+1 cost the same.
///
/// Zero at n = 0 (the two chains coincide, so any price splits them the same
/// way). Strictly increasing in n whenever transmitting genuinely helps,
/// which is what makes threshold sweeps by price well ordered.
pub fn lambda_intersection(p: &SystemParams, n: u64) -> Result<f64, AnalysisError> {
    if n == 0 {
        return Ok(0.0);
    }
    let gap = active_fraction(p, n) - active_fraction(p, n + 1);
    if gap <= 0.0 {
        return Err(AnalysisError::NoSeparation(n));
    }
    Ok((avg_penalty(p, n + 1) - avg_penalty(p, n)) / gap)
}
