//! Age-blind baseline: threshold policies on the classical age.
//!
//! A threshold-m age policy idles until the age reaches m, then transmits
//! every slot until a delivery lands. The age trajectory is a renewal
//! process (climb m - 1 slots, then a geometric number of attempts), so
//! both its transmit fraction and its average age are short renewal-reward
//! ratios. These policies see only packet freshness, never correctness,
//! which is exactly what makes them the fair comparison target for the
//! penalty-aware optimizer.

use crate::model::SystemParams;
use crate::optimizer::first_below;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum BaselineError {
    #[error("transmission budget must lie in (0, 1], got {0}")]
    BadBudget(f64),
    #[error("channel never succeeds (p_success = 0), the age renewal cycle cannot close")]
    DeadChannel,
    #[error("age thresholds start at 1 (the age is at least 1 after any delivery), got {0}")]
    ThresholdTooSmall(u64),
}

fn validate(p: &SystemParams, m: u64) -> Result<(), BaselineError> {
    if p.p_success() == 0.0 {
        return Err(BaselineError::DeadChannel);
    }
    if m == 0 {
        return Err(BaselineError::ThresholdTooSmall(m));
    }
    Ok(())
}

/// Long-run fraction of transmitting slots under the threshold-m age
/// policy: expected attempts per cycle over expected cycle length,
/// 1 / (1 + (m - 1) p_s). Depends on the channel only.
pub fn aoi_active_fraction(p: &SystemParams, m: u64) -> Result<f64, BaselineError> {
    validate(p, m)?;
    Ok(1.0 / (1.0 + (m - 1) as f64 * p.p_success()))
}

/// Long-run average age under the threshold-m age policy: the climb
/// contributes ages 1..m-1, the attempt phase ages m upward for a
/// geometric number of slots.
pub fn avg_aoi_threshold(p: &SystemParams, m: u64) -> Result<f64, BaselineError> {
    validate(p, m)?;
    let ps = p.p_success();
    let m = m as f64;
    let area = ps * m * (m - 1.0) / 2.0 + m + (1.0 - ps) / ps;
    Ok(area / (1.0 + (m - 1.0) * ps))
}

/// Budget-meeting randomization between adjacent age thresholds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AoiMixturePolicy {
    pub m0: u64,
    pub rho: f64,
    pub expected_tx: f64,
    pub expected_aoi: f64,
}

/// Cheapest age-threshold mixture meeting the budget: bracket the budget
/// between adjacent thresholds the same way the penalty-aware optimizer
/// does, then weight them to hit it exactly. Among age policies within the
/// budget this also minimizes the average age, since the age cost rises
/// with the threshold.
pub fn solve_aoi_constrained(
    p: &SystemParams,
    alpha: f64,
) -> Result<AoiMixturePolicy, BaselineError> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(BaselineError::BadBudget(alpha));
    }
    if p.p_success() == 0.0 {
        return Err(BaselineError::DeadChannel);
    }
    // The fraction at m = 1 is exactly 1, so the first strict undershoot is
    // at m >= 2 and the bracket's lower end is always a valid threshold.
    let (m_prime, _) = first_below(|m| {
        aoi_active_fraction(p, m).expect("validated above") - alpha
    });
    let m0 = m_prime - 1;
    let occ_lo = aoi_active_fraction(p, m0)?;
    let occ_hi = aoi_active_fraction(p, m_prime)?;
    let rho = (alpha - occ_hi) / (occ_lo - occ_hi);
    Ok(AoiMixturePolicy {
        m0,
        rho,
        expected_tx: rho * occ_lo + (1.0 - rho) * occ_hi,
        expected_aoi: rho * avg_aoi_threshold(p, m0)?
            + (1.0 - rho) * avg_aoi_threshold(p, m_prime)?,
    })
}
