//! Budgeted transmission: best threshold pair under a transmit-fraction cap.
//!
//! The active fraction of a threshold policy falls strictly as the
//! threshold rises, so the tightest threshold whose active fraction drops
//! below the budget can be bracketed by doubling and then bisected; the
//! budget is met exactly by randomizing between that threshold and its
//! predecessor. [`verify_optimality`] re-derives the supporting price and
//! checks the indifference and minimality conditions that make the pair
//! optimal, instead of trusting the construction.
//!
//! Budget comparisons are raw IEEE comparisons on the computed fractions:
//! a budget that exactly equals some threshold's fraction resolves to that
//! threshold with no randomization, deterministically.

use crate::analysis::{
    active_fraction, avg_penalty, cost_never_update, lagrange_cost, lambda_intersection,
    AnalysisError,
};
use crate::model::SystemParams;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum OptimizerError {
    #[error("transmission budget must lie in (0, 1], got {0}")]
    BadBudget(f64),
    #[error("channel never succeeds (p_success = 0), transmissions cannot buy accuracy")]
    DeadChannel,
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
    #[error("optimality certificate failed, clause {clause}: {detail}")]
    Certification { clause: &'static str, detail: String },
}

/// Result of the bracket-and-bisect search, with the number of
/// active-fraction evaluations it spent.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ThresholdSearch {
    /// Smallest threshold (>= 1) whose active fraction falls strictly
    /// below the budget.
    pub n_prime: u64,
    pub evaluations: u32,
}

/// Smallest n >= 1 with probe(n) < 0, for probes that start nonnegative
/// and decrease. Returns the hit and the probe count: doubling until the
/// sign flips, then bisection on the final bracket.
pub(crate) fn first_below(mut probe: impl FnMut(u64) -> f64) -> (u64, u32) {
    let mut evals = 0u32;
    let mut check = |n: u64, evals: &mut u32| {
        *evals += 1;
        probe(n) >= 0.0
    };
    let mut lb = 1u64;
    let mut ub = 1u64;
    while check(ub, &mut evals) {
        lb = ub;
        ub *= 2;
    }
    if ub == 1 {
        return (1, evals);
    }
    let mut mid = (lb + ub).div_ceil(2);
    while mid < ub {
        if check(mid, &mut evals) {
            lb = mid;
        } else {
            ub = mid;
        }
        mid = (lb + ub).div_ceil(2);
    }
    (ub, evals)
}

fn validate_budget(alpha: f64) -> Result<(), OptimizerError> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(OptimizerError::BadBudget(alpha));
    }
    Ok(())
}

/// Locate the first threshold whose long-run transmit fraction drops below
/// `alpha`. Spends at most `2*ceil(log2 n') + 4` fraction evaluations.
pub fn find_threshold(p: &SystemParams, alpha: f64) -> Result<ThresholdSearch, OptimizerError> {
    validate_budget(alpha)?;
    let (n_prime, evaluations) = first_below(|n| active_fraction(p, n) - alpha);
    Ok(ThresholdSearch {
        n_prime,
        evaluations,
    })
}

/// Randomized pair meeting the budget exactly: transmit from `n0` up with
/// weight `rho`, from `n0 + 1` up with weight `1 - rho`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MixtureSolution {
    pub n0: u64,
    pub rho: f64,
    /// Price at which thresholds n0 and n0+1 tie; the certificate's
    /// supporting hyperplane.
    pub lambda_star: f64,
    pub expected_cost: f64,
    pub expected_power: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ConstrainedSolution {
    Mixture(MixtureSolution),
    /// When the source returns to the estimate more readily than it lands
    /// on any particular other state, updates are worthless and idling is
    /// optimal under every budget.
    NeverTransmit { expected_cost: f64 },
}

/// Cheapest policy whose long-run transmit fraction stays within `alpha`.
pub fn solve_constrained(
    p: &SystemParams,
    alpha: f64,
) -> Result<ConstrainedSolution, OptimizerError> {
    validate_budget(alpha)?;
    if p.p_success() == 0.0 {
        return Err(OptimizerError::DeadChannel);
    }
    if p.p_transition() >= p.p_remain() {
        return Ok(ConstrainedSolution::NeverTransmit {
            expected_cost: cost_never_update(p),
        });
    }
    let search = find_threshold(p, alpha)?;
    let n0 = search.n_prime - 1;
    let occ_lo = active_fraction(p, n0);
    let occ_hi = active_fraction(p, n0 + 1);
    if occ_lo - occ_hi <= 0.0 {
        return Err(AnalysisError::NoSeparation(n0).into());
    }
    let rho = (alpha - occ_hi) / (occ_lo - occ_hi);
    let lambda_star = lambda_intersection(p, n0)?;
    Ok(ConstrainedSolution::Mixture(MixtureSolution {
        n0,
        rho,
        lambda_star,
        expected_cost: rho * avg_penalty(p, n0) + (1.0 - rho) * avg_penalty(p, n0 + 1),
        expected_power: rho * occ_lo + (1.0 - rho) * occ_hi,
    }))
}

/// Evidence gathered by [`verify_optimality`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CertificateReport {
    /// |priced cost of n0 - priced cost of n0+1| at the supporting price.
    pub indifference_residual: f64,
    /// Smallest margin by which any scanned threshold stays above the tied
    /// priced cost (nonnegative modulo tolerance when the pair is optimal).
    pub scan_min_margin: f64,
    /// Thresholds 0..=scan_limit were scanned.
    pub scan_limit: u64,
    /// Active fractions (at n0, at n0+1) bracketing the budget.
    pub occupancy_bracket: (f64, f64),
}

/// Re-check, from the closed forms alone, that a mixture solution really is
/// supported: the pair ties at its price, no other threshold beats the tie
/// on a wide scan, and the pair brackets the budget. The scan covers
/// thresholds up to ten times the pair (at least 50).
pub fn verify_optimality(
    p: &SystemParams,
    sol: &MixtureSolution,
) -> Result<CertificateReport, OptimizerError> {
    let alpha = sol.expected_power;
    let lam = sol.lambda_star;
    let tied = lagrange_cost(p, sol.n0, lam, alpha);
    let other = lagrange_cost(p, sol.n0 + 1, lam, alpha);
    let tol = 1e-9 * tied.abs().max(1.0);

    let indifference_residual = (tied - other).abs();
    if indifference_residual > tol {
        return Err(OptimizerError::Certification {
            clause: "indifference",
            detail: format!(
                "thresholds {} and {} differ by {:e} at price {}",
                sol.n0,
                sol.n0 + 1,
                indifference_residual,
                lam
            ),
        });
    }

    let scan_limit = (10 * (sol.n0 + 1)).max(50);
    let mut scan_min_margin = f64::INFINITY;
    for n in 0..=scan_limit {
        let margin = lagrange_cost(p, n, lam, alpha) - tied;
        scan_min_margin = scan_min_margin.min(margin);
        if margin < -tol {
            return Err(OptimizerError::Certification {
                clause: "minimality",
                detail: format!(
                    "threshold {n} undercuts the tied pair by {:e} at price {lam}",
                    -margin
                ),
            });
        }
    }

    let occ_lo = active_fraction(p, sol.n0);
    let occ_hi = active_fraction(p, sol.n0 + 1);
    if !(occ_lo >= alpha && alpha > occ_hi) {
        return Err(OptimizerError::Certification {
            clause: "bracketing",
            detail: format!(
                "budget {alpha} not bracketed: fraction({}) = {occ_lo}, fraction({}) = {occ_hi}",
                sol.n0,
                sol.n0 + 1
            ),
        });
    }

    Ok(CertificateReport {
        indifference_residual,
        scan_min_margin,
        scan_limit,
        occupancy_bracket: (occ_lo, occ_hi),
    })
}
