//! Shared oracles for the integration suites.
//!
//! Everything here recomputes quantities by a route the library does not
//! use: stationary mass by power iteration on the explicit truncated
//! transition matrix, aggregates by literally summing the series. Library
//! bugs and oracle bugs would have to cancel across two different
//! algorithms to slip through.

#![allow(dead_code)]

use aoii_core::{stationary, SystemParams};

/// Standard parameter grid: 48 configurations spanning small and large
/// alphabets, sluggish and jumpy sources, weak and perfect channels.
pub fn grid() -> Vec<SystemParams> {
    let mut v = Vec::new();
    for &n in &[2u32, 3, 4, 8] {
        for &pr in &[0.2, 0.5, 0.8, 0.9] {
            for &ps in &[0.3, 0.8, 1.0] {
                v.push(SystemParams::new(n, pr, ps).unwrap());
            }
        }
    }
    v
}

/// Sub-grid where transmitting actually helps (remain beats jump), the
/// regime the constrained optimizer lives in.
pub fn transmit_helps_grid() -> Vec<SystemParams> {
    grid()
        .into_iter()
        .filter(|p| p.p_remain() > p.p_transition() && p.p_success() > 0.0)
        .collect()
}

/// The benchmark scenario family: 8 states, 0.8 channel, varying stickiness.
pub fn scenario(p_remain: f64) -> SystemParams {
    SystemParams::new(8, p_remain, 0.8).unwrap()
}

/// Reset probability of the penalty chain at state `k` under threshold `n`.
fn reset_prob(p: &SystemParams, n: u64, k: usize) -> f64 {
    if k == 0 {
        p.p_remain()
    } else if (k as u64) < n.max(1) {
        p.p_transition()
    } else {
        p.p_remain() * p.p_success() + p.p_failure() * p.p_transition()
    }
}

/// How many states the truncated oracle chain needs before the ignored
/// tail is far below the comparison tolerances.
pub fn oracle_len(p: &SystemParams, n: u64) -> usize {
    let worst = p.growth_idle().max(p.growth_transmit()).max(0.3);
    let extra = (f64::ln(1e-16) / worst.ln()).ceil() as usize;
    n as usize + extra.clamp(200, 20_000)
}

/// Stationary distribution by power iteration on the explicit truncated
/// chain (growth from the last state self-absorbs). Independent of every
/// closed form in the library.
pub fn power_iteration_stationary(p: &SystemParams, n: u64, len: usize) -> Vec<f64> {
    let mut pi = vec![1.0 / len as f64; len];
    let mut next = vec![0.0f64; len];
    for _ in 0..500_000 {
        next.iter_mut().for_each(|x| *x = 0.0);
        for k in 0..len {
            let r = reset_prob(p, n, k);
            next[0] += pi[k] * r;
            next[(k + 1).min(len - 1)] += pi[k] * (1.0 - r);
        }
        let delta: f64 = next.iter().zip(&pi).map(|(a, b)| (a - b).abs()).sum();
        std::mem::swap(&mut pi, &mut next);
        if delta < 1e-15 {
            break;
        }
    }
    pi
}

/// Direct series sums over the pointwise stationary law:
/// (total mass, mean penalty, mass at or above the threshold).
pub fn series_sums(p: &SystemParams, n: u64) -> (f64, f64, f64) {
    let dist = stationary(p, n);
    let nn = n.max(1);
    let mut total = dist.pi(0);
    let mut mean = 0.0;
    let mut active = 0.0;
    let mut k = 1u64;
    loop {
        let m = dist.pi(k);
        total += m;
        mean += k as f64 * m;
        if k >= nn {
            active += m;
        }
        if k > nn && m < 1e-18 {
            break;
        }
        k += 1;
        assert!(k < 10_000_000, "series oracle failed to converge");
    }
    (total, mean, active)
}

/// Relative-or-absolute closeness, |a-b| against the larger magnitude
/// floored at 1.
pub fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}
