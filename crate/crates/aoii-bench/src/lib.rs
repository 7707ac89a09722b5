//! Shared fixtures for the criterion benches.

use aoii_core::SystemParams;

/// The 8-state, 0.8-channel family used throughout the benches.
pub fn scenario(p_remain: f64) -> SystemParams {
    SystemParams::new(8, p_remain, 0.8).unwrap()
}
