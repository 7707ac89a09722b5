mod common;

use aoii_core::{aoii_kernel, step_aoi, step_aoii, ParamError, PenaltyState, SystemParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

#[test]
fn constructor_rejects_bad_inputs() {
    assert_eq!(
        SystemParams::new(1, 0.5, 0.5).unwrap_err(),
        ParamError::TooFewStates(1)
    );
    assert_eq!(
        SystemParams::new(0, 0.5, 0.5).unwrap_err(),
        ParamError::TooFewStates(0)
    );
    assert!(matches!(
        SystemParams::new(2, 0.0, 0.5),
        Err(ParamError::RemainOutOfRange(_))
    ));
    assert!(matches!(
        SystemParams::new(2, 1.0, 0.5),
        Err(ParamError::RemainOutOfRange(_))
    ));
    assert!(matches!(
        SystemParams::new(2, f64::NAN, 0.5),
        Err(ParamError::RemainOutOfRange(_))
    ));
    assert!(matches!(
        SystemParams::new(2, 0.5, -0.1),
        Err(ParamError::SuccessOutOfRange(_))
    ));
    assert!(matches!(
        SystemParams::new(2, 0.5, 1.5),
        Err(ParamError::SuccessOutOfRange(_))
    ));
    // Boundary channels are legitimate models.
    assert!(SystemParams::new(2, 0.5, 0.0).is_ok());
    assert!(SystemParams::new(2, 0.5, 1.0).is_ok());
}

#[test]
fn jump_probability_and_derived_constants() {
    for p in common::grid() {
        let pr = p.p_remain();
        let pt = p.p_transition();
        let ps = p.p_success();
        // The N-1 jump branches and the stay branch exhaust the slot.
        assert!((pr + p.flip_total() - 1.0).abs() < 1e-12);
        // Growth probabilities are probabilities.
        let a = p.growth_transmit();
        let b = p.growth_idle();
        assert!((0.0..1.0).contains(&a), "a = {a} out of range");
        assert!((0.0..1.0).contains(&b), "b = {b} out of range");
        // Idling grows the penalty more than transmitting exactly to the
        // extent the channel can land a useful sample.
        assert!((b - a - ps * (pr - pt)).abs() < 1e-12);
        if pr >= pt {
            assert!(a <= b);
        }
    }
    // The jump probability can exceed the stay probability; the model must
    // accept that regime (it is where never transmitting wins).
    let p = SystemParams::new(2, 0.4, 0.8).unwrap();
    assert!(p.p_transition() > p.p_remain());
    assert!(p.growth_transmit() > p.growth_idle());
}

#[test]
fn kernel_matches_slot_case_analysis() {
    let p = SystemParams::new(8, 0.8, 0.8).unwrap();
    // Synced: the decision cannot matter, only the source moving hurts.
    for transmit in [false, true] {
        let k = aoii_kernel(&p, 0, transmit);
        assert_eq!(k.p_reset, 0.8);
        assert!((k.p_grow - p.flip_total()).abs() < 1e-15);
    }
    // In error, idling: only a lucky wander-back resets.
    let k = aoii_kernel(&p, 3, false);
    assert!((k.p_reset - p.p_transition()).abs() < 1e-15);
    assert!((k.p_grow - p.growth_idle()).abs() < 1e-15);
    // In error, transmitting with a perfect channel on a binary source:
    // reset exactly when the source holds still.
    let p2 = SystemParams::new(2, 0.8, 1.0).unwrap();
    let k2 = aoii_kernel(&p2, 3, true);
    assert!((k2.p_reset - 0.8).abs() < 1e-15);
    assert!((k2.p_grow - 0.2).abs() < 1e-15);
}

#[test]
fn kernel_rows_are_distributions() {
    for p in common::grid() {
        for s in [0u64, 1, 2, 7, 100] {
            for transmit in [false, true] {
                let k = aoii_kernel(&p, s, transmit);
                assert!(k.p_reset >= 0.0 && k.p_reset <= 1.0);
                assert!(k.p_grow >= 0.0 && k.p_grow <= 1.0);
                assert!((k.p_reset + k.p_grow - 1.0).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn transmitting_helps_exactly_when_remain_beats_jump() {
    for p in common::grid() {
        if p.p_success() == 0.0 || p.p_remain() == p.p_transition() {
            continue;
        }
        let idle = aoii_kernel(&p, 5, false);
        let tx = aoii_kernel(&p, 5, true);
        assert_eq!(
            tx.p_reset > idle.p_reset,
            p.p_remain() > p.p_transition(),
            "domination direction flipped for {p:?}"
        );
    }
}

#[test]
fn step_aoii_thresholds_the_draw() {
    let p = SystemParams::new(8, 0.8, 0.8).unwrap();
    assert_eq!(step_aoii(&p, 5, true, 0.0), 0);
    assert_eq!(step_aoii(&p, 5, true, 0.999_999), 6);
    assert_eq!(step_aoii(&p, 0, false, 0.999_999), 1);
    // Draw exactly at the reset mass goes to growth ([0, p_reset) resets).
    let k = aoii_kernel(&p, 5, false);
    assert_eq!(step_aoii(&p, 5, false, k.p_reset), 6);
}

#[test]
fn step_aoi_resets_to_one_only_on_delivery() {
    assert_eq!(step_aoi(7, true, true), 1);
    assert_eq!(step_aoi(7, true, false), 8);
    assert_eq!(step_aoi(7, false, false), 8);
    assert_eq!(step_aoi(0, false, false), 1);
}

#[test]
fn penalty_state_error_flag_tracks_positivity() {
    assert!(!PenaltyState::synced().in_error());
    assert!(PenaltyState { aoii: 1, aoi: 5 }.in_error());
    assert!(PenaltyState { aoii: 9, aoi: 2 }.in_error());
}

#[test]
fn empirical_step_frequencies_match_the_kernel() {
    let p = SystemParams::new(8, 0.8, 0.8).unwrap();
    let mut rng = ChaCha12Rng::seed_from_u64(42);
    let draws = 1_000_000u64;
    for (s, transmit) in [(3u64, true), (3, false), (0, true)] {
        let k = aoii_kernel(&p, s, transmit);
        let mut resets = 0u64;
        for _ in 0..draws {
            if step_aoii(&p, s, transmit, rng.gen::<f64>()) == 0 {
                resets += 1;
            }
        }
        let freq = resets as f64 / draws as f64;
        let se = (k.p_reset * (1.0 - k.p_reset) / draws as f64).sqrt();
        assert!(
            (freq - k.p_reset).abs() <= 4.0 * se,
            "s={s} transmit={transmit}: freq {freq} vs kernel {} (se {se})",
            k.p_reset
        );
    }
}
