use magicsq::experiment::{run_batch, run_round, SettingPolicy};
use magicsq::quantum::{expectation, measure, source_state, Outcome, Party};
use magicsq::square::{square, Setting, Variant};
use magicsq::TOLERANCE;
use proptest::prelude::*;

fn any_setting() -> impl Strategy<Value = Setting> {
    (0..6usize).prop_map(|i| Setting::ALL[i])
}

fn any_variant() -> impl Strategy<Value = Variant> {
    prop_oneof![Just(Variant::Standard), Just(Variant::SignedSymmetric)]
}

fn any_policy() -> impl Strategy<Value = SettingPolicy> {
    prop_oneof![
        Just(SettingPolicy::UniformRandom),
        Just(SettingPolicy::RowsForAliceColsForBob),
        (any_setting(), any_setting()).prop_map(|(alice, bob)| SettingPolicy::Fixed { alice, bob }),
        (
            proptest::option::of(any_setting()),
            proptest::option::of(any_setting())
        )
            .prop_map(|(alice, bob)| SettingPolicy::Partial { alice, bob }),
    ]
}

proptest! {
    #[test]
    fn rounds_obey_both_rules(policy in any_policy(), variant in any_variant(), seed: u64, index in 0u64..1_000_000) {
        let rec = run_round(policy, variant, seed, index).unwrap();
        prop_assert!(rec.parity_ok(Party::Alice, variant));
        prop_assert!(rec.parity_ok(Party::Bob, variant));
        prop_assert!(rec.correlation_ok());
        // third outcome is fixed by the first two
        for party in Party::BOTH {
            let o = rec.colors(party).map(|c| c.outcome().value());
            prop_assert_eq!(o[2], variant.setting_sign(rec.setting(party)).value() * o[0] * o[1]);
        }
    }

    #[test]
    fn same_setting_lights_the_same_colors(s in any_setting(), variant in any_variant(), seed: u64, index in 0u64..1_000_000) {
        let rec = run_round(SettingPolicy::Fixed { alice: s, bob: s }, variant, seed, index).unwrap();
        prop_assert_eq!(rec.common_panels().len(), 3);
        prop_assert_eq!(rec.colors(Party::Alice), rec.colors(Party::Bob));
    }

    #[test]
    fn rounds_replay_from_seed_and_index(policy in any_policy(), seed: u64, index in 0u64..1_000_000) {
        let a = run_round(policy, Variant::Standard, seed, index).unwrap();
        let b = run_round(policy, Variant::Standard, seed, index).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn measurement_preserves_norm_and_repeats(
        cells in proptest::collection::vec((0..2usize, 0..3usize, 0..3usize, 0.0f64..1.0), 1..8),
        variant in any_variant(),
    ) {
        let mut state = source_state();
        for (p, r, c, draw) in cells {
            let obs = square(variant, Party::BOTH[p]).cell(r, c);
            let e = expectation(&state, &obs);
            let p_plus = 0.5 * (1.0 + e);
            let p_minus = 0.5 * (1.0 - e);
            prop_assert!((p_plus + p_minus - 1.0).abs() < TOLERANCE);
            prop_assert!(p_plus > -TOLERANCE && p_minus > -TOLERANCE);

            let (outcome, next) = measure(&state, &obs, draw).unwrap();
            prop_assert!((next.norm_squared() - 1.0).abs() < TOLERANCE);
            let (again, after) = measure(&next, &obs, 1.0 - draw).unwrap();
            prop_assert_eq!(again, outcome);
            prop_assert!(after.distance(&next) < TOLERANCE);
            state = next;
        }
    }
}

#[test]
fn batches_are_deterministic() {
    let a = run_batch(
        500,
        SettingPolicy::UniformRandom,
        Variant::Standard,
        42,
        true,
    )
    .unwrap();
    let b = run_batch(
        500,
        SettingPolicy::UniformRandom,
        Variant::Standard,
        42,
        true,
    )
    .unwrap();
    assert_eq!(a, b);
    let c = run_batch(
        500,
        SettingPolicy::UniformRandom,
        Variant::Standard,
        43,
        true,
    )
    .unwrap();
    assert_ne!(a.records, c.records);
}

#[test]
fn uniform_batch_has_no_violations_and_every_outcome() {
    for variant in Variant::ALL {
        let report = run_batch(3000, SettingPolicy::UniformRandom, variant, 5, false).unwrap();
        assert_eq!(report.tallies.violations(), 0);
        assert!(report.tallies.rounds_with_common_panels > 0);
        for party in Party::BOTH {
            for s in Setting::ALL {
                let t = report.tallies.tally(party, s);
                assert_eq!(t.counts.iter().sum::<u64>(), t.uses);
                assert!(
                    t.counts.iter().all(|&n| n > 0),
                    "{party} {s} {:?}",
                    t.counts
                );
            }
        }
    }
}

#[test]
fn outcome_values_are_exact() {
    assert_eq!(Outcome::Plus.value() * Outcome::Minus.value(), -1);
    assert_eq!(Outcome::from_value(0), None);
}
