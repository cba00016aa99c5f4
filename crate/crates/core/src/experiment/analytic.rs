//! Exact outcome distributions from Born-rule projector products, no sampling.

use crate::error::Result;
use crate::quantum::{
    clamp_probability, project, source_state, Amplitudes, Observable, Outcome, Party, StateVector,
};
use crate::square::{square, Setting, Variant};

/// Probability of every outcome sequence when `observables` are measured in
/// the given order. Entry `k` has bit `n-1-i` set iff observable `i` read -1.
pub fn sequential_distribution(
    state: &StateVector,
    observables: &[Observable],
) -> Result<Vec<f64>> {
    let n = observables.len();
    let mut out = vec![0.0; 1 << n];
    fn walk(
        amps: &Amplitudes,
        rest: &[Observable],
        n: usize,
        index: usize,
        out: &mut [f64],
    ) -> Result<()> {
        match rest.split_first() {
            None => {
                out[index] = clamp_probability(amps.norm_squared())?;
                Ok(())
            }
            Some((obs, tail)) => {
                let depth = n - rest.len();
                for o in Outcome::BOTH {
                    let branch = project(amps, obs, o);
                    let bit = usize::from(o == Outcome::Minus) << (n - 1 - depth);
                    walk(&branch, tail, n, index | bit, out)?;
                }
                Ok(())
            }
        }
    }
    walk(state.amplitudes(), observables, n, 0, &mut out)?;
    Ok(out)
}

/// Reorders a distribution measured in order `perm` (measured position `i`
/// holds observable `perm[i]`) into the canonical observable order.
fn to_canonical(dist: &[f64], perm: &[usize]) -> Vec<f64> {
    let n = perm.len();
    let mut out = vec![0.0; dist.len()];
    for (measured, p) in dist.iter().enumerate() {
        let mut canonical = 0;
        for (pos, &obs) in perm.iter().enumerate() {
            if measured >> (n - 1 - pos) & 1 == 1 {
                canonical |= 1 << (n - 1 - obs);
            }
        }
        out[canonical] = *p;
    }
    out
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

const PERMUTATIONS: [[usize; 3]; 6] = [
    [0, 1, 2],
    [0, 2, 1],
    [1, 0, 2],
    [1, 2, 0],
    [2, 0, 1],
    [2, 1, 0],
];

/// Largest deviation between the joint distribution of a setting's triple
/// measured in row/column order and in any of the other five orders.
pub fn order_independence_check(variant: Variant, party: Party, setting: Setting) -> Result<f64> {
    let obs = square(variant, party).setting_observables(setting);
    let psi = source_state();
    let reference = sequential_distribution(&psi, &obs)?;
    let mut worst = 0.0f64;
    for perm in PERMUTATIONS {
        let ordered: Vec<Observable> = perm.iter().map(|&i| obs[i]).collect();
        let dist = to_canonical(&sequential_distribution(&psi, &ordered)?, &perm);
        worst = worst.max(max_abs_diff(&reference, &dist));
    }
    Ok(worst)
}

/// Joint distribution over (Alice triple, Bob triple) with Alice first,
/// indexed with Alice's outcomes in the high three bits.
pub fn joint_distribution(variant: Variant, alice: Setting, bob: Setting) -> Result<Vec<f64>> {
    let a = square(variant, Party::Alice).setting_observables(alice);
    let b = square(variant, Party::Bob).setting_observables(bob);
    let seq: Vec<Observable> = a.iter().chain(&b).copied().collect();
    sequential_distribution(&source_state(), &seq)
}

/// Deviation between the joint distribution with Alice measuring first and
/// with Bob measuring first.
pub fn party_order_check(variant: Variant, alice: Setting, bob: Setting) -> Result<f64> {
    let alice_first = joint_distribution(variant, alice, bob)?;
    let a = square(variant, Party::Alice).setting_observables(alice);
    let b = square(variant, Party::Bob).setting_observables(bob);
    let seq: Vec<Observable> = b.iter().chain(&a).copied().collect();
    let bob_first = to_canonical(
        &sequential_distribution(&source_state(), &seq)?,
        &[3, 4, 5, 0, 1, 2],
    );
    Ok(max_abs_diff(&alice_first, &bob_first))
}

/// Bob's distribution over his own triple, marginalized over Alice's outcomes.
pub fn bob_marginal(variant: Variant, alice: Setting, bob: Setting) -> Result<[f64; 8]> {
    let joint = joint_distribution(variant, alice, bob)?;
    let mut marginal = [0.0; 8];
    for (k, p) in joint.iter().enumerate() {
        marginal[k & 0b111] += p;
    }
    Ok(marginal)
}

/// Largest spread of Bob's outcome distribution for `bob_setting` across
/// Alice's six settings, including the case where Alice does not measure.
pub fn no_signaling_check(variant: Variant, bob_setting: Setting) -> Result<f64> {
    let own = square(variant, Party::Bob).setting_observables(bob_setting);
    let alone = sequential_distribution(&source_state(), &own)?;
    let mut worst = 0.0f64;
    for alice in Setting::ALL {
        let marginal = bob_marginal(variant, alice, bob_setting)?;
        worst = worst.max(max_abs_diff(&marginal, &alone));
    }
    Ok(worst)
}

/// Probability that the two screens agree on every shared panel.
pub fn win_probability(variant: Variant, alice: Setting, bob: Setting) -> Result<f64> {
    let joint = joint_distribution(variant, alice, bob)?;
    let shared = alice.shared_cells(bob);
    let mut total = 0.0;
    for (k, p) in joint.iter().enumerate() {
        let agrees = shared.iter().all(|&cell| {
            let ia = alice.slot_of(cell).expect("shared");
            let ib = bob.slot_of(cell).expect("shared");
            (k >> (5 - ia) & 1) == (k >> (2 - ib) & 1)
        });
        if agrees {
            total += p;
        }
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::TOLERANCE;

    #[test]
    fn single_setting_is_uniform_over_valid_triples() {
        for v in Variant::ALL {
            for s in Setting::ALL {
                let obs = square(v, Party::Alice).setting_observables(s);
                let dist = sequential_distribution(&source_state(), &obs).unwrap();
                let sign = v.setting_sign(s).value();
                for (k, p) in dist.iter().enumerate() {
                    let o: Vec<i8> = (0..3)
                        .map(|i| if k >> (2 - i) & 1 == 1 { -1 } else { 1 })
                        .collect();
                    let expected = if o[0] * o[1] * o[2] == sign {
                        0.25
                    } else {
                        0.0
                    };
                    assert!((p - expected).abs() < TOLERANCE, "{v} {s} {k}: {p}");
                }
            }
        }
    }

    #[test]
    fn canonical_remap() {
        // measured order (2, 0, 1): measured bits b2 b0 b1
        let mut dist = vec![0.0; 8];
        dist[0b100] = 1.0; // observable 2 read -1
        let out = to_canonical(&dist, &[2, 0, 1]);
        assert_eq!(out[0b001], 1.0);
    }

    #[test]
    fn no_signaling_every_bob_setting() {
        for v in Variant::ALL {
            for s in Setting::ALL {
                assert!(no_signaling_check(v, s).unwrap() < TOLERANCE);
            }
        }
    }

    #[test]
    fn orders_do_not_matter() {
        for v in Variant::ALL {
            for p in Party::BOTH {
                for s in Setting::ALL {
                    assert!(order_independence_check(v, p, s).unwrap() < TOLERANCE);
                }
            }
            for a in Setting::ALL {
                for b in Setting::ALL {
                    assert!(party_order_check(v, a, b).unwrap() < TOLERANCE);
                }
            }
        }
    }

    #[test]
    fn quantum_strategy_always_wins() {
        for v in Variant::ALL {
            for a in Setting::ALL {
                for b in Setting::ALL {
                    assert!((win_probability(v, a, b).unwrap() - 1.0).abs() < TOLERANCE);
                }
            }
        }
    }
}
