//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any fails.

use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use magicsq::classical::{classical_game_value, enumerate_colorings, Game};
use magicsq::experiment::{
    no_signaling_check, order_independence_check, party_order_check, run_batch, Color, RoundRecord,
    SettingPolicy,
};
use magicsq::quantum::{Party, Sign};
use magicsq::square::{biorthogonal_decomposition_check, square, Setting, Variant};

const V: Variant = Variant::Standard;
const SEED: u64 = 20_261_016;
const TOL: f64 = 1e-12;

struct Outcome {
    passed: bool,
    detail: String,
}

type Criterion = (&'static str, fn() -> Outcome);

fn outcome(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

fn secs(d: Duration) -> String {
    format!("{:.2}s", d.as_secs_f64())
}

fn uniform_batch() -> Vec<RoundRecord> {
    run_batch(10_000, SettingPolicy::UniformRandom, V, SEED, true)
        .expect("batch")
        .records
        .expect("records kept")
}

/// Counted straight from the lit panels, without the library's checkers.
fn parity_violations(records: &[RoundRecord]) -> u64 {
    let mut bad = 0;
    for r in records {
        for party in Party::BOTH {
            let setting = r.setting(party);
            let reds = r
                .panels(party)
                .lit_panels()
                .filter(|(_, c)| *c == Color::Red)
                .count();
            let lit = r.panels(party).lit_panels().count();
            let want_even = setting != Setting::C3;
            if lit != 3 || (reds % 2 == 0) != want_even {
                bad += 1;
            }
        }
    }
    bad
}

fn rule_one() -> Outcome {
    let start = Instant::now();
    let records = uniform_batch();
    let report = run_batch(10_000, SettingPolicy::UniformRandom, V, SEED, false).expect("batch");
    let elapsed = start.elapsed();
    let mut used = [false; 6];
    for r in &records {
        used[r.alice_setting.index()] = true;
        used[r.bob_setting.index()] = true;
    }
    let independent = parity_violations(&records);
    outcome(
        independent == 0
            && report.tallies.parity_violations == 0
            && used.iter().all(|&u| u)
            && elapsed.as_secs() < 10,
        format!(
            "10000 rounds, parity violations {} (independent recount {}), all settings used {}, {}",
            report.tallies.parity_violations,
            independent,
            used.iter().all(|&u| u),
            secs(elapsed)
        ),
    )
}

fn rule_two() -> Outcome {
    let records = uniform_batch();
    let mut overlapping = 0;
    let mut compared = 0;
    let mut mismatches = 0;
    for r in &records {
        let mut any = false;
        for row in 0..3 {
            for col in 0..3 {
                if let (Some(a), Some(b)) =
                    (r.alice_panels.get(row, col), r.bob_panels.get(row, col))
                {
                    any = true;
                    compared += 1;
                    if a != b {
                        mismatches += 1;
                    }
                }
            }
        }
        overlapping += u64::from(any);
    }
    outcome(
        mismatches == 0 && overlapping > 0,
        format!("{overlapping} rounds with shared panels, {compared} panels compared, {mismatches} mismatches"),
    )
}

fn frequency() -> Outcome {
    let n = 10_000u64;
    let bound = 5.0 * (0.25f64 * 0.75 / n as f64).sqrt();
    let mut worst = 0.0f64;
    let mut ok = true;
    for s in Setting::ALL {
        let report = run_batch(
            n,
            SettingPolicy::Fixed { alice: s, bob: s },
            V,
            SEED + s.index() as u64,
            false,
        )
        .expect("batch");
        for party in Party::BOTH {
            let tally = report.tallies.tally(party, s);
            ok &= tally.uses == n && tally.invalid == 0;
            for k in 0..4 {
                let dev = (tally.counts[k] as f64 / n as f64 - 0.25).abs();
                worst = worst.max(dev);
            }
        }
    }
    outcome(
        ok && worst <= bound,
        format!("n = {n} per setting and party, max |f - 1/4| = {worst:.4}, bound {bound:.4}"),
    )
}

fn operator_identities() -> Outcome {
    let start = Instant::now();
    let expected = [
        Sign::Plus,
        Sign::Plus,
        Sign::Plus,
        Sign::Plus,
        Sign::Plus,
        Sign::Minus,
    ];
    let mut ok = true;
    let mut residual = 0.0f64;
    for party in Party::BOTH {
        let sq = square(V, party);
        let check = sq.product_check().expect("product check");
        ok &= Setting::ALL
            .iter()
            .all(|&s| check.sign(s) == expected[s.index()]);
        ok &= sq.all_settings_commute();
        residual = residual.max(check.max_residual);
    }
    let elapsed = start.elapsed();
    outcome(
        ok && residual < TOL && elapsed.as_secs() < 1,
        format!(
            "signs R1..C3 = + + + + + -, commuting {ok}, residual {residual:.1e}, {}",
            secs(elapsed)
        ),
    )
}

fn biorthogonal() -> Outcome {
    let sq = square(V, Party::Alice);
    let mut err = 0.0f64;
    let mut imag = 0.0f64;
    for s in Setting::ALL {
        err = err.max(biorthogonal_decomposition_check(V, s));
        imag = imag.max(sq.simultaneous_eigenbasis(s).max_imaginary());
    }
    outcome(
        err < TOL && imag < TOL,
        format!("reconstruction error {err:.1e}, max imaginary part {imag:.1e}"),
    )
}

fn impossibility() -> Outcome {
    let c = enumerate_colorings(V);
    outcome(
        c.total == 512 && c.fully_satisfying == 0 && c.max_satisfied == 5,
        format!(
            "{} colorings, {} satisfy all six, max satisfied {}",
            c.total, c.fully_satisfying, c.max_satisfied
        ),
    )
}

/// Direct 4^3 x 4^3 search over row and column answers, with parity-valid
/// triples generated here rather than taken from the library.
fn naive_three_by_three() -> u32 {
    let triples = |odd: bool| -> Vec<u8> {
        (0u8..8)
            .filter(|t| (t.count_ones() % 2 == 1) == odd)
            .collect()
    };
    let even = triples(false);
    let odd = triples(true);
    let bit = |t: u8, i: usize| (t >> i) & 1;
    let mut best = 0;
    for &a0 in &even {
        for &a1 in &even {
            for &a2 in &even {
                let rows = [a0, a1, a2];
                for &b0 in &even {
                    for &b1 in &even {
                        for &b2 in &odd {
                            let cols = [b0, b1, b2];
                            let wins = (0..3)
                                .flat_map(|r| (0..3).map(move |c| (r, c)))
                                .filter(|&(r, c)| bit(rows[r], c) == bit(cols[c], r))
                                .count() as u32;
                            best = best.max(wins);
                        }
                    }
                }
            }
        }
    }
    best
}

fn game_values() -> Outcome {
    let start = Instant::now();
    let three = classical_game_value(Game::ThreeByThree, V);
    let naive = naive_three_by_three();
    let six = classical_game_value(Game::SixBySix, V);

    let report = run_batch(
        100_000,
        SettingPolicy::RowsForAliceColsForBob,
        V,
        SEED,
        true,
    )
    .expect("batch");
    let records = report.records.as_deref().unwrap_or_default();
    let losses = records
        .iter()
        .filter(|r| {
            let (row, col) = (r.alice_setting.line(), r.bob_setting.line());
            r.alice_panels.get(row, col) != r.bob_panels.get(row, col)
        })
        .count();
    let elapsed = start.elapsed();

    let three_ok =
        three.classical_value.wins == 8 && three.classical_value.total == 9 && naive == 8;
    let quantum_ok = losses == 0
        && report.tallies.violations() == 0
        && records.len() == 100_000
        && three.quantum_value.wins == three.quantum_value.total;
    outcome(
        three_ok && quantum_ok && elapsed.as_secs() < 60,
        format!(
            "3x3 classical {} (library) vs {}/9 (direct search), 6x6 classical {}, \
             cleve rounds 100000 with {losses} losses, {}",
            three.classical_value,
            naive,
            six.classical_value,
            secs(elapsed)
        ),
    )
}

fn no_signaling_and_order() -> Outcome {
    let mut signaling = 0.0f64;
    let mut triple = 0.0f64;
    let mut parties = 0.0f64;
    for s in Setting::ALL {
        signaling = signaling.max(no_signaling_check(V, s).expect("no-signaling"));
        for party in Party::BOTH {
            triple = triple.max(order_independence_check(V, party, s).expect("order"));
        }
        for b in Setting::ALL {
            parties = parties.max(party_order_check(V, s, b).expect("party order"));
        }
    }
    outcome(
        signaling < TOL && triple < TOL && parties < TOL,
        format!("Bob marginals {signaling:.1e}, triple orderings {triple:.1e}, party orders {parties:.1e}"),
    )
}

fn determinism() -> Outcome {
    let exe = env!("CARGO_BIN_EXE_magicsq");
    let run = || {
        Command::new(exe)
            .args([
                "run", "--rounds", "1000", "--seed", "42", "--format", "json",
            ])
            .output()
            .expect("spawn magicsq")
    };
    let (a, b) = (run(), run());
    let ok =
        a.status.success() && b.status.success() && a.stdout == b.stdout && !a.stdout.is_empty();
    outcome(
        ok,
        format!(
            "two runs, {} and {} bytes, identical {}",
            a.stdout.len(),
            b.stdout.len(),
            a.stdout == b.stdout
        ),
    )
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("rule 1 exactness", rule_one),
        ("rule 2 exactness", rule_two),
        ("outcome frequency", frequency),
        ("operator identities", operator_identities),
        ("biorthogonal reconstruction", biorthogonal),
        ("coloring impossibility", impossibility),
        ("game values", game_values),
        ("no-signaling and order", no_signaling_and_order),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let o = check();
        println!(
            "{}  {:<28} {}",
            if o.passed { "PASS" } else { "FAIL" },
            name,
            o.detail
        );
        failed += usize::from(!o.passed);
    }
    println!("{} criteria, {} failed", criteria.len(), failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
