//! Hidden-variable analysis: predetermined panel colorings and the best
//! deterministic classical strategies for the two-detector game.
//!
//! All values here are exact integer counts.

use std::fmt;

use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::experiment::{valid_triples, verify_parity, Color, PanelGrid, RoundRecord};
use crate::quantum::Sign;
use crate::square::{Setting, Variant};

/// A predetermined color for each of the nine panels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Coloring(pub [[Color; 3]; 3]);

impl Coloring {
    /// Bit `3·row + col` set means that panel is red.
    pub fn from_bits(bits: u16) -> Self {
        Coloring(std::array::from_fn(|r| {
            std::array::from_fn(|c| {
                if bits >> (3 * r + c) & 1 == 1 {
                    Color::Red
                } else {
                    Color::Green
                }
            })
        }))
    }

    pub fn uniform(color: Color) -> Self {
        Coloring([[color; 3]; 3])
    }

    /// Row-major list of nine colors.
    pub fn from_row_major(colors: [Color; 9]) -> Self {
        Coloring(std::array::from_fn(|r| {
            std::array::from_fn(|c| colors[3 * r + c])
        }))
    }

    pub fn line(&self, s: Setting) -> [Color; 3] {
        s.cells().map(|(r, c)| self.0[r][c])
    }

    pub fn red_count(&self, s: Setting) -> usize {
        self.line(s).iter().filter(|c| **c == Color::Red).count()
    }
}

/// Which of the six parity constraints a coloring meets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConstraintReport {
    pub flags: [bool; 6],
    pub satisfied_count: u8,
}

impl ConstraintReport {
    pub fn satisfied(&self, s: Setting) -> bool {
        self.flags[s.index()]
    }
}

pub fn check_coloring(c: &Coloring, variant: Variant) -> ConstraintReport {
    let flags = Setting::ALL
        .map(|s| c.red_count(s).is_multiple_of(2) == (variant.setting_sign(s) == Sign::Plus));
    let satisfied_count = flags.iter().filter(|f| **f).count() as u8;
    ConstraintReport {
        flags,
        satisfied_count,
    }
}

/// Outcome of checking all 512 colorings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColoringCensus {
    pub total: u32,
    pub fully_satisfying: u32,
    pub max_satisfied: u8,
    /// `histogram[k]` colorings satisfy exactly `k` constraints.
    pub histogram: [u32; 7],
}

pub fn enumerate_colorings(variant: Variant) -> ColoringCensus {
    let mut histogram = [0u32; 7];
    for bits in 0..512u16 {
        let report = check_coloring(&Coloring::from_bits(bits), variant);
        histogram[usize::from(report.satisfied_count)] += 1;
    }
    let max_satisfied = (0..7).rev().find(|&k| histogram[k] > 0).unwrap_or(0) as u8;
    ColoringCensus {
        total: 512,
        fully_satisfying: histogram[6],
        max_satisfied,
        histogram,
    }
}

/// Which settings each party may use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Game {
    /// Alice answers rows only, Bob columns only.
    ThreeByThree,
    /// Both parties may use all six settings.
    SixBySix,
}

impl Game {
    pub const ALL: [Game; 2] = [Game::ThreeByThree, Game::SixBySix];

    pub fn alice_settings(self) -> &'static [Setting] {
        match self {
            Game::ThreeByThree => &Setting::ROWS,
            Game::SixBySix => &Setting::ALL,
        }
    }

    pub fn bob_settings(self) -> &'static [Setting] {
        match self {
            Game::ThreeByThree => &Setting::COLUMNS,
            Game::SixBySix => &Setting::ALL,
        }
    }

    pub fn question_pairs(self) -> u64 {
        (self.alice_settings().len() * self.bob_settings().len()) as u64
    }
}

impl fmt::Display for Game {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Game::ThreeByThree => f.write_str("3x3"),
            Game::SixBySix => f.write_str("6x6"),
        }
    }
}

/// Win count over the question pairs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GameValue {
    pub wins: u64,
    pub total: u64,
}

impl GameValue {
    pub fn ratio(&self) -> Ratio<u64> {
        Ratio::new(self.wins, self.total)
    }
}

impl fmt::Display for GameValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.ratio())
    }
}

/// A fixed answer (parity-valid color triple) for every allowed setting.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DeterministicStrategy {
    pub answers: Vec<(Setting, [Color; 3])>,
}

impl DeterministicStrategy {
    fn decode(settings: &[Setting], digits: &[usize], variant: Variant) -> Self {
        let answers = settings
            .iter()
            .zip(digits)
            .map(|(&s, &d)| (s, valid_triples(s, variant)[d]))
            .collect();
        DeterministicStrategy { answers }
    }

    pub fn answer(&self, s: Setting) -> Option<[Color; 3]> {
        self.answers.iter().find(|(x, _)| *x == s).map(|(_, c)| *c)
    }

    pub fn is_valid(&self, variant: Variant) -> bool {
        self.answers
            .iter()
            .all(|&(s, colors)| verify_parity(&PanelGrid::lit(s, colors), s, variant))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GameValueReport {
    pub game: Game,
    pub variant: Variant,
    pub classical_value: GameValue,
    pub quantum_value: GameValue,
    /// Number of (Alice, Bob) strategy pairs attaining the classical value.
    pub optimal_strategy_count: u64,
    pub witness: (DeterministicStrategy, DeterministicStrategy),
}

/// `wins[a_setting][a_answer][b_setting][b_answer]`: the two answers agree on
/// every shared panel (vacuously so when there is none).
struct WinTable {
    wins: Vec<[Vec<[bool; 4]>; 4]>,
}

impl WinTable {
    fn new(game: Game, variant: Variant) -> Self {
        let wins = game
            .alice_settings()
            .iter()
            .map(|&sa| {
                let ta = valid_triples(sa, variant);
                std::array::from_fn(|ia| {
                    game.bob_settings()
                        .iter()
                        .map(|&sb| {
                            let tb = valid_triples(sb, variant);
                            std::array::from_fn(|ib| {
                                sa.shared_cells(sb).iter().all(|&cell| {
                                    ta[ia][sa.slot_of(cell).expect("shared")]
                                        == tb[ib][sb.slot_of(cell).expect("shared")]
                                })
                            })
                        })
                        .collect()
                })
            })
            .collect();
        WinTable { wins }
    }

    fn get(&self, sa: usize, ia: usize, sb: usize, ib: usize) -> bool {
        self.wins[sa][ia][sb][ib]
    }
}

fn digits(mut code: usize, len: usize) -> Vec<usize> {
    let mut out = vec![0; len];
    for d in out.iter_mut() {
        *d = code & 3;
        code >>= 2;
    }
    out
}

/// Best (wins, pair count, bob code) against one Alice strategy, enumerating
/// every Bob strategy.
fn scan_bob(table: &WinTable, alice: &[usize], nb: usize) -> (u32, u64, usize) {
    // masks[sb][ib]: bitmask over Alice's settings that win against answer ib
    let masks: Vec<[u8; 4]> = (0..nb)
        .map(|sb| {
            std::array::from_fn(|ib| {
                alice.iter().enumerate().fold(0u8, |m, (sa, &ia)| {
                    m | (u8::from(table.get(sa, ia, sb, ib)) << sa)
                })
            })
        })
        .collect();
    let counts: Vec<[u32; 4]> = masks.iter().map(|m| m.map(u8::count_ones)).collect();

    let mut best = (0u32, 0u64, 0usize);
    for code in 0..(1usize << (2 * nb)) {
        let wins: u32 = (0..nb).map(|sb| counts[sb][code >> (2 * sb) & 3]).sum();
        if wins > best.0 {
            best = (wins, 1, code);
        } else if wins == best.0 {
            best.1 += 1;
        }
    }
    best
}

/// Exact classical value by exhaustive search over every pair of
/// deterministic strategies. The quantum value is 1: the entangled source
/// wins every question pair.
pub fn classical_game_value(game: Game, variant: Variant) -> GameValueReport {
    let table = WinTable::new(game, variant);
    let na = game.alice_settings().len();
    let nb = game.bob_settings().len();

    let per_alice: Vec<(u32, u64, usize, usize)> = (0..(1usize << (2 * na)))
        .into_par_iter()
        .map(|code| {
            let (wins, count, bob) = scan_bob(&table, &digits(code, na), nb);
            (wins, count, code, bob)
        })
        .collect();

    let best = per_alice.iter().map(|r| r.0).max().unwrap_or(0);
    let optimal_strategy_count = per_alice.iter().filter(|r| r.0 == best).map(|r| r.1).sum();
    let &(_, _, alice_code, bob_code) = per_alice
        .iter()
        .find(|r| r.0 == best)
        .expect("nonempty search");

    let total = game.question_pairs();
    GameValueReport {
        game,
        variant,
        classical_value: GameValue {
            wins: u64::from(best),
            total,
        },
        quantum_value: GameValue { wins: total, total },
        optimal_strategy_count,
        witness: (
            DeterministicStrategy::decode(game.alice_settings(), &digits(alice_code, na), variant),
            DeterministicStrategy::decode(game.bob_settings(), &digits(bob_code, nb), variant),
        ),
    }
}

/// Win count of a specific strategy pair.
pub fn play(game: Game, alice: &DeterministicStrategy, bob: &DeterministicStrategy) -> GameValue {
    let mut wins = 0;
    for &sa in game.alice_settings() {
        for &sb in game.bob_settings() {
            let (Some(ta), Some(tb)) = (alice.answer(sa), bob.answer(sb)) else {
                continue;
            };
            let agree = sa.shared_cells(sb).iter().all(|&cell| {
                ta[sa.slot_of(cell).expect("shared")] == tb[sb.slot_of(cell).expect("shared")]
            });
            wins += u64::from(agree);
        }
    }
    GameValue {
        wins,
        total: game.question_pairs(),
    }
}

/// Random-restart alternating best response. Never exceeds the exhaustive
/// value; with enough restarts it reaches it.
pub fn hill_climb_game_value(
    game: Game,
    variant: Variant,
    restarts: usize,
    seed: u64,
) -> GameValue {
    let table = WinTable::new(game, variant);
    let na = game.alice_settings().len();
    let nb = game.bob_settings().len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let score = |a: &[usize], b: &[usize]| -> u64 {
        (0..na)
            .flat_map(|sa| (0..nb).map(move |sb| (sa, sb)))
            .filter(|&(sa, sb)| table.get(sa, a[sa], sb, b[sb]))
            .count() as u64
    };

    let mut best = 0u64;
    for _ in 0..restarts {
        let mut a: Vec<usize> = (0..na).map(|_| rng.random_range(0..4)).collect();
        let mut b: Vec<usize> = (0..nb).map(|_| rng.random_range(0..4)).collect();
        let mut current = score(&a, &b);
        loop {
            // Bob's best response decomposes per setting, and so does Alice's.
            for (sb, slot) in b.iter_mut().enumerate() {
                *slot = (0..4)
                    .max_by_key(|&ib| (0..na).filter(|&sa| table.get(sa, a[sa], sb, ib)).count())
                    .expect("four answers");
            }
            for (sa, slot) in a.iter_mut().enumerate() {
                *slot = (0..4)
                    .max_by_key(|&ia| (0..nb).filter(|&sb| table.get(sa, ia, sb, b[sb])).count())
                    .expect("four answers");
            }
            let next = score(&a, &b);
            if next <= current {
                break;
            }
            current = next;
        }
        best = best.max(current);
    }
    GameValue {
        wins: best,
        total: game.question_pairs(),
    }
}

/// One step of the prediction argument: Alice's panel predicts Bob's.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RealityChain {
    /// Zero-based (row, col).
    pub cell: (usize, usize),
    pub alice_color: Color,
    pub predicted_bob: Color,
    pub observed_bob: Color,
    pub confirmed: bool,
}

/// For every shared panel, Alice's color predicts Bob's with certainty;
/// the trace records each prediction and whether the record bears it out.
pub fn element_of_reality_trace(record: &RoundRecord) -> Result<Vec<RealityChain>> {
    let common = record.common_panels();
    if common.is_empty() {
        return Err(Error::NoCommonPanel);
    }
    Ok(common
        .into_iter()
        .map(|p| RealityChain {
            cell: p.cell,
            alice_color: p.alice,
            predicted_bob: p.alice,
            observed_bob: p.bob,
            confirmed: p.alice == p.bob,
        })
        .collect())
}
