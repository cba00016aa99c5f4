//! JSON shapes shared by the CLI and the HTTP service.
//!
//! A round serializes as
//!
//! ```json
//! { "round": 0,
//!   "alice": { "setting": "R1", "panels": [{"row": 1, "col": 1, "color": "red"}, ...] },
//!   "bob":   { "setting": "C2", "panels": [...] },
//!   "seed_fingerprint": "0123456789abcdef" }
//! ```
//!
//! Rows and columns are 1-based; only lit panels are listed, in measurement order.

use serde::{Deserialize, Serialize};

use crate::classical::{ColoringCensus, ConstraintReport, GameValue, GameValueReport};
use crate::experiment::{valid_triples, BatchReport, Color, PanelGrid, RoundRecord, SettingTally};
use crate::quantum::Party;
use crate::square::{Setting, Variant};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PanelJson {
    pub row: u8,
    pub col: u8,
    pub color: Color,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DetectorJson {
    pub setting: Setting,
    pub panels: Vec<PanelJson>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RecordJson {
    pub round: u64,
    pub alice: DetectorJson,
    pub bob: DetectorJson,
    pub seed_fingerprint: String,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum WireError {
    #[error("panel ({row},{col}) is outside the 3x3 screen")]
    OutOfRange { row: u8, col: u8 },
    #[error("lit panels do not match setting {0}")]
    WrongLine(Setting),
    #[error("seed fingerprint `{0}` is not 16 hex digits")]
    Fingerprint(String),
}

fn detector_json(setting: Setting, grid: &PanelGrid) -> DetectorJson {
    let panels = setting
        .cells()
        .iter()
        .filter_map(|&(r, c)| {
            grid.get(r, c).map(|color| PanelJson {
                row: r as u8 + 1,
                col: c as u8 + 1,
                color,
            })
        })
        .collect();
    DetectorJson { setting, panels }
}

fn detector_grid(d: &DetectorJson) -> Result<PanelGrid, WireError> {
    let mut panels = [[None; 3]; 3];
    for p in &d.panels {
        if !(1..=3).contains(&p.row) || !(1..=3).contains(&p.col) {
            return Err(WireError::OutOfRange {
                row: p.row,
                col: p.col,
            });
        }
        panels[usize::from(p.row - 1)][usize::from(p.col - 1)] = Some(p.color);
    }
    let grid = PanelGrid::from_panels(panels);
    if grid.setting() != Some(d.setting) {
        return Err(WireError::WrongLine(d.setting));
    }
    Ok(grid)
}

impl From<&RoundRecord> for RecordJson {
    fn from(r: &RoundRecord) -> Self {
        RecordJson {
            round: r.round_index,
            alice: detector_json(r.alice_setting, &r.alice_panels),
            bob: detector_json(r.bob_setting, &r.bob_panels),
            seed_fingerprint: format!("{:016x}", r.seed_fingerprint),
        }
    }
}

impl TryFrom<&RecordJson> for RoundRecord {
    type Error = WireError;

    fn try_from(j: &RecordJson) -> Result<Self, WireError> {
        if j.seed_fingerprint.len() != 16 {
            return Err(WireError::Fingerprint(j.seed_fingerprint.clone()));
        }
        let seed_fingerprint = u64::from_str_radix(&j.seed_fingerprint, 16)
            .map_err(|_| WireError::Fingerprint(j.seed_fingerprint.clone()))?;
        Ok(RoundRecord {
            round_index: j.round,
            alice_setting: j.alice.setting,
            bob_setting: j.bob.setting,
            alice_panels: detector_grid(&j.alice)?,
            bob_panels: detector_grid(&j.bob)?,
            seed_fingerprint,
        })
    }
}

/// Compact label for a color triple, e.g. `"RGR"`.
pub fn triple_label(colors: [Color; 3]) -> String {
    colors.iter().map(|c| c.letter()).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutcomeCountJson {
    pub panels: String,
    pub count: u64,
    pub frequency: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SettingTallyJson {
    pub setting: Setting,
    pub uses: u64,
    pub invalid: u64,
    pub outcomes: Vec<OutcomeCountJson>,
}

impl SettingTallyJson {
    pub fn new(setting: Setting, variant: Variant, t: &SettingTally) -> Self {
        let outcomes = valid_triples(setting, variant)
            .iter()
            .enumerate()
            .map(|(k, &colors)| OutcomeCountJson {
                panels: triple_label(colors),
                count: t.counts[k],
                frequency: t.frequency(k),
            })
            .collect();
        SettingTallyJson {
            setting,
            uses: t.uses,
            invalid: t.invalid,
            outcomes,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrequencyTableJson {
    pub alice: Vec<SettingTallyJson>,
    pub bob: Vec<SettingTallyJson>,
}

impl FrequencyTableJson {
    pub fn new(tallies: &crate::experiment::Tallies, variant: Variant) -> Self {
        let side = |p: Party| {
            Setting::ALL
                .iter()
                .map(|&s| SettingTallyJson::new(s, variant, tallies.tally(p, s)))
                .collect()
        };
        FrequencyTableJson {
            alice: side(Party::Alice),
            bob: side(Party::Bob),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchReportJson {
    pub rounds: u64,
    pub seed: u64,
    pub policy: String,
    pub variant: Variant,
    pub parity_violations: u64,
    pub correlation_violations: u64,
    pub rounds_with_common_panels: u64,
    pub frequencies: FrequencyTableJson,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub records: Option<Vec<RecordJson>>,
}

impl From<&BatchReport> for BatchReportJson {
    fn from(b: &BatchReport) -> Self {
        BatchReportJson {
            rounds: b.tallies.rounds,
            seed: b.seed,
            policy: b.policy.to_string(),
            variant: b.variant,
            parity_violations: b.tallies.parity_violations,
            correlation_violations: b.tallies.correlation_violations,
            rounds_with_common_panels: b.tallies.rounds_with_common_panels,
            frequencies: FrequencyTableJson::new(&b.tallies, b.variant),
            records: b
                .records
                .as_ref()
                .map(|rs| rs.iter().map(RecordJson::from).collect()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConstraintJson {
    pub setting: Setting,
    pub satisfied: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConstraintReportJson {
    pub variant: Variant,
    pub constraints: Vec<ConstraintJson>,
    pub satisfied_count: u8,
}

impl ConstraintReportJson {
    pub fn new(report: &ConstraintReport, variant: Variant) -> Self {
        ConstraintReportJson {
            variant,
            constraints: Setting::ALL
                .iter()
                .map(|&s| ConstraintJson {
                    setting: s,
                    satisfied: report.satisfied(s),
                })
                .collect(),
            satisfied_count: report.satisfied_count,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FractionJson {
    pub wins: u64,
    pub total: u64,
    /// Reduced fraction, e.g. `"8/9"` or `"1"`.
    pub value: String,
}

impl From<&GameValue> for FractionJson {
    fn from(v: &GameValue) -> Self {
        FractionJson {
            wins: v.wins,
            total: v.total,
            value: v.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GameValueJson {
    pub game: crate::classical::Game,
    pub variant: Variant,
    pub classical_value: FractionJson,
    pub quantum_value: FractionJson,
    pub optimal_strategy_count: u64,
}

impl From<&GameValueReport> for GameValueJson {
    fn from(r: &GameValueReport) -> Self {
        GameValueJson {
            game: r.game,
            variant: r.variant,
            classical_value: (&r.classical_value).into(),
            quantum_value: (&r.quantum_value).into(),
            optimal_strategy_count: r.optimal_strategy_count,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CensusJson {
    pub variant: Variant,
    pub total: u32,
    pub fully_satisfying: u32,
    pub max_satisfied: u8,
    pub histogram: Vec<u32>,
}

impl CensusJson {
    pub fn new(c: &ColoringCensus, variant: Variant) -> Self {
        CensusJson {
            variant,
            total: c.total,
            fully_satisfying: c.fully_satisfying,
            max_satisfied: c.max_satisfied,
            histogram: c.histogram.to_vec(),
        }
    }
}
