use std::sync::{Arc, OnceLock};

use axum::extract::rejection::JsonRejection;
use axum::extract::{Path, State};
use axum::routing::{get, post};
use axum::{Json, Router};
use magicsq::classical::{
    check_coloring, classical_game_value, element_of_reality_trace, Coloring, Game, RealityChain,
};
use magicsq::experiment::{Color, RoundRecord, SettingPolicy};
use magicsq::quantum::Party;
use magicsq::square::{Setting, Variant};
use magicsq::wire::{ConstraintReportJson, FrequencyTableJson, GameValueJson, RecordJson};
use serde::{Deserialize, Serialize};

use crate::error::ApiError;
use crate::session::SessionStore;

#[derive(Debug, Default)]
pub struct AppState {
    pub sessions: SessionStore,
}

pub type SharedState = Arc<AppState>;

pub fn routes(state: SharedState) -> Router {
    Router::new()
        .route("/api/v1/health", get(health))
        .route("/api/v1/sessions", post(create_session))
        .route("/api/v1/sessions/{id}/rounds", post(play_round))
        .route("/api/v1/sessions/{id}/records", get(get_records))
        .route("/api/v1/sessions/{id}/stats", get(get_stats))
        .route("/api/v1/coloring/check", post(check_coloring_endpoint))
        .route("/api/v1/game/values", get(get_game_values))
        .with_state(state)
}

fn body<T>(payload: Result<Json<T>, JsonRejection>) -> Result<T, ApiError> {
    payload
        .map(|Json(v)| v)
        .map_err(|e| ApiError::BadBody(e.body_text()))
}

fn parse_variant(v: Option<&str>) -> Result<Variant, ApiError> {
    v.map_or(Ok(Variant::Standard), |s| s.parse().map_err(ApiError::from))
}

async fn health() -> Json<serde_json::Value> {
    Json(serde_json::json!({ "status": "ok" }))
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CreateSessionRequest {
    pub seed: Option<u64>,
    pub variant: Option<String>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct CreateSessionResponse {
    pub id: String,
    pub seed: u64,
    pub variant: Variant,
}

async fn create_session(
    State(state): State<SharedState>,
    payload: Result<Json<CreateSessionRequest>, JsonRejection>,
) -> Result<Json<CreateSessionResponse>, ApiError> {
    let req = body(payload)?;
    let variant = parse_variant(req.variant.as_deref())?;
    let seed = req.seed.unwrap_or_else(rand::random);
    let (id, seed) = state.sessions.create(seed, variant).await;
    Ok(Json(CreateSessionResponse { id, seed, variant }))
}

/// Either side may be given; a missing side is drawn from the session
/// stream. `policy` may be `"random"` or `"cleve"` when no side is given.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlayRoundRequest {
    #[serde(alias = "alice")]
    pub alice_setting: Option<String>,
    #[serde(alias = "bob")]
    pub bob_setting: Option<String>,
    pub policy: Option<String>,
}

impl PlayRoundRequest {
    fn policy(&self) -> Result<SettingPolicy, ApiError> {
        let parse = |s: &Option<String>| -> Result<Option<Setting>, ApiError> {
            s.as_deref()
                .map(str::parse)
                .transpose()
                .map_err(ApiError::from)
        };
        let alice = parse(&self.alice_setting)?;
        let bob = parse(&self.bob_setting)?;
        match (self.policy.as_deref(), alice, bob) {
            (None, Some(alice), Some(bob)) => Ok(SettingPolicy::Fixed { alice, bob }),
            (None, alice, bob) => Ok(SettingPolicy::Partial { alice, bob }),
            (Some(p), None, None) => match p.to_ascii_lowercase().as_str() {
                "random" => Ok(SettingPolicy::UniformRandom),
                "cleve" => Ok(SettingPolicy::RowsForAliceColsForBob),
                _ => Err(ApiError::BadBody(format!("unknown policy `{p}`"))),
            },
            (Some(_), _, _) => Err(ApiError::BadBody(
                "give either `policy` or settings, not both".into(),
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartyFlags {
    pub alice: bool,
    pub bob: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CommonPanelJson {
    pub row: u8,
    pub col: u8,
    pub alice: Color,
    pub bob: Color,
    #[serde(rename = "match")]
    pub matches: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainJson {
    pub row: u8,
    pub col: u8,
    pub alice_color: Color,
    pub predicted_bob: Color,
    pub observed_bob: Color,
    pub confirmed: bool,
}

impl From<&RealityChain> for ChainJson {
    fn from(c: &RealityChain) -> Self {
        ChainJson {
            row: c.cell.0 as u8 + 1,
            col: c.cell.1 as u8 + 1,
            alice_color: c.alice_color,
            predicted_bob: c.predicted_bob,
            observed_bob: c.observed_bob,
            confirmed: c.confirmed,
        }
    }
}

/// The documented record plus the derived rule checks.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoundResponse {
    #[serde(flatten)]
    pub record: RecordJson,
    pub variant: Variant,
    pub parity_ok: PartyFlags,
    pub correlation_ok: bool,
    pub common_panels: Vec<CommonPanelJson>,
    /// Absent when the screens share no lit panel.
    pub explanation: Option<Vec<ChainJson>>,
}

impl RoundResponse {
    pub fn new(record: &RoundRecord, variant: Variant) -> Self {
        RoundResponse {
            record: record.into(),
            variant,
            parity_ok: PartyFlags {
                alice: record.parity_ok(Party::Alice, variant),
                bob: record.parity_ok(Party::Bob, variant),
            },
            correlation_ok: record.correlation_ok(),
            common_panels: record
                .common_panels()
                .iter()
                .map(|p| CommonPanelJson {
                    row: p.cell.0 as u8 + 1,
                    col: p.cell.1 as u8 + 1,
                    alice: p.alice,
                    bob: p.bob,
                    matches: p.matches(),
                })
                .collect(),
            explanation: element_of_reality_trace(record)
                .ok()
                .map(|chains| chains.iter().map(ChainJson::from).collect()),
        }
    }
}

/// Refuses to hand out a record that breaks either rule. Active in debug builds.
fn audit(record: &RoundRecord, variant: Variant) -> Result<(), ApiError> {
    if cfg!(debug_assertions) && !record.obeys_rules(variant) {
        return Err(ApiError::Internal(format!(
            "round {} violates the detector rules",
            record.round_index
        )));
    }
    Ok(())
}

async fn play_round(
    State(state): State<SharedState>,
    Path(id): Path<String>,
    payload: Result<Json<PlayRoundRequest>, JsonRejection>,
) -> Result<Json<RoundResponse>, ApiError> {
    let session = state.sessions.get(&id).await?;
    let req = body(payload)?;
    let policy = req.policy()?;
    let mut session = session.lock().await;
    let record = session.play(policy).await?;
    audit(&record, session.variant)?;
    Ok(Json(RoundResponse::new(&record, session.variant)))
}

#[derive(Debug, Serialize, Deserialize)]
pub struct RecordsResponse {
    pub id: String,
    pub seed: u64,
    pub variant: Variant,
    pub records: Vec<RecordJson>,
}

async fn get_records(
    State(state): State<SharedState>,
    Path(id): Path<String>,
) -> Result<Json<RecordsResponse>, ApiError> {
    let session = state.sessions.get(&id).await?;
    let session = session.lock().await;
    Ok(Json(RecordsResponse {
        id: session.id.clone(),
        seed: session.seed,
        variant: session.variant,
        records: session.records.iter().map(RecordJson::from).collect(),
    }))
}

#[derive(Debug, Serialize, Deserialize)]
pub struct StatsResponse {
    pub id: String,
    pub rounds: u64,
    pub parity_violations: u64,
    pub correlation_violations: u64,
    pub rounds_with_common_panels: u64,
    pub frequencies: FrequencyTableJson,
}

async fn get_stats(
    State(state): State<SharedState>,
    Path(id): Path<String>,
) -> Result<Json<StatsResponse>, ApiError> {
    let session = state.sessions.get(&id).await?;
    let session = session.lock().await;
    let t = &session.tallies;
    Ok(Json(StatsResponse {
        id: session.id.clone(),
        rounds: t.rounds,
        parity_violations: t.parity_violations,
        correlation_violations: t.correlation_violations,
        rounds_with_common_panels: t.rounds_with_common_panels,
        frequencies: FrequencyTableJson::new(t, session.variant),
    }))
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ColoringRequest {
    /// Nine colors, row-major.
    pub colors: Vec<String>,
    pub variant: Option<String>,
}

async fn check_coloring_endpoint(
    payload: Result<Json<ColoringRequest>, JsonRejection>,
) -> Result<Json<ConstraintReportJson>, ApiError> {
    let req = body(payload)?;
    let variant = parse_variant(req.variant.as_deref())?;
    let colors: [Color; 9] = req
        .colors
        .iter()
        .map(|c| c.parse::<Color>().map_err(ApiError::from))
        .collect::<Result<Vec<_>, _>>()?
        .try_into()
        .map_err(|v: Vec<Color>| {
            ApiError::BadBody(format!("expected 9 colors, got {}", v.len()))
        })?;
    let report = check_coloring(&Coloring::from_row_major(colors), variant);
    Ok(Json(ConstraintReportJson::new(&report, variant)))
}

/// Game values for both games and both variants, computed once per process.
pub fn game_values() -> &'static [GameValueJson] {
    static VALUES: OnceLock<Vec<GameValueJson>> = OnceLock::new();
    VALUES.get_or_init(|| {
        Variant::ALL
            .iter()
            .flat_map(|&v| Game::ALL.map(|g| GameValueJson::from(&classical_game_value(g, v))))
            .collect()
    })
}

async fn get_game_values() -> Result<Json<Vec<GameValueJson>>, ApiError> {
    let values = tokio::task::spawn_blocking(game_values)
        .await
        .map_err(|e| ApiError::Internal(e.to_string()))?;
    Ok(Json(values.to_vec()))
}
