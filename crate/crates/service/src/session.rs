//! In-memory session store with optional JSON-lines journaling.

use std::collections::HashMap;
use std::path::PathBuf;
use std::sync::Arc;

use magicsq::experiment::{run_round, RoundRecord, SettingPolicy, Tallies};
use magicsq::square::Variant;
use magicsq::wire::RecordJson;
use tokio::io::AsyncWriteExt;
use tokio::sync::{Mutex, RwLock};

use crate::error::ApiError;

/// One observers' logbook: a seed, a variant, and every round played so far.
#[derive(Debug)]
pub struct Session {
    pub id: String,
    pub seed: u64,
    pub variant: Variant,
    pub next_round_index: u64,
    pub records: Vec<RoundRecord>,
    pub tallies: Tallies,
    journal: Option<PathBuf>,
}

impl Session {
    fn new(id: String, seed: u64, variant: Variant, journal: Option<PathBuf>) -> Self {
        Session {
            id,
            seed,
            variant,
            next_round_index: 0,
            records: Vec::new(),
            tallies: Tallies::default(),
            journal,
        }
    }

    /// Plays the next round. The record and tallies are updated only after
    /// the journal line, if any, has been written.
    pub async fn play(&mut self, policy: SettingPolicy) -> Result<RoundRecord, ApiError> {
        let record = run_round(policy, self.variant, self.seed, self.next_round_index)?;
        if let Some(path) = &self.journal {
            let mut line = serde_json::to_string(&RecordJson::from(&record))
                .map_err(|e| ApiError::Internal(e.to_string()))?;
            line.push('\n');
            let mut file = tokio::fs::OpenOptions::new()
                .create(true)
                .append(true)
                .open(path)
                .await
                .map_err(|e| ApiError::Internal(format!("journal {}: {e}", path.display())))?;
            let io =
                |e: std::io::Error| ApiError::Internal(format!("journal {}: {e}", path.display()));
            file.write_all(line.as_bytes()).await.map_err(io)?;
            file.flush().await.map_err(io)?;
        }
        self.next_round_index += 1;
        self.tallies.record(&record, self.variant);
        self.records.push(record);
        Ok(record)
    }
}

/// Sessions keyed by id. Each session sits behind its own lock so requests
/// within a session are serialized while different sessions proceed in parallel.
#[derive(Debug, Default)]
pub struct SessionStore {
    sessions: RwLock<HashMap<String, Arc<Mutex<Session>>>>,
    journal_dir: Option<PathBuf>,
}

impl SessionStore {
    pub fn new(journal_dir: Option<PathBuf>) -> Self {
        SessionStore {
            sessions: RwLock::default(),
            journal_dir,
        }
    }

    pub async fn create(&self, seed: u64, variant: Variant) -> (String, u64) {
        let id = uuid::Uuid::new_v4().simple().to_string();
        let journal = self
            .journal_dir
            .as_ref()
            .map(|d| d.join(format!("{id}.jsonl")));
        let session = Session::new(id.clone(), seed, variant, journal);
        self.sessions
            .write()
            .await
            .insert(id.clone(), Arc::new(Mutex::new(session)));
        (id, seed)
    }

    pub async fn get(&self, id: &str) -> Result<Arc<Mutex<Session>>, ApiError> {
        self.sessions
            .read()
            .await
            .get(id)
            .cloned()
            .ok_or_else(|| ApiError::UnknownSession(id.to_string()))
    }

    pub async fn len(&self) -> usize {
        self.sessions.read().await.len()
    }

    pub async fn is_empty(&self) -> bool {
        self.len().await == 0
    }
}
