//! Embedded journaled store.
//!
//! State lives in memory as an immutable [`Snapshot`] behind an `Arc`.
//! Readers clone the `Arc` and never observe later commits. Writers are
//! serialized: a commit validates its ops against a private copy of the
//! current state, appends and syncs one journal record, and only then
//! publishes the new snapshot.
//!
//! On disk a data directory holds `snapshot.json` (the state as of some
//! commit, written by [`Store::checkpoint`]) and `journal` (records after
//! that commit).

mod journal;

use std::collections::{BTreeSet, VecDeque};
use std::fs::{self, File};
use std::io::Write;
use std::ops::Deref;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, RwLock};

use chrono::Utc;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use journal::{encode as encode_record, CommitRecord, Journal, HEADER_LEN, SCHEMA_VERSION};

use crate::error::{DomainError, ErrorKind};
use crate::settings::Settings;
use crate::state::{Op, State};

const JOURNAL_FILE: &str = "journal";
const SNAPSHOT_FILE: &str = "snapshot.json";
const LOCK_FILE: &str = "LOCK";
/// How many recent commits are kept for conflict detection.
const CONFLICT_WINDOW: usize = 4096;

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("i/o failure: {0}")]
    Io(#[from] std::io::Error),
    #[error("corrupt journal at record {record}: {reason}")]
    CorruptJournal { record: u64, reason: String },
    #[error("incompatible schema version {found} (expected {expected})")]
    IncompatibleSchemaVersion { found: u32, expected: u32 },
    #[error("serialization failure: {0}")]
    Serialization(String),
    #[error("store at {0} is in use by another process")]
    Locked(PathBuf),
}

impl StoreError {
    pub fn code(&self) -> &'static str {
        match self {
            StoreError::Io(_) => "io_failure",
            StoreError::CorruptJournal { .. } => "corrupt_journal",
            StoreError::IncompatibleSchemaVersion { .. } => "incompatible_schema_version",
            StoreError::Serialization(_) => "serialization_failure",
            StoreError::Locked(_) => "store_locked",
        }
    }

    pub fn kind(&self) -> ErrorKind {
        ErrorKind::Io
    }
}

pub type CommitId = u64;

/// Immutable read view of the store at one commit.
#[derive(Debug, Clone)]
pub struct Snapshot {
    commit_id: CommitId,
    state: State,
}

impl Snapshot {
    pub fn commit_id(&self) -> CommitId {
        self.commit_id
    }

    pub fn state(&self) -> &State {
        &self.state
    }
}

impl Deref for Snapshot {
    type Target = State;

    fn deref(&self) -> &State {
        &self.state
    }
}

/// Ops planned against the snapshot at `base`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChangeSet {
    pub base: CommitId,
    pub ops: Vec<Op>,
}

impl ChangeSet {
    pub fn new(base: CommitId, ops: Vec<Op>) -> Self {
        Self { base, ops }
    }
}

#[derive(Serialize, Deserialize)]
struct SnapshotFile {
    schema_version: u32,
    last_commit_id: CommitId,
    state: State,
}

struct Writer {
    journal: Journal,
    recent: VecDeque<(CommitId, BTreeSet<String>)>,
}

pub struct Store {
    dir: PathBuf,
    // held for the lifetime of the store; one writer process per directory
    _lock: File,
    writer: Mutex<Writer>,
    current: RwLock<Arc<Snapshot>>,
}

impl std::fmt::Debug for Store {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Store")
            .field("dir", &self.dir)
            .field("commit_id", &self.commit_count())
            .finish()
    }
}

impl Store {
    /// Opens the store at `dir`, creating it with default settings if empty.
    pub fn open(dir: impl AsRef<Path>) -> Result<Self, StoreError> {
        Self::open_with(dir, Settings::default())
    }

    /// Like [`Store::open`]; `initial` seeds the settings of a fresh store.
    pub fn open_with(dir: impl AsRef<Path>, initial: Settings) -> Result<Self, StoreError> {
        let dir = dir.as_ref().to_path_buf();
        fs::create_dir_all(&dir)?;
        let lock = fs::OpenOptions::new()
            .create(true)
            .truncate(false)
            .write(true)
            .open(dir.join(LOCK_FILE))?;
        match lock.try_lock() {
            Ok(()) => {}
            Err(fs::TryLockError::WouldBlock) => return Err(StoreError::Locked(dir)),
            Err(fs::TryLockError::Error(e)) => return Err(e.into()),
        }

        let snapshot_path = dir.join(SNAPSHOT_FILE);
        let (mut commit_id, mut state) = if snapshot_path.exists() {
            let text = fs::read(&snapshot_path)?;
            let file: SnapshotFile = serde_json::from_slice(&text)
                .map_err(|e| StoreError::Serialization(format!("snapshot.json: {e}")))?;
            if file.schema_version != SCHEMA_VERSION {
                return Err(StoreError::IncompatibleSchemaVersion {
                    found: file.schema_version,
                    expected: SCHEMA_VERSION,
                });
            }
            (file.last_commit_id, file.state)
        } else {
            (0, State::with_settings(initial))
        };

        let (journal, records) = Journal::open(&dir.join(JOURNAL_FILE))?;
        let mut recent = VecDeque::new();
        for (i, rec) in records.into_iter().enumerate() {
            let index = i as u64 + 1;
            // Records at or below the snapshot survive a crash between
            // writing the snapshot and resetting the journal.
            if rec.commit_id <= commit_id {
                continue;
            }
            if rec.commit_id != commit_id + 1 {
                return Err(StoreError::CorruptJournal {
                    record: index,
                    reason: format!("commit id {} does not follow {}", rec.commit_id, commit_id),
                });
            }
            let mut keys = BTreeSet::new();
            for op in &rec.ops {
                state.apply(op).map_err(|e| StoreError::CorruptJournal {
                    record: index,
                    reason: format!("replay failed: {e}"),
                })?;
                keys.extend(op.touched_keys());
            }
            commit_id = rec.commit_id;
            remember(&mut recent, commit_id, keys);
        }

        Ok(Self {
            dir,
            _lock: lock,
            writer: Mutex::new(Writer { journal, recent }),
            current: RwLock::new(Arc::new(Snapshot { commit_id, state })),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn snapshot(&self) -> Arc<Snapshot> {
        self.current.read().expect("snapshot lock").clone()
    }

    /// Number of commits applied so far; also the id of the latest one.
    pub fn commit_count(&self) -> CommitId {
        self.current.read().expect("snapshot lock").commit_id
    }

    /// Applies `change` atomically. Either every op is validated, journaled
    /// and published, or nothing changes.
    pub fn commit(&self, change: ChangeSet) -> Result<CommitId, DomainError> {
        let mut writer = self.writer.lock().expect("writer lock");
        let current = self.snapshot();
        if change.ops.is_empty() {
            return Ok(current.commit_id);
        }

        let keys: BTreeSet<String> = change.ops.iter().flat_map(Op::touched_keys).collect();
        if change.base > current.commit_id {
            return Err(DomainError::Validation(format!(
                "change set based on unknown commit {}",
                change.base
            )));
        }
        if change.base < current.commit_id {
            let oldest = writer.recent.front().map(|(id, _)| *id).unwrap_or(u64::MAX);
            if oldest > change.base + 1 {
                return Err(DomainError::ConflictDetected);
            }
            let clash = writer
                .recent
                .iter()
                .filter(|(id, _)| *id > change.base)
                .any(|(_, touched)| !touched.is_disjoint(&keys));
            if clash {
                return Err(DomainError::ConflictDetected);
            }
        }

        let mut next = current.state.clone();
        for op in &change.ops {
            next.apply(op)?;
        }

        let commit_id = current.commit_id + 1;
        let record = CommitRecord {
            commit_id,
            committed_at: Utc::now(),
            ops: change.ops,
        };
        writer.journal.append(&record)?;
        remember(&mut writer.recent, commit_id, keys);

        *self.current.write().expect("snapshot lock") = Arc::new(Snapshot {
            commit_id,
            state: next,
        });
        Ok(commit_id)
    }

    /// Writes the current state to `snapshot.json` and empties the journal.
    pub fn checkpoint(&self) -> Result<CommitId, StoreError> {
        let mut writer = self.writer.lock().expect("writer lock");
        let current = self.snapshot();
        let file = SnapshotFile {
            schema_version: SCHEMA_VERSION,
            last_commit_id: current.commit_id,
            state: current.state.clone(),
        };
        let bytes =
            serde_json::to_vec(&file).map_err(|e| StoreError::Serialization(e.to_string()))?;
        let path = self.dir.join(SNAPSHOT_FILE);
        let tmp = path.with_extension("json.tmp");
        {
            let mut f = File::create(&tmp)?;
            f.write_all(&bytes)?;
            f.sync_all()?;
        }
        fs::rename(&tmp, &path)?;
        sync_dir(Some(&self.dir))?;
        writer.journal.reset()?;
        Ok(current.commit_id)
    }

    pub fn journal_path(&self) -> PathBuf {
        self.dir.join(JOURNAL_FILE)
    }
}

fn remember(
    recent: &mut VecDeque<(CommitId, BTreeSet<String>)>,
    id: CommitId,
    keys: BTreeSet<String>,
) {
    recent.push_back((id, keys));
    while recent.len() > CONFLICT_WINDOW {
        recent.pop_front();
    }
}

pub(crate) fn sync_dir(dir: Option<&Path>) -> Result<(), StoreError> {
    #[cfg(unix)]
    if let Some(dir) = dir {
        File::open(dir)?.sync_all()?;
    }
    #[cfg(not(unix))]
    let _ = dir;
    Ok(())
}
