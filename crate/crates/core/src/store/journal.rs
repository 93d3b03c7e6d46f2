//! Append-only commit journal.
//!
//! ```text
//! header : "OBEJRNL\0" | schema version (u32 LE)
//! record : payload length (u32 LE) | crc32 of payload (u32 LE) | payload (JSON CommitRecord)
//! ```
//!
//! A record that is cut short by the end of the file is a torn write from
//! an interrupted commit; it is dropped and the file truncated back to the
//! last complete record. A complete record whose checksum or payload does
//! not verify is corruption and the journal refuses to open.

use std::fs::{self, File, OpenOptions};
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::StoreError;
use crate::model::Timestamp;
use crate::state::Op;

pub const MAGIC: &[u8; 8] = b"OBEJRNL\0";
pub const SCHEMA_VERSION: u32 = 1;
pub const HEADER_LEN: usize = 12;
const RECORD_HEADER_LEN: usize = 8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CommitRecord {
    pub commit_id: u64,
    pub committed_at: Timestamp,
    pub ops: Vec<Op>,
}

pub struct Journal {
    path: PathBuf,
    file: File,
    len: u64,
}

impl Journal {
    /// Opens (or creates) the journal and returns every complete record.
    pub fn open(path: &Path) -> Result<(Self, Vec<CommitRecord>), StoreError> {
        let mut bytes = Vec::new();
        if path.exists() {
            File::open(path)?.read_to_end(&mut bytes)?;
        }

        if bytes.len() < HEADER_LEN {
            // Missing or torn header: nothing was ever committed here.
            if !MAGIC.starts_with(&bytes[..bytes.len().min(MAGIC.len())]) {
                return Err(StoreError::CorruptJournal {
                    record: 0,
                    reason: "bad journal magic".into(),
                });
            }
            write_fresh(path)?;
            let file = OpenOptions::new().append(true).open(path)?;
            return Ok((
                Self {
                    path: path.to_path_buf(),
                    file,
                    len: HEADER_LEN as u64,
                },
                Vec::new(),
            ));
        }

        if &bytes[..8] != MAGIC {
            return Err(StoreError::CorruptJournal {
                record: 0,
                reason: "bad journal magic".into(),
            });
        }
        let version = u32::from_le_bytes(bytes[8..12].try_into().unwrap());
        if version != SCHEMA_VERSION {
            return Err(StoreError::IncompatibleSchemaVersion {
                found: version,
                expected: SCHEMA_VERSION,
            });
        }

        let (records, good_len) = parse_records(&bytes)?;

        let file = OpenOptions::new().append(true).open(path)?;
        if good_len < bytes.len() {
            file.set_len(good_len as u64)?;
            file.sync_all()?;
        }
        Ok((
            Self {
                path: path.to_path_buf(),
                file,
                len: good_len as u64,
            },
            records,
        ))
    }

    pub fn append(&mut self, record: &CommitRecord) -> Result<(), StoreError> {
        let frame = encode(record)?;
        let res = self
            .file
            .write_all(&frame)
            .and_then(|_| self.file.sync_data());
        if let Err(e) = res {
            // Leave no partial frame behind for the next append.
            let _ = self.file.set_len(self.len);
            return Err(e.into());
        }
        self.len += frame.len() as u64;
        Ok(())
    }

    /// Replaces the journal with an empty one (after a checkpoint).
    pub fn reset(&mut self) -> Result<(), StoreError> {
        write_fresh(&self.path)?;
        self.file = OpenOptions::new().append(true).open(&self.path)?;
        self.len = HEADER_LEN as u64;
        Ok(())
    }

    pub fn len(&self) -> u64 {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == HEADER_LEN as u64
    }
}

/// Frames one record.
pub fn encode(record: &CommitRecord) -> Result<Vec<u8>, StoreError> {
    let payload =
        serde_json::to_vec(record).map_err(|e| StoreError::Serialization(e.to_string()))?;
    let len = u32::try_from(payload.len())
        .map_err(|_| StoreError::Serialization("commit record too large".into()))?;
    let mut frame = Vec::with_capacity(RECORD_HEADER_LEN + payload.len());
    frame.extend_from_slice(&len.to_le_bytes());
    frame.extend_from_slice(&crc32fast::hash(&payload).to_le_bytes());
    frame.extend_from_slice(&payload);
    Ok(frame)
}

/// Parses records after the header. Returns them with the byte length of
/// the verified prefix.
fn parse_records(bytes: &[u8]) -> Result<(Vec<CommitRecord>, usize), StoreError> {
    let mut records = Vec::new();
    let mut at = HEADER_LEN;
    loop {
        let rest = &bytes[at..];
        if rest.len() < RECORD_HEADER_LEN {
            break;
        }
        let len = u32::from_le_bytes(rest[0..4].try_into().unwrap()) as usize;
        let crc = u32::from_le_bytes(rest[4..8].try_into().unwrap());
        if rest.len() - RECORD_HEADER_LEN < len {
            break;
        }
        let payload = &rest[RECORD_HEADER_LEN..RECORD_HEADER_LEN + len];
        let index = records.len() as u64 + 1;
        if crc32fast::hash(payload) != crc {
            return Err(StoreError::CorruptJournal {
                record: index,
                reason: "checksum mismatch".into(),
            });
        }
        let record: CommitRecord =
            serde_json::from_slice(payload).map_err(|e| StoreError::CorruptJournal {
                record: index,
                reason: format!("undecodable payload: {e}"),
            })?;
        records.push(record);
        at += RECORD_HEADER_LEN + len;
    }
    Ok((records, at))
}

fn write_fresh(path: &Path) -> Result<(), StoreError> {
    let tmp = path.with_extension("tmp");
    {
        let mut f = File::create(&tmp)?;
        f.write_all(MAGIC)?;
        f.write_all(&SCHEMA_VERSION.to_le_bytes())?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    super::sync_dir(path.parent())?;
    Ok(())
}
