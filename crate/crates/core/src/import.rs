//! Roster and score CSV ingestion.
//!
//! Both importers check the header first (a wrong header applies nothing),
//! then validate each data row on its own. Bad rows are reported with
//! their 1-based file line and the good rows go into one change set.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::access::{require, Action, Resource};
use crate::domain::Planned;
use crate::error::{DomainError, Result};
use crate::gradebook::record_score;
use crate::model::*;
use crate::state::{Op, State};

pub const ROSTER_HEADER: [&str; 4] = ["student_id", "last_name", "first_name", "email"];
pub const SCORES_HEADER: [&str; 3] = ["student_id", "item_id", "raw_score"];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RejectedRow {
    pub line: u64,
    pub code: String,
    pub reason: String,
}

impl RejectedRow {
    fn new(line: u64, err: &DomainError) -> Self {
        Self {
            line,
            code: err.code().to_string(),
            reason: err.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RosterImport {
    pub class_id: ClassId,
    pub enrolled: usize,
    /// Accounts created for students not yet known. They start inactive
    /// and without a password.
    pub created: Vec<UserId>,
    pub rejected: Vec<RejectedRow>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScoreImport {
    pub class_id: ClassId,
    pub recorded: usize,
    pub rejected: Vec<RejectedRow>,
}

/// Reads every record with its line number after checking the header.
fn read_rows(bytes: &[u8], header: &[&str]) -> Result<Vec<(u64, csv::StringRecord)>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(bytes);
    let mut records = rdr.records();
    let first = match records.next() {
        None => return Err(DomainError::EmptyFile),
        Some(r) => r.map_err(|e| DomainError::Validation(format!("csv: {e}")))?,
    };
    let found: Vec<&str> = first
        .iter()
        .map(|f| f.trim_start_matches('\u{feff}').trim())
        .collect();
    if found != header {
        return Err(DomainError::BadHeader {
            expected: header.join(","),
            found: found.join(","),
        });
    }
    let mut rows = Vec::new();
    for rec in records {
        match rec {
            Ok(r) => {
                let line = r.position().map_or(0, |p| p.line());
                if r.iter().all(|f| f.trim().is_empty()) {
                    continue;
                }
                rows.push((line, r));
            }
            Err(e) => {
                let line = e.position().map_or(0, |p| p.line());
                let mut r = csv::StringRecord::new();
                r.push_field(&format!("\0{e}"));
                rows.push((line, r));
            }
        }
    }
    if rows.is_empty() {
        return Err(DomainError::EmptyFile);
    }
    Ok(rows)
}

fn check_width(rec: &csv::StringRecord, width: usize) -> Result<()> {
    if let Some(err) = rec.get(0).and_then(|f| f.strip_prefix('\0')) {
        return Err(DomainError::Validation(format!("malformed row: {err}")));
    }
    if rec.len() != width {
        return Err(DomainError::Validation(format!(
            "expected {width} fields, found {}",
            rec.len()
        )));
    }
    Ok(())
}

pub fn plan_roster_import(
    state: &State,
    actor: &Actor,
    class_id: &ClassId,
    bytes: &[u8],
) -> Result<Planned<RosterImport>> {
    require(
        state,
        actor,
        Action::ImportRoster,
        &Resource::Class(class_id.clone()),
    )?;
    let class = state.class(class_id)?;
    let rows = read_rows(bytes, &ROSTER_HEADER)?;

    let mut ops = Vec::new();
    let mut seen = BTreeSet::new();
    let mut report = RosterImport {
        class_id: class_id.clone(),
        enrolled: 0,
        created: Vec::new(),
        rejected: Vec::new(),
    };
    for (line, rec) in rows {
        let row = (|| -> Result<Vec<Op>> {
            check_width(&rec, ROSTER_HEADER.len())?;
            let id = rec[0].trim();
            let (last, first, email) = (rec[1].trim(), rec[2].trim(), rec[3].trim());
            if id.is_empty() {
                return Err(DomainError::Validation("student_id is empty".into()));
            }
            if last.is_empty() && first.is_empty() {
                return Err(DomainError::Validation("name is empty".into()));
            }
            if !email.is_empty() && !email.contains('@') {
                return Err(DomainError::Validation(format!("bad email `{email}`")));
            }
            let id = UserId::new(id);
            if !seen.insert(id.clone()) {
                return Err(DomainError::Validation(format!(
                    "duplicate student_id `{id}` in file"
                )));
            }
            if class.roster.contains(&id) {
                return Err(DomainError::AlreadyEnrolled(id.to_string()));
            }
            let mut ops = Vec::new();
            match state.users.get(&id) {
                Some(_) => {
                    state.require_role(&id, Role::Student)?;
                }
                None => ops.push(Op::CreateUser(UserRecord {
                    account: UserAccount {
                        user_id: id.clone(),
                        display_name: format!("{first} {last}").trim().to_string(),
                        role: Role::Student,
                        email: (!email.is_empty()).then(|| email.to_string()),
                        active: false,
                    },
                    password_hash: None,
                })),
            }
            ops.push(Op::Enroll {
                class_id: class_id.clone(),
                student_id: id,
            });
            Ok(ops)
        })();
        match row {
            Ok(row_ops) => {
                for op in &row_ops {
                    if let Op::CreateUser(u) = op {
                        report.created.push(u.account.user_id.clone());
                    }
                }
                report.enrolled += 1;
                ops.extend(row_ops);
            }
            Err(e) => report.rejected.push(RejectedRow::new(line, &e)),
        }
    }
    Ok(Planned::new(ops, report))
}

pub fn plan_score_import(
    state: &State,
    actor: &Actor,
    class_id: &ClassId,
    bytes: &[u8],
    now: Timestamp,
) -> Result<Planned<ScoreImport>> {
    require(
        state,
        actor,
        Action::ImportScores,
        &Resource::Class(class_id.clone()),
    )?;
    state.class(class_id)?;
    let rows = read_rows(bytes, &SCORES_HEADER)?;

    let mut ops = Vec::new();
    let mut seen = BTreeSet::new();
    let mut report = ScoreImport {
        class_id: class_id.clone(),
        recorded: 0,
        rejected: Vec::new(),
    };
    for (line, rec) in rows {
        let row = (|| -> Result<Vec<Op>> {
            check_width(&rec, SCORES_HEADER.len())?;
            let student = UserId::new(rec[0].trim());
            let item = ItemId::new(rec[1].trim());
            let raw: f64 = rec[2].trim().parse().map_err(|_| {
                DomainError::Validation(format!("raw_score `{}` is not a number", rec[2].trim()))
            })?;
            if seen.contains(&(student.clone(), item.clone())) {
                return Err(DomainError::Validation(format!(
                    "duplicate score for `{student}` on `{item}` in file"
                )));
            }
            let ops = record_score(state, actor, class_id, &student, &item, raw, now)?.ops;
            seen.insert((student, item));
            Ok(ops)
        })();
        match row {
            Ok(row_ops) => {
                report.recorded += 1;
                ops.extend(row_ops);
            }
            Err(e) => report.rejected.push(RejectedRow::new(line, &e)),
        }
    }
    Ok(Planned::new(ops, report))
}
