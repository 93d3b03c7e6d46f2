//! Report assembly and canonical serialization.
//!
//! Canonical JSON: object keys sorted by byte order at every depth, no
//! whitespace, UTF-8, numbers in serde_json's shortest round-trip form.
//! The same value always serializes to the same bytes.

use std::fmt;
use std::io::Write as _;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::analytics::{scope_records, AttainmentRecord, Distribution};
use crate::bands::BandScheme;
use crate::error::{DomainError, Result};
use crate::model::OutcomeCode;
use crate::numeric::format_fixed;
use crate::scope::Scope;
use crate::settings::check_threshold;
use crate::state::State;
use crate::store::{CommitId, StoreError};

pub const ATTAINMENT_CSV_HEADER: &str =
    "student_id,outcome_code,scope,score,attained,evidence_count";

/// Serializes `value` as canonical JSON.
pub fn to_canonical_json<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    let v = serde_json::to_value(value)
        .map_err(|e| DomainError::Store(StoreError::Serialization(e.to_string())))?;
    let mut out = String::new();
    write_canonical(&v, &mut out);
    Ok(out)
}

fn write_canonical(v: &Value, out: &mut String) {
    match v {
        Value::Object(map) => {
            let mut keys: Vec<&String> = map.keys().collect();
            keys.sort();
            out.push('{');
            for (i, k) in keys.into_iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                out.push_str(&Value::String(k.clone()).to_string());
                out.push(':');
                write_canonical(&map[k], out);
            }
            out.push('}');
        }
        Value::Array(items) => {
            out.push('[');
            for (i, item) in items.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                write_canonical(item, out);
            }
            out.push(']');
        }
        scalar => out.push_str(&scalar.to_string()),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    Csv,
    Json,
}

impl FromStr for ReportFormat {
    type Err = DomainError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            other => Err(DomainError::Validation(format!(
                "unknown format `{other}` (expected csv or json)"
            ))),
        }
    }
}

impl fmt::Display for ReportFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Csv => "csv",
            Self::Json => "json",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutcomeReport {
    pub outcome_code: OutcomeCode,
    pub no_evidence: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rate: Option<f64>,
    pub attained: usize,
    pub evaluated: usize,
    pub distribution: Distribution,
    pub records: Vec<AttainmentRecord>,
}

/// Everything the analytics export contains for one scope, computed from
/// one snapshot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalyticsReport {
    pub commit_id: CommitId,
    pub scope: Scope,
    pub threshold: f64,
    pub outcomes: Vec<OutcomeReport>,
}

impl AnalyticsReport {
    pub fn records(&self) -> impl Iterator<Item = &AttainmentRecord> {
        self.outcomes.iter().flat_map(|o| o.records.iter())
    }
}

pub fn analytics_report(
    state: &State,
    commit_id: CommitId,
    scope: &Scope,
    threshold: f64,
    scheme: &BandScheme,
) -> Result<AnalyticsReport> {
    check_threshold(threshold)?;
    let mut outcomes = Vec::new();
    for code in state.outcome_codes() {
        let records = scope_records(state, scope, &code, threshold)?;
        let attained = records.iter().filter(|r| r.attained).count();
        let distribution = Distribution::tally(
            scope.clone(),
            code.clone(),
            scheme,
            records.iter().map(|r| r.score),
        )?;
        outcomes.push(OutcomeReport {
            outcome_code: code,
            no_evidence: records.is_empty(),
            rate: (!records.is_empty()).then(|| attained as f64 / records.len() as f64),
            attained,
            evaluated: records.len(),
            distribution,
            records,
        });
    }
    Ok(AnalyticsReport {
        commit_id,
        scope: scope.clone(),
        threshold,
        outcomes,
    })
}

pub fn attainment_csv<'a>(records: impl IntoIterator<Item = &'a AttainmentRecord>) -> String {
    let mut out = String::from(ATTAINMENT_CSV_HEADER);
    out.push('\n');
    for r in records {
        let mut w = csv::WriterBuilder::new()
            .has_headers(false)
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        w.write_record([
            r.student_id.as_str(),
            r.outcome_code.as_str(),
            &r.scope.to_string(),
            &format_fixed(r.score, 4),
            if r.attained { "true" } else { "false" },
            &r.evidence_count.to_string(),
        ])
        .expect("write to memory");
        out.push_str(&String::from_utf8(w.into_inner().expect("flush to memory")).expect("utf-8"));
    }
    out
}

pub fn render(report: &AnalyticsReport, format: ReportFormat) -> Result<Vec<u8>> {
    Ok(match format {
        ReportFormat::Json => to_canonical_json(report)?.into_bytes(),
        ReportFormat::Csv => attainment_csv(report.records()).into_bytes(),
    })
}

/// Writes the rendered report to `dest` (replacing it atomically) and
/// returns the number of bytes written.
pub fn export_report(report: &AnalyticsReport, format: ReportFormat, dest: &Path) -> Result<u64> {
    let bytes = render(report, format)?;
    let tmp = dest.with_extension("tmp-export");
    let write = || -> std::io::Result<()> {
        let mut f = std::fs::File::create(&tmp)?;
        f.write_all(&bytes)?;
        f.sync_all()?;
        std::fs::rename(&tmp, dest)
    };
    write().map_err(|e| {
        let _ = std::fs::remove_file(&tmp);
        DomainError::Store(StoreError::Io(e))
    })?;
    Ok(bytes.len() as u64)
}
