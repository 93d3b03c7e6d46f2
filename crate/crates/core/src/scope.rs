use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::DomainError;
use crate::model::{ClassId, ClassSection};

/// Which class sections an analytics query draws evidence from.
///
/// Textual form: `all`, `class:<id>`, `term:<label>` or
/// `terms:<from>..<to>` (inclusive, term labels compared as text, so
/// `2024-1 < 2024-2 < 2025-1`).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Scope {
    All,
    Class(ClassId),
    Term(String),
    Terms { from: String, to: String },
}

impl Scope {
    pub fn includes(&self, class: &ClassSection) -> bool {
        match self {
            Scope::All => true,
            Scope::Class(id) => &class.class_id == id,
            Scope::Term(t) => &class.term == t,
            Scope::Terms { from, to } => {
                class.term.as_str() >= from.as_str() && class.term.as_str() <= to.as_str()
            }
        }
    }

    pub fn class_id(&self) -> Option<&ClassId> {
        match self {
            Scope::Class(id) => Some(id),
            _ => None,
        }
    }
}

impl fmt::Display for Scope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scope::All => f.write_str("all"),
            Scope::Class(id) => write!(f, "class:{id}"),
            Scope::Term(t) => write!(f, "term:{t}"),
            Scope::Terms { from, to } => write!(f, "terms:{from}..{to}"),
        }
    }
}

impl FromStr for Scope {
    type Err = DomainError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || DomainError::InvalidScope(s.to_string());
        let s = s.trim();
        if s == "all" {
            return Ok(Scope::All);
        }
        let (kind, rest) = s.split_once(':').ok_or_else(bad)?;
        if rest.is_empty() || rest.contains(',') {
            return Err(bad());
        }
        match kind {
            "class" => Ok(Scope::Class(ClassId::new(rest))),
            "term" => Ok(Scope::Term(rest.to_string())),
            "terms" => {
                let (from, to) = rest.split_once("..").ok_or_else(bad)?;
                if from.is_empty() || to.is_empty() || from > to {
                    return Err(bad());
                }
                Ok(Scope::Terms {
                    from: from.to_string(),
                    to: to.to_string(),
                })
            }
            _ => Err(bad()),
        }
    }
}

impl Serialize for Scope {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Scope {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
