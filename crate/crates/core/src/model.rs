//! Entities shared by every part of the system.
//!
//! Identifiers are string newtypes so that a class id can never be passed
//! where a user id is expected. All timestamps are UTC.

use std::borrow::Borrow;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

pub type Timestamp = DateTime<Utc>;

macro_rules! string_id {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        #[serde(transparent)]
        pub struct $name(pub String);

        impl $name {
            pub fn new(s: impl Into<String>) -> Self {
                Self(s.into())
            }

            pub fn as_str(&self) -> &str {
                &self.0
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl From<&str> for $name {
            fn from(s: &str) -> Self {
                Self(s.to_string())
            }
        }

        impl From<String> for $name {
            fn from(s: String) -> Self {
                Self(s)
            }
        }

        impl Borrow<str> for $name {
            fn borrow(&self) -> &str {
                &self.0
            }
        }
    };
}

string_id!(UserId);
string_id!(CourseCode);
string_id!(ClassId);
string_id!(OutcomeCode);
string_id!(RubricId);
string_id!(CriterionId);
string_id!(SkillId);
string_id!(ComponentId);
string_id!(ItemId);
string_id!(EvaluationId);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    DepartmentHead,
    Instructor,
    Student,
}

impl Role {
    pub const ALL: [Role; 3] = [Role::DepartmentHead, Role::Instructor, Role::Student];

    pub fn as_str(self) -> &'static str {
        match self {
            Role::DepartmentHead => "department_head",
            Role::Instructor => "instructor",
            Role::Student => "student",
        }
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Public view of an account. The credential lives beside it in
/// [`UserRecord`] and has no serialized form here.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UserAccount {
    pub user_id: UserId,
    pub display_name: String,
    pub role: Role,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub email: Option<String>,
    pub active: bool,
}

/// Stored form of an account: the public view plus the password hash.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UserRecord {
    pub account: UserAccount,
    pub password_hash: Option<crate::credential::PasswordHash>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProgramOutcome {
    pub outcome_code: OutcomeCode,
    pub graduate_attribute: String,
    pub curriculum_version: String,
    pub active: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Course {
    pub course_code: CourseCode,
    pub title: String,
    pub units: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassSection {
    pub class_id: ClassId,
    pub course_code: CourseCode,
    pub term: String,
    pub instructor_id: UserId,
    pub roster: BTreeSet<UserId>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutcomeMapping {
    pub outcome_code: OutcomeCode,
    pub map_weight: f64,
}

fn default_min_level() -> i64 {
    1
}

fn default_max_level() -> i64 {
    4
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Criterion {
    pub criterion_id: CriterionId,
    pub description: String,
    #[serde(default = "default_min_level")]
    pub min_level: i64,
    #[serde(default = "default_max_level")]
    pub max_level: i64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub level_descriptors: Vec<String>,
    pub weight: f64,
    pub mappings: Vec<OutcomeMapping>,
}

impl Criterion {
    /// Map weight for `code`, if this criterion maps onto it.
    pub fn mapping_for(&self, code: &OutcomeCode) -> Option<f64> {
        self.mappings
            .iter()
            .find(|m| &m.outcome_code == code)
            .map(|m| m.map_weight)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Rubric {
    pub rubric_id: RubricId,
    pub title: String,
    pub criteria: Vec<Criterion>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationRecord {
    pub evaluation_id: EvaluationId,
    pub class_id: ClassId,
    pub rubric_id: RubricId,
    pub student_id: UserId,
    pub levels: BTreeMap<CriterionId, i64>,
    pub evaluator_id: UserId,
    pub recorded_at: Timestamp,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Skill {
    pub skill_id: SkillId,
    pub name: String,
    pub course_code: CourseCode,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkillRating {
    pub student_id: UserId,
    pub skill_id: SkillId,
    pub class_id: ClassId,
    pub score: f64,
    pub recorded_at: Timestamp,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradeComponent {
    pub component_id: ComponentId,
    pub class_id: ClassId,
    pub name: String,
    pub weight: f64,
    /// Components dropped by a later redefinition stay stored but inactive.
    pub active: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradeItem {
    pub item_id: ItemId,
    pub component_id: ComponentId,
    pub title: String,
    pub max_points: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreEntry {
    pub student_id: UserId,
    pub item_id: ItemId,
    pub raw_score: f64,
    pub recorded_at: Timestamp,
}

/// Who is performing an operation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Actor {
    pub user_id: UserId,
    pub role: Role,
}

impl Actor {
    pub fn new(user_id: impl Into<UserId>, role: Role) -> Self {
        Self {
            user_id: user_id.into(),
            role,
        }
    }

    /// Principal used by the operator CLI. Holds department-head authority.
    pub fn operator() -> Self {
        Self::new("operator", Role::DepartmentHead)
    }
}
