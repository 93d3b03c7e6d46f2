//! Role-based permission matrix with ownership qualifiers.
//!
//! Department heads may do everything. Instructors may act on classes they
//! teach and read students enrolled in them. Students only read their own
//! records and the public catalogs (outcomes, courses, skills).

use serde::Serialize;

use crate::error::{DomainError, Result};
use crate::model::{Actor, ClassId, Role, UserId};
use crate::scope::Scope;
use crate::state::State;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Action {
    CreateUser,
    UpdateUser,
    ListOutcomes,
    UpsertOutcome,
    ListCourses,
    CreateCourse,
    ListClasses,
    CreateClass,
    Enroll,
    ImportRoster,
    DefineGradeComponents,
    AddGradeItem,
    RecordScore,
    ImportScores,
    ReadGradebook,
    ListRubrics,
    DefineRubric,
    RecordEvaluation,
    ListSkills,
    CreateSkill,
    RecordSkillRating,
    ReadStudentSkills,
    ReadSkillsSummary,
    ReadAttainment,
    ReadDistribution,
    ReadRollup,
    ReadTrend,
    ReadStudentAttainment,
    ExportReport,
    ReadSettings,
    WriteSettings,
}

impl Action {
    pub const ALL: [Action; 31] = [
        Action::CreateUser,
        Action::UpdateUser,
        Action::ListOutcomes,
        Action::UpsertOutcome,
        Action::ListCourses,
        Action::CreateCourse,
        Action::ListClasses,
        Action::CreateClass,
        Action::Enroll,
        Action::ImportRoster,
        Action::DefineGradeComponents,
        Action::AddGradeItem,
        Action::RecordScore,
        Action::ImportScores,
        Action::ReadGradebook,
        Action::ListRubrics,
        Action::DefineRubric,
        Action::RecordEvaluation,
        Action::ListSkills,
        Action::CreateSkill,
        Action::RecordSkillRating,
        Action::ReadStudentSkills,
        Action::ReadSkillsSummary,
        Action::ReadAttainment,
        Action::ReadDistribution,
        Action::ReadRollup,
        Action::ReadTrend,
        Action::ReadStudentAttainment,
        Action::ExportReport,
        Action::ReadSettings,
        Action::WriteSettings,
    ];

    pub fn is_mutating(self) -> bool {
        use Action::*;
        matches!(
            self,
            CreateUser
                | UpdateUser
                | UpsertOutcome
                | CreateCourse
                | CreateClass
                | Enroll
                | ImportRoster
                | DefineGradeComponents
                | AddGradeItem
                | RecordScore
                | ImportScores
                | DefineRubric
                | RecordEvaluation
                | CreateSkill
                | RecordSkillRating
                | WriteSettings
        )
    }
}

/// Matrix cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Rule {
    Allow,
    Deny,
    /// The resource is a class the actor teaches.
    OwnClass,
    /// The resource is the actor's own student record.
    OwnRecord,
    /// The resource is a student enrolled in a class the actor teaches.
    OwnStudent,
    /// The actor is the instructor named in the request.
    NamedInstructor,
}

pub fn rule(role: Role, action: Action) -> Rule {
    use Action::*;
    match role {
        Role::DepartmentHead => Rule::Allow,
        Role::Instructor => match action {
            ListOutcomes | ListCourses | ListClasses | ListRubrics | DefineRubric | ListSkills
            | CreateSkill => Rule::Allow,
            CreateClass => Rule::NamedInstructor,
            Enroll
            | ImportRoster
            | DefineGradeComponents
            | AddGradeItem
            | RecordScore
            | ImportScores
            | ReadGradebook
            | RecordEvaluation
            | RecordSkillRating
            | ReadSkillsSummary
            | ReadAttainment
            | ReadDistribution
            | ExportReport => Rule::OwnClass,
            ReadStudentSkills | ReadStudentAttainment => Rule::OwnStudent,
            CreateUser | UpdateUser | UpsertOutcome | CreateCourse | ReadRollup | ReadTrend
            | ReadSettings | WriteSettings => Rule::Deny,
        },
        Role::Student => match action {
            ListOutcomes | ListCourses | ListSkills => Rule::Allow,
            ReadStudentSkills | ReadStudentAttainment | ReadAttainment => Rule::OwnRecord,
            _ => Rule::Deny,
        },
    }
}

/// What a request touches, for resolving ownership qualifiers.
#[derive(Debug, Clone, PartialEq)]
pub enum Resource {
    None,
    Class(ClassId),
    Student(UserId),
    Instructor(UserId),
    Scope(Scope),
    StudentInScope(UserId, Scope),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "decision", content = "reason", rename_all = "snake_case")]
pub enum Decision {
    Allow,
    Deny(String),
}

impl Decision {
    pub fn is_allow(&self) -> bool {
        matches!(self, Decision::Allow)
    }
}

pub fn decide(state: &State, actor: &Actor, action: Action, resource: &Resource) -> Decision {
    let deny = |why: &str| Decision::Deny(format!("{} may not {why}", actor.role));
    let teaches = |class: &ClassId| {
        state
            .classes
            .get(class)
            .is_some_and(|c| c.instructor_id == actor.user_id)
    };
    match rule(actor.role, action) {
        Rule::Allow => Decision::Allow,
        Rule::Deny => deny(&format!("{action:?}")),
        Rule::OwnClass => {
            let class = match resource {
                Resource::Class(c) => Some(c),
                Resource::Scope(s) | Resource::StudentInScope(_, s) => s.class_id(),
                _ => None,
            };
            match class {
                Some(c) if teaches(c) => Decision::Allow,
                _ => deny("act outside their own classes"),
            }
        }
        Rule::OwnRecord => match resource {
            Resource::Student(s) | Resource::StudentInScope(s, _) if s == &actor.user_id => {
                Decision::Allow
            }
            _ => deny("read another student's records"),
        },
        Rule::OwnStudent => match resource {
            Resource::Student(s) | Resource::StudentInScope(s, _)
                if state
                    .classes
                    .values()
                    .any(|c| c.instructor_id == actor.user_id && c.roster.contains(s)) =>
            {
                Decision::Allow
            }
            _ => deny("read students outside their classes"),
        },
        Rule::NamedInstructor => match resource {
            Resource::Instructor(u) if u == &actor.user_id => Decision::Allow,
            _ => deny("act for another instructor"),
        },
    }
}

pub fn require(state: &State, actor: &Actor, action: Action, resource: &Resource) -> Result<()> {
    match decide(state, actor, action, resource) {
        Decision::Allow => Ok(()),
        Decision::Deny(reason) => Err(DomainError::forbidden(reason)),
    }
}
