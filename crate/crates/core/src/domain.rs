//! Account, curriculum, class, rubric and skill operations.
//!
//! Each operation is a pure function of a state snapshot and the acting
//! user. It checks permissions and validates input, then returns the ops to
//! commit together with the value the caller gets back. Nothing here
//! touches the store.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::access::{require, Action, Resource};
use crate::credential::PasswordHash;
use crate::error::{DomainError, Result};
use crate::model::*;
use crate::settings::Settings;
use crate::state::{Op, State};

/// Ops to commit plus the caller-facing result.
#[derive(Debug, Clone, PartialEq)]
pub struct Planned<T> {
    pub ops: Vec<Op>,
    pub output: T,
}

impl<T> Planned<T> {
    pub fn new(ops: Vec<Op>, output: T) -> Self {
        Self { ops, output }
    }
}

/// `prefix` followed by the first free four-digit sequence number after
/// `count`.
pub(crate) fn fresh_id(prefix: &str, count: usize, taken: impl Fn(&str) -> bool) -> String {
    (count + 1..)
        .map(|n| format!("{prefix}{n:04}"))
        .find(|id| !taken(id))
        .expect("unbounded id space")
}

// ---------------------------------------------------------------------------
// Accounts
// ---------------------------------------------------------------------------

pub fn create_user(
    state: &State,
    actor: &Actor,
    display_name: &str,
    role: Role,
    email: Option<String>,
    password_hash: PasswordHash,
) -> Result<Planned<UserAccount>> {
    require(state, actor, Action::CreateUser, &Resource::None)?;
    let account = UserAccount {
        user_id: UserId(fresh_id("U", state.users.len(), |id| {
            state.users.contains_key(id)
        })),
        display_name: display_name.trim().to_string(),
        role,
        email,
        active: true,
    };
    let op = Op::CreateUser(UserRecord {
        account: account.clone(),
        password_hash: Some(password_hash),
    });
    state.validate(&op)?;
    Ok(Planned::new(vec![op], account))
}

/// Sets a new password and/or the active flag. Activating an account that
/// has never had a password is rejected.
pub fn update_user(
    state: &State,
    actor: &Actor,
    user_id: &UserId,
    password_hash: Option<PasswordHash>,
    active: Option<bool>,
) -> Result<Planned<UserAccount>> {
    require(
        state,
        actor,
        Action::UpdateUser,
        &Resource::Student(user_id.clone()),
    )?;
    let user = state.user(user_id)?;
    let active = active.unwrap_or(user.account.active);
    if active && password_hash.is_none() && user.password_hash.is_none() {
        return Err(DomainError::Validation(
            "an account needs a password before it can be activated".into(),
        ));
    }
    let op = Op::UpdateUser {
        user_id: user_id.clone(),
        password_hash,
        active,
    };
    state.validate(&op)?;
    let mut account = user.account.clone();
    account.active = active;
    Ok(Planned::new(vec![op], account))
}

// ---------------------------------------------------------------------------
// Curriculum
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutcomeUpsert {
    pub outcome: ProgramOutcome,
    pub created: bool,
}

/// Creates or updates the outcome identified by `(code, curriculum_version)`.
pub fn upsert_program_outcome(
    state: &State,
    actor: &Actor,
    code: &str,
    graduate_attribute: &str,
    curriculum_version: &str,
    active: Option<bool>,
) -> Result<Planned<OutcomeUpsert>> {
    require(state, actor, Action::UpsertOutcome, &Resource::None)?;
    let key = (
        OutcomeCode::new(code.trim()),
        curriculum_version.trim().to_string(),
    );
    let existing = state.outcomes.get(&key);
    let outcome = ProgramOutcome {
        outcome_code: key.0.clone(),
        graduate_attribute: graduate_attribute.trim().to_string(),
        curriculum_version: key.1.clone(),
        active: active.unwrap_or_else(|| existing.is_none_or(|o| o.active)),
    };
    let op = Op::PutOutcome(outcome.clone());
    state.validate(&op)?;
    Ok(Planned::new(
        vec![op],
        OutcomeUpsert {
            outcome,
            created: existing.is_none(),
        },
    ))
}

pub fn create_course(
    state: &State,
    actor: &Actor,
    code: &str,
    title: &str,
    units: f64,
) -> Result<Planned<Course>> {
    require(state, actor, Action::CreateCourse, &Resource::None)?;
    let course = Course {
        course_code: CourseCode::new(code.trim()),
        title: title.trim().to_string(),
        units,
    };
    let op = Op::CreateCourse(course.clone());
    state.validate(&op)?;
    Ok(Planned::new(vec![op], course))
}

// ---------------------------------------------------------------------------
// Classes
// ---------------------------------------------------------------------------

pub fn create_class_section(
    state: &State,
    actor: &Actor,
    course: &CourseCode,
    term: &str,
    instructor: &UserId,
) -> Result<Planned<ClassSection>> {
    require(
        state,
        actor,
        Action::CreateClass,
        &Resource::Instructor(instructor.clone()),
    )?;
    let class = ClassSection {
        class_id: ClassId(fresh_id("C", state.classes.len(), |id| {
            state.classes.contains_key(id)
        })),
        course_code: course.clone(),
        term: term.trim().to_string(),
        instructor_id: instructor.clone(),
        roster: Default::default(),
    };
    let op = Op::CreateClass(class.clone());
    state.validate(&op)?;
    Ok(Planned::new(vec![op], class))
}

/// Returns the roster size after enrolment.
pub fn enroll_student(
    state: &State,
    actor: &Actor,
    class_id: &ClassId,
    student: &UserId,
) -> Result<Planned<usize>> {
    require(
        state,
        actor,
        Action::Enroll,
        &Resource::Class(class_id.clone()),
    )?;
    let class = state.class(class_id)?;
    let op = Op::Enroll {
        class_id: class_id.clone(),
        student_id: student.clone(),
    };
    state.validate(&op)?;
    Ok(Planned::new(vec![op], class.roster.len() + 1))
}

// ---------------------------------------------------------------------------
// Rubrics and evaluations
// ---------------------------------------------------------------------------

/// Rubrics are immutable once stored; a revision is a new rubric.
pub fn define_rubric(
    state: &State,
    actor: &Actor,
    title: &str,
    criteria: Vec<Criterion>,
) -> Result<Planned<Rubric>> {
    require(state, actor, Action::DefineRubric, &Resource::None)?;
    let rubric = Rubric {
        rubric_id: RubricId(fresh_id("R", state.rubrics.len(), |id| {
            state.rubrics.contains_key(id)
        })),
        title: title.trim().to_string(),
        criteria,
    };
    let op = Op::CreateRubric(rubric.clone());
    state.validate(&op)?;
    Ok(Planned::new(vec![op], rubric))
}

pub fn record_evaluation(
    state: &State,
    actor: &Actor,
    class_id: &ClassId,
    rubric_id: &RubricId,
    student: &UserId,
    levels: BTreeMap<CriterionId, i64>,
    now: Timestamp,
) -> Result<Planned<EvaluationRecord>> {
    require(
        state,
        actor,
        Action::RecordEvaluation,
        &Resource::Class(class_id.clone()),
    )?;
    let record = EvaluationRecord {
        evaluation_id: EvaluationId(fresh_id("EV", state.evaluations.len(), |id| {
            state.evaluations.contains_key(id)
        })),
        class_id: class_id.clone(),
        rubric_id: rubric_id.clone(),
        student_id: student.clone(),
        levels,
        evaluator_id: actor.user_id.clone(),
        recorded_at: now,
    };
    let op = Op::RecordEvaluation(record.clone());
    state.validate(&op)?;
    Ok(Planned::new(vec![op], record))
}

// ---------------------------------------------------------------------------
// Skills
// ---------------------------------------------------------------------------

pub fn create_skill(
    state: &State,
    actor: &Actor,
    name: &str,
    course: &CourseCode,
) -> Result<Planned<Skill>> {
    require(state, actor, Action::CreateSkill, &Resource::None)?;
    let skill = Skill {
        skill_id: SkillId(fresh_id("SK", state.skills.len(), |id| {
            state.skills.contains_key(id)
        })),
        name: name.trim().to_string(),
        course_code: course.clone(),
    };
    let op = Op::CreateSkill(skill.clone());
    state.validate(&op)?;
    Ok(Planned::new(vec![op], skill))
}

/// Appends a rating; the newest rating per (student, skill, class) is the
/// effective one and older ones stay in the history.
pub fn record_skill_rating(
    state: &State,
    actor: &Actor,
    student: &UserId,
    skill: &SkillId,
    class_id: &ClassId,
    score: f64,
    now: Timestamp,
) -> Result<Planned<SkillRating>> {
    require(
        state,
        actor,
        Action::RecordSkillRating,
        &Resource::Class(class_id.clone()),
    )?;
    let rating = SkillRating {
        student_id: student.clone(),
        skill_id: skill.clone(),
        class_id: class_id.clone(),
        score,
        recorded_at: now,
    };
    let op = Op::RateSkill(rating.clone());
    state.validate(&op)?;
    Ok(Planned::new(vec![op], rating))
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SkillFilter {
    #[serde(default)]
    pub course: Option<CourseCode>,
    #[serde(default, rename = "class")]
    pub class_id: Option<ClassId>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudentSkill {
    pub skill_id: SkillId,
    pub skill_name: String,
    pub course_code: CourseCode,
    pub class_id: ClassId,
    pub score: f64,
    pub recorded_at: Timestamp,
}

/// Effective ratings for one student, sorted by skill name.
pub fn query_student_skills(
    state: &State,
    actor: &Actor,
    student: &UserId,
    filter: &SkillFilter,
) -> Result<Vec<StudentSkill>> {
    require(
        state,
        actor,
        Action::ReadStudentSkills,
        &Resource::Student(student.clone()),
    )?;
    let mut out: Vec<StudentSkill> = state
        .skill_ratings
        .values()
        .filter(|r| &r.student_id == student)
        .filter(|r| filter.class_id.as_ref().is_none_or(|c| c == &r.class_id))
        .filter_map(|r| {
            let skill = state.skills.get(&r.skill_id)?;
            if filter
                .course
                .as_ref()
                .is_some_and(|c| c != &skill.course_code)
            {
                return None;
            }
            Some(StudentSkill {
                skill_id: skill.skill_id.clone(),
                skill_name: skill.name.clone(),
                course_code: skill.course_code.clone(),
                class_id: r.class_id.clone(),
                score: r.score,
                recorded_at: r.recorded_at,
            })
        })
        .collect();
    out.sort_by(|a, b| {
        a.skill_name
            .cmp(&b.skill_name)
            .then_with(|| a.class_id.cmp(&b.class_id))
    });
    Ok(out)
}

// ---------------------------------------------------------------------------
// Settings
// ---------------------------------------------------------------------------

pub fn put_settings(state: &State, actor: &Actor, settings: Settings) -> Result<Planned<Settings>> {
    require(state, actor, Action::WriteSettings, &Resource::None)?;
    let op = Op::PutSettings(settings.clone());
    state.validate(&op)?;
    Ok(Planned::new(vec![op], settings))
}
