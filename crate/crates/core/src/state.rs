//! The in-memory state image and the mutation vocabulary applied to it.
//!
//! Every change reaches the state as an [`Op`]. `validate` checks the op
//! against the current state (referential integrity and entity
//! invariants) without mutating anything; `apply` validates and then
//! mutates. Ops carry fully resolved ids and timestamps, so replaying a
//! journal reproduces the same state.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::credential::PasswordHash;
use crate::error::{DomainError, Result};
use crate::model::*;
use crate::settings::Settings;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum Op {
    CreateUser(UserRecord),
    UpdateUser {
        user_id: UserId,
        password_hash: Option<PasswordHash>,
        active: bool,
    },
    PutOutcome(ProgramOutcome),
    CreateCourse(Course),
    CreateClass(ClassSection),
    Enroll {
        class_id: ClassId,
        student_id: UserId,
    },
    CreateRubric(Rubric),
    CreateSkill(Skill),
    RateSkill(SkillRating),
    SetComponents {
        class_id: ClassId,
        components: Vec<GradeComponent>,
    },
    CreateItem(GradeItem),
    RecordScore(ScoreEntry),
    RecordEvaluation(EvaluationRecord),
    PutSettings(Settings),
}

impl Op {
    /// Entity keys written by this op, used for optimistic conflict checks.
    pub fn touched_keys(&self) -> Vec<String> {
        match self {
            Op::CreateUser(u) => vec![format!("user:{}", u.account.user_id)],
            Op::UpdateUser { user_id, .. } => vec![format!("user:{user_id}")],
            Op::PutOutcome(o) => vec![format!(
                "outcome:{}@{}",
                o.outcome_code, o.curriculum_version
            )],
            Op::CreateCourse(c) => vec![format!("course:{}", c.course_code)],
            Op::CreateClass(c) => vec![format!("class:{}", c.class_id)],
            Op::Enroll {
                class_id,
                student_id,
            } => vec![format!("enroll:{class_id}:{student_id}")],
            Op::CreateRubric(r) => vec![format!("rubric:{}", r.rubric_id)],
            Op::CreateSkill(s) => vec![
                format!("skill:{}", s.skill_id),
                format!("skill-name:{}:{}", s.course_code, s.name.trim()),
            ],
            Op::RateSkill(r) => vec![format!(
                "rating:{}:{}:{}",
                r.student_id, r.skill_id, r.class_id
            )],
            Op::SetComponents {
                class_id,
                components,
            } => std::iter::once(format!("components:{class_id}"))
                .chain(
                    components
                        .iter()
                        .map(|c| format!("component:{}", c.component_id)),
                )
                .collect(),
            Op::CreateItem(i) => vec![format!("item:{}", i.item_id)],
            Op::RecordScore(s) => vec![format!("score:{}:{}", s.student_id, s.item_id)],
            Op::RecordEvaluation(e) => vec![format!("evaluation:{}", e.evaluation_id)],
            Op::PutSettings(_) => vec!["settings".to_string()],
        }
    }
}

pub type OutcomeKey = (OutcomeCode, String);

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(from = "StateImage", into = "StateImage")]
pub struct State {
    pub settings: Settings,
    pub users: BTreeMap<UserId, UserRecord>,
    pub outcomes: BTreeMap<OutcomeKey, ProgramOutcome>,
    pub courses: BTreeMap<CourseCode, Course>,
    pub classes: BTreeMap<ClassId, ClassSection>,
    pub rubrics: BTreeMap<RubricId, Rubric>,
    pub skills: BTreeMap<SkillId, Skill>,
    /// Every rating ever recorded, in commit order.
    pub skill_rating_history: Vec<SkillRating>,
    /// Latest rating per (student, skill, class).
    pub skill_ratings: BTreeMap<(UserId, SkillId, ClassId), SkillRating>,
    pub components: BTreeMap<ComponentId, GradeComponent>,
    pub items: BTreeMap<ItemId, GradeItem>,
    pub score_history: Vec<ScoreEntry>,
    /// Latest score per (student, item).
    pub scores: BTreeMap<(UserId, ItemId), ScoreEntry>,
    pub evaluations: BTreeMap<EvaluationId, EvaluationRecord>,
}

/// Flat serialized form; the keyed indexes are rebuilt on load.
#[derive(Serialize, Deserialize)]
struct StateImage {
    settings: Settings,
    users: Vec<UserRecord>,
    outcomes: Vec<ProgramOutcome>,
    courses: Vec<Course>,
    classes: Vec<ClassSection>,
    rubrics: Vec<Rubric>,
    skills: Vec<Skill>,
    skill_ratings: Vec<SkillRating>,
    components: Vec<GradeComponent>,
    items: Vec<GradeItem>,
    scores: Vec<ScoreEntry>,
    evaluations: Vec<EvaluationRecord>,
}

impl From<State> for StateImage {
    fn from(s: State) -> Self {
        Self {
            settings: s.settings,
            users: s.users.into_values().collect(),
            outcomes: s.outcomes.into_values().collect(),
            courses: s.courses.into_values().collect(),
            classes: s.classes.into_values().collect(),
            rubrics: s.rubrics.into_values().collect(),
            skills: s.skills.into_values().collect(),
            skill_ratings: s.skill_rating_history,
            components: s.components.into_values().collect(),
            items: s.items.into_values().collect(),
            scores: s.score_history,
            evaluations: s.evaluations.into_values().collect(),
        }
    }
}

impl From<StateImage> for State {
    fn from(img: StateImage) -> Self {
        let mut s = State {
            settings: img.settings,
            ..State::default()
        };
        s.users = img
            .users
            .into_iter()
            .map(|u| (u.account.user_id.clone(), u))
            .collect();
        s.outcomes = img
            .outcomes
            .into_iter()
            .map(|o| ((o.outcome_code.clone(), o.curriculum_version.clone()), o))
            .collect();
        s.courses = img
            .courses
            .into_iter()
            .map(|c| (c.course_code.clone(), c))
            .collect();
        s.classes = img
            .classes
            .into_iter()
            .map(|c| (c.class_id.clone(), c))
            .collect();
        s.rubrics = img
            .rubrics
            .into_iter()
            .map(|r| (r.rubric_id.clone(), r))
            .collect();
        s.skills = img
            .skills
            .into_iter()
            .map(|k| (k.skill_id.clone(), k))
            .collect();
        for r in img.skill_ratings {
            s.index_rating(r);
        }
        s.components = img
            .components
            .into_iter()
            .map(|c| (c.component_id.clone(), c))
            .collect();
        s.items = img
            .items
            .into_iter()
            .map(|i| (i.item_id.clone(), i))
            .collect();
        for e in img.scores {
            s.index_score(e);
        }
        s.evaluations = img
            .evaluations
            .into_iter()
            .map(|e| (e.evaluation_id.clone(), e))
            .collect();
        s
    }
}

impl State {
    pub fn with_settings(settings: Settings) -> Self {
        Self {
            settings,
            ..Self::default()
        }
    }

    pub fn apply(&mut self, op: &Op) -> Result<()> {
        self.validate(op)?;
        self.apply_unchecked(op.clone());
        Ok(())
    }

    pub fn validate(&self, op: &Op) -> Result<()> {
        match op {
            Op::CreateUser(u) => {
                let id = &u.account.user_id;
                if id.as_str().trim().is_empty() {
                    return Err(DomainError::Validation("user id must not be empty".into()));
                }
                if self.users.contains_key(id) {
                    return Err(DomainError::DuplicateCode(id.to_string()));
                }
                require_text(&u.account.display_name, "display name")
            }
            Op::UpdateUser { user_id, .. } => self.user(user_id).map(|_| ()),
            Op::PutOutcome(o) => {
                require_text(o.outcome_code.as_str(), "outcome code")?;
                require_text(&o.curriculum_version, "curriculum version")?;
                if o.graduate_attribute.trim().is_empty() {
                    return Err(DomainError::EmptyAttribute);
                }
                Ok(())
            }
            Op::CreateCourse(c) => {
                require_text(c.course_code.as_str(), "course code")?;
                if self.courses.contains_key(&c.course_code) {
                    return Err(DomainError::DuplicateCode(c.course_code.to_string()));
                }
                require_text(&c.title, "title")?;
                if !(c.units.is_finite() && c.units >= 0.0) {
                    return Err(DomainError::Validation("units must be non-negative".into()));
                }
                Ok(())
            }
            Op::CreateClass(c) => {
                if self.classes.contains_key(&c.class_id) {
                    return Err(DomainError::DuplicateCode(c.class_id.to_string()));
                }
                self.course(&c.course_code)?;
                require_text(&c.term, "term")?;
                self.require_role(&c.instructor_id, Role::Instructor)?;
                for s in &c.roster {
                    self.require_role(s, Role::Student)?;
                }
                Ok(())
            }
            Op::Enroll {
                class_id,
                student_id,
            } => {
                let class = self.class(class_id)?;
                self.require_role(student_id, Role::Student)?;
                if class.roster.contains(student_id) {
                    return Err(DomainError::AlreadyEnrolled(student_id.to_string()));
                }
                Ok(())
            }
            Op::CreateRubric(r) => {
                if self.rubrics.contains_key(&r.rubric_id) {
                    return Err(DomainError::DuplicateCode(r.rubric_id.to_string()));
                }
                self.validate_rubric(r)
            }
            Op::CreateSkill(k) => {
                if self.skills.contains_key(&k.skill_id) {
                    return Err(DomainError::DuplicateCode(k.skill_id.to_string()));
                }
                require_text(&k.name, "skill name")?;
                self.course(&k.course_code)?;
                let name = k.name.trim();
                if self
                    .skills
                    .values()
                    .any(|s| s.course_code == k.course_code && s.name.trim() == name)
                {
                    return Err(DomainError::DuplicateSkill(name.to_string()));
                }
                Ok(())
            }
            Op::RateSkill(r) => {
                let skill = self.skill(&r.skill_id)?;
                let class = self.class(&r.class_id)?;
                if skill.course_code != class.course_code {
                    return Err(DomainError::Validation(format!(
                        "skill `{}` belongs to course {}, class is {}",
                        skill.skill_id, skill.course_code, class.course_code
                    )));
                }
                if !class.roster.contains(&r.student_id) {
                    return Err(DomainError::NotEnrolled(r.student_id.to_string()));
                }
                if !(0.0..=100.0).contains(&r.score) {
                    return Err(DomainError::OutOfRange(format!("skill score {}", r.score)));
                }
                Ok(())
            }
            Op::SetComponents {
                class_id,
                components,
            } => self.validate_components(class_id, components),
            Op::CreateItem(i) => {
                if self.items.contains_key(&i.item_id) {
                    return Err(DomainError::DuplicateCode(i.item_id.to_string()));
                }
                let comp = self.component(&i.component_id)?;
                if !comp.active {
                    return Err(DomainError::UnknownComponent(i.component_id.to_string()));
                }
                require_text(&i.title, "item title")?;
                if !(i.max_points.is_finite() && i.max_points > 0.0) {
                    return Err(DomainError::Validation(
                        "max_points must be positive".into(),
                    ));
                }
                Ok(())
            }
            Op::RecordScore(e) => {
                let item = self.item(&e.item_id)?;
                let comp = self.component(&item.component_id)?;
                if !comp.active {
                    return Err(DomainError::UnknownItem(e.item_id.to_string()));
                }
                let class = self.class(&comp.class_id)?;
                if !class.roster.contains(&e.student_id) {
                    return Err(DomainError::NotEnrolled(e.student_id.to_string()));
                }
                if !(e.raw_score >= 0.0 && e.raw_score <= item.max_points) {
                    return Err(DomainError::OutOfRange(format!(
                        "raw score {} (max {})",
                        e.raw_score, item.max_points
                    )));
                }
                Ok(())
            }
            Op::RecordEvaluation(e) => {
                if self.evaluations.contains_key(&e.evaluation_id) {
                    return Err(DomainError::DuplicateCode(e.evaluation_id.to_string()));
                }
                let class = self.class(&e.class_id)?;
                let rubric = self.rubric(&e.rubric_id)?;
                self.user(&e.evaluator_id)?;
                if !class.roster.contains(&e.student_id) {
                    return Err(DomainError::NotEnrolled(e.student_id.to_string()));
                }
                check_levels(rubric, &e.levels)
            }
            Op::PutSettings(s) => s.validate(),
        }
    }

    fn apply_unchecked(&mut self, op: Op) {
        match op {
            Op::CreateUser(u) => {
                self.users.insert(u.account.user_id.clone(), u);
            }
            Op::UpdateUser {
                user_id,
                password_hash,
                active,
            } => {
                if let Some(u) = self.users.get_mut(&user_id) {
                    if password_hash.is_some() {
                        u.password_hash = password_hash;
                    }
                    u.account.active = active;
                }
            }
            Op::PutOutcome(o) => {
                self.outcomes
                    .insert((o.outcome_code.clone(), o.curriculum_version.clone()), o);
            }
            Op::CreateCourse(c) => {
                self.courses.insert(c.course_code.clone(), c);
            }
            Op::CreateClass(c) => {
                self.classes.insert(c.class_id.clone(), c);
            }
            Op::Enroll {
                class_id,
                student_id,
            } => {
                if let Some(c) = self.classes.get_mut(&class_id) {
                    c.roster.insert(student_id);
                }
            }
            Op::CreateRubric(r) => {
                self.rubrics.insert(r.rubric_id.clone(), r);
            }
            Op::CreateSkill(k) => {
                self.skills.insert(k.skill_id.clone(), k);
            }
            Op::RateSkill(r) => self.index_rating(r),
            Op::SetComponents { components, .. } => {
                for c in components {
                    self.components.insert(c.component_id.clone(), c);
                }
            }
            Op::CreateItem(i) => {
                self.items.insert(i.item_id.clone(), i);
            }
            Op::RecordScore(e) => self.index_score(e),
            Op::RecordEvaluation(e) => {
                self.evaluations.insert(e.evaluation_id.clone(), e);
            }
            Op::PutSettings(s) => self.settings = s,
        }
    }

    fn index_rating(&mut self, r: SkillRating) {
        self.skill_ratings.insert(
            (r.student_id.clone(), r.skill_id.clone(), r.class_id.clone()),
            r.clone(),
        );
        self.skill_rating_history.push(r);
    }

    fn index_score(&mut self, e: ScoreEntry) {
        self.scores
            .insert((e.student_id.clone(), e.item_id.clone()), e.clone());
        self.score_history.push(e);
    }

    pub fn validate_rubric(&self, r: &Rubric) -> Result<()> {
        require_text(&r.title, "rubric title")?;
        if r.criteria.is_empty() {
            return Err(DomainError::EmptyCriteria);
        }
        let mut seen = BTreeSet::new();
        for c in &r.criteria {
            let id = c.criterion_id.to_string();
            require_text(&id, "criterion id")?;
            if !seen.insert(&c.criterion_id) {
                return Err(DomainError::Validation(format!(
                    "duplicate criterion `{id}`"
                )));
            }
            if c.max_level < c.min_level + 1 {
                return Err(DomainError::BadLevelRange(id));
            }
            if !(c.weight.is_finite() && c.weight > 0.0) {
                return Err(DomainError::NonPositiveWeight);
            }
            if !c.level_descriptors.is_empty()
                && c.level_descriptors.len() as i64 != c.max_level - c.min_level + 1
            {
                return Err(DomainError::Validation(format!(
                    "criterion `{id}` needs one descriptor per level"
                )));
            }
            if c.mappings.is_empty() {
                return Err(DomainError::UnmappedCriterion(id));
            }
            let mut codes = BTreeSet::new();
            for m in &c.mappings {
                if !(m.map_weight.is_finite() && m.map_weight > 0.0) {
                    return Err(DomainError::NonPositiveWeight);
                }
                if !self.outcome_code_exists(&m.outcome_code) {
                    return Err(DomainError::UnknownOutcome(m.outcome_code.to_string()));
                }
                if !codes.insert(&m.outcome_code) {
                    return Err(DomainError::Validation(format!(
                        "criterion `{id}` maps `{}` twice",
                        m.outcome_code
                    )));
                }
            }
        }
        Ok(())
    }

    fn validate_components(&self, class_id: &ClassId, components: &[GradeComponent]) -> Result<()> {
        self.class(class_id)?;
        let mut ids = BTreeSet::new();
        let mut names = BTreeSet::new();
        for c in components {
            if &c.class_id != class_id {
                return Err(DomainError::Validation(format!(
                    "component `{}` belongs to another class",
                    c.component_id
                )));
            }
            if !ids.insert(&c.component_id) {
                return Err(DomainError::Validation(format!(
                    "duplicate component `{}`",
                    c.component_id
                )));
            }
            if let Some(existing) = self.components.get(&c.component_id) {
                if &existing.class_id != class_id {
                    return Err(DomainError::DuplicateCode(c.component_id.to_string()));
                }
            }
            if c.active {
                require_text(&c.name, "component name")?;
                if !(c.weight > 0.0 && c.weight <= 1.0) {
                    return Err(DomainError::OutOfRange(format!(
                        "component weight {} (expected (0, 1])",
                        c.weight
                    )));
                }
                if !names.insert(c.name.trim()) {
                    return Err(DomainError::Validation(format!(
                        "duplicate component name `{}`",
                        c.name
                    )));
                }
            }
        }
        // Redefinition archives components; it never drops them.
        for existing in self.components.values() {
            if &existing.class_id == class_id && !ids.contains(&existing.component_id) {
                return Err(DomainError::Validation(format!(
                    "component `{}` missing from redefinition",
                    existing.component_id
                )));
            }
        }
        Ok(())
    }

    // lookups

    pub fn user(&self, id: &UserId) -> Result<&UserRecord> {
        self.users
            .get(id)
            .ok_or_else(|| DomainError::UnknownUser(id.to_string()))
    }

    pub fn course(&self, code: &CourseCode) -> Result<&Course> {
        self.courses
            .get(code)
            .ok_or_else(|| DomainError::UnknownCourse(code.to_string()))
    }

    pub fn class(&self, id: &ClassId) -> Result<&ClassSection> {
        self.classes
            .get(id)
            .ok_or_else(|| DomainError::UnknownClass(id.to_string()))
    }

    pub fn rubric(&self, id: &RubricId) -> Result<&Rubric> {
        self.rubrics
            .get(id)
            .ok_or_else(|| DomainError::UnknownRubric(id.to_string()))
    }

    pub fn skill(&self, id: &SkillId) -> Result<&Skill> {
        self.skills
            .get(id)
            .ok_or_else(|| DomainError::UnknownSkill(id.to_string()))
    }

    pub fn component(&self, id: &ComponentId) -> Result<&GradeComponent> {
        self.components
            .get(id)
            .ok_or_else(|| DomainError::UnknownComponent(id.to_string()))
    }

    pub fn item(&self, id: &ItemId) -> Result<&GradeItem> {
        self.items
            .get(id)
            .ok_or_else(|| DomainError::UnknownItem(id.to_string()))
    }

    pub fn outcome_code_exists(&self, code: &OutcomeCode) -> bool {
        self.outcomes.keys().any(|(c, _)| c == code)
    }

    /// Distinct outcome codes across all curriculum versions, sorted.
    pub fn outcome_codes(&self) -> Vec<OutcomeCode> {
        let codes: BTreeSet<&OutcomeCode> = self.outcomes.keys().map(|(c, _)| c).collect();
        codes.into_iter().cloned().collect()
    }

    pub fn require_role(&self, id: &UserId, role: Role) -> Result<&UserRecord> {
        let user = self.user(id)?;
        if user.account.role != role {
            return Err(match role {
                Role::Instructor => DomainError::NotAnInstructor(id.to_string()),
                Role::Student => DomainError::NotAStudent(id.to_string()),
                Role::DepartmentHead => {
                    DomainError::Validation(format!("`{id}` is not a department head"))
                }
            });
        }
        Ok(user)
    }

    pub fn active_components(&self, class_id: &ClassId) -> Vec<&GradeComponent> {
        self.components
            .values()
            .filter(|c| &c.class_id == class_id && c.active)
            .collect()
    }

    pub fn items_of(&self, component_id: &ComponentId) -> impl Iterator<Item = &GradeItem> {
        let component_id = component_id.clone();
        self.items
            .values()
            .filter(move |i| i.component_id == component_id)
    }
}

pub fn check_levels(rubric: &Rubric, levels: &BTreeMap<CriterionId, i64>) -> Result<()> {
    let missing: Vec<String> = rubric
        .criteria
        .iter()
        .filter(|c| !levels.contains_key(&c.criterion_id))
        .map(|c| c.criterion_id.to_string())
        .collect();
    if !missing.is_empty() {
        return Err(DomainError::IncompleteEvaluation(missing));
    }
    for (id, level) in levels {
        let Some(c) = rubric.criteria.iter().find(|c| &c.criterion_id == id) else {
            return Err(DomainError::Validation(format!(
                "criterion `{id}` is not part of rubric `{}`",
                rubric.rubric_id
            )));
        };
        if *level < c.min_level || *level > c.max_level {
            return Err(DomainError::LevelOutOfRange {
                criterion: id.to_string(),
                level: *level,
                min: c.min_level,
                max: c.max_level,
            });
        }
    }
    Ok(())
}

fn require_text(s: &str, what: &str) -> Result<()> {
    if s.trim().is_empty() {
        Err(DomainError::Validation(format!("{what} must not be empty")))
    } else {
        Ok(())
    }
}
