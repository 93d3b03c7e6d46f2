//! Application facade over the store: authentication, permission checks,
//! one commit per mutation (retried on conflict) and one snapshot per read.
//!
//! The HTTP layer and the CLI both go through here, so a value served over
//! the API is the value this returns.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::access::{require, Action, Resource};
use crate::analytics::{self, AttainmentRecord, ClassAttainment, Distribution, ProgramRollup};
use crate::analytics::{SkillSummary, StudentAttainmentView, TrendPoint};
use crate::auth::{authenticate, Clock, IssuedToken, SessionRegistry, SystemClock};
use crate::credential::{check_strength, PasswordHash, DEFAULT_ITERATIONS};
use crate::domain::{self, OutcomeUpsert, Planned, SkillFilter, StudentSkill};
use crate::error::{DomainError, Result};
use crate::gradebook::{self, GradeSummary};
use crate::import::{self, RosterImport, ScoreImport};
use crate::model::*;
use crate::report::{self, AnalyticsReport, ReportFormat};
use crate::scope::Scope;
use crate::settings::Settings;
use crate::state::State;
use crate::store::{ChangeSet, CommitId, Snapshot, Store};

/// Attempts per mutation before a conflict is surfaced to the caller.
const MAX_ATTEMPTS: usize = 16;

pub struct Service {
    store: Store,
    sessions: SessionRegistry,
    clock: Arc<dyn Clock>,
    hash_iterations: u32,
}

impl Service {
    pub fn new(store: Store) -> Self {
        Self::with_clock(store, Arc::new(SystemClock))
    }

    pub fn with_clock(store: Store, clock: Arc<dyn Clock>) -> Self {
        Self {
            store,
            sessions: SessionRegistry::new(clock.clone()),
            clock,
            hash_iterations: DEFAULT_ITERATIONS,
        }
    }

    /// Lowers the password hashing cost; meant for tests.
    pub fn with_hash_iterations(mut self, iterations: u32) -> Self {
        self.hash_iterations = iterations;
        self
    }

    pub fn store(&self) -> &Store {
        &self.store
    }

    pub fn snapshot(&self) -> Arc<Snapshot> {
        self.store.snapshot()
    }

    pub fn commit_count(&self) -> CommitId {
        self.store.commit_count()
    }

    pub fn now(&self) -> Timestamp {
        self.clock.now()
    }

    fn hash(&self, password: &str) -> Result<PasswordHash> {
        check_strength(password)?;
        PasswordHash::create_with_iterations(password, self.hash_iterations)
    }

    /// Plans against the latest snapshot and commits, replanning when a
    /// concurrent commit touched the same entities.
    pub fn mutate<T>(&self, plan: impl Fn(&State, Timestamp) -> Result<Planned<T>>) -> Result<T> {
        let mut attempt = 0;
        loop {
            attempt += 1;
            let snap = self.store.snapshot();
            let planned = plan(&snap, self.clock.now())?;
            match self
                .store
                .commit(ChangeSet::new(snap.commit_id(), planned.ops))
            {
                Ok(_) => return Ok(planned.output),
                Err(DomainError::ConflictDetected) if attempt < MAX_ATTEMPTS => continue,
                Err(e) => return Err(e),
            }
        }
    }

    // -- sessions ----------------------------------------------------------

    pub fn login(&self, name_or_id: &str, password: &str) -> Result<IssuedToken> {
        let snap = self.store.snapshot();
        let account = authenticate(&snap, name_or_id, password)?;
        Ok(self
            .sessions
            .issue(account, snap.settings.token_ttl_minutes))
    }

    /// The actor behind `token`. The account must still exist and be active.
    pub fn actor(&self, token: &str) -> Result<Actor> {
        let actor = self.sessions.resolve(token)?;
        let snap = self.store.snapshot();
        match snap.users.get(&actor.user_id) {
            Some(u) if u.account.active && u.account.role == actor.role => Ok(actor),
            _ => {
                self.sessions.revoke(token);
                Err(DomainError::Unauthenticated)
            }
        }
    }

    /// Creates the first department head of an empty store.
    pub fn bootstrap_admin(&self, display_name: &str, password: &str) -> Result<UserAccount> {
        if !self.store.snapshot().users.is_empty() {
            return Err(DomainError::Validation("store already has accounts".into()));
        }
        self.create_user(
            &Actor::operator(),
            display_name,
            Role::DepartmentHead,
            None,
            password,
        )
    }

    // -- accounts ----------------------------------------------------------

    pub fn create_user(
        &self,
        actor: &Actor,
        display_name: &str,
        role: Role,
        email: Option<String>,
        password: &str,
    ) -> Result<UserAccount> {
        require(
            &self.store.snapshot(),
            actor,
            Action::CreateUser,
            &Resource::None,
        )?;
        let hash = self.hash(password)?;
        self.mutate(|st, _| {
            domain::create_user(st, actor, display_name, role, email.clone(), hash.clone())
        })
    }

    pub fn update_user(
        &self,
        actor: &Actor,
        user_id: &UserId,
        password: Option<&str>,
        active: Option<bool>,
    ) -> Result<UserAccount> {
        require(
            &self.store.snapshot(),
            actor,
            Action::UpdateUser,
            &Resource::Student(user_id.clone()),
        )?;
        let hash = password.map(|p| self.hash(p)).transpose()?;
        self.mutate(|st, _| domain::update_user(st, actor, user_id, hash.clone(), active))
    }

    // -- curriculum --------------------------------------------------------

    pub fn list_outcomes(&self, actor: &Actor) -> Result<Vec<ProgramOutcome>> {
        let snap = self.store.snapshot();
        require(&snap, actor, Action::ListOutcomes, &Resource::None)?;
        Ok(snap.outcomes.values().cloned().collect())
    }

    pub fn upsert_outcome(
        &self,
        actor: &Actor,
        code: &str,
        graduate_attribute: &str,
        curriculum_version: &str,
        active: Option<bool>,
    ) -> Result<OutcomeUpsert> {
        self.mutate(|st, _| {
            domain::upsert_program_outcome(
                st,
                actor,
                code,
                graduate_attribute,
                curriculum_version,
                active,
            )
        })
    }

    pub fn list_courses(&self, actor: &Actor) -> Result<Vec<Course>> {
        let snap = self.store.snapshot();
        require(&snap, actor, Action::ListCourses, &Resource::None)?;
        Ok(snap.courses.values().cloned().collect())
    }

    pub fn create_course(
        &self,
        actor: &Actor,
        code: &str,
        title: &str,
        units: f64,
    ) -> Result<Course> {
        self.mutate(|st, _| domain::create_course(st, actor, code, title, units))
    }

    // -- classes -----------------------------------------------------------

    /// Department heads see every class, instructors the ones they teach.
    pub fn list_classes(&self, actor: &Actor) -> Result<Vec<ClassSection>> {
        let snap = self.store.snapshot();
        require(&snap, actor, Action::ListClasses, &Resource::None)?;
        Ok(snap
            .classes
            .values()
            .filter(|c| actor.role == Role::DepartmentHead || c.instructor_id == actor.user_id)
            .cloned()
            .collect())
    }

    pub fn create_class(
        &self,
        actor: &Actor,
        course: &CourseCode,
        term: &str,
        instructor: &UserId,
    ) -> Result<ClassSection> {
        self.mutate(|st, _| domain::create_class_section(st, actor, course, term, instructor))
    }

    pub fn enroll(&self, actor: &Actor, class_id: &ClassId, student: &UserId) -> Result<usize> {
        self.mutate(|st, _| domain::enroll_student(st, actor, class_id, student))
    }

    pub fn import_roster(
        &self,
        actor: &Actor,
        class_id: &ClassId,
        csv: &[u8],
    ) -> Result<RosterImport> {
        self.mutate(|st, _| import::plan_roster_import(st, actor, class_id, csv))
    }

    // -- gradebook ---------------------------------------------------------

    pub fn define_grade_components(
        &self,
        actor: &Actor,
        class_id: &ClassId,
        components: &[(String, f64)],
    ) -> Result<Vec<GradeComponent>> {
        self.mutate(|st, _| gradebook::define_grade_components(st, actor, class_id, components))
    }

    pub fn add_grade_item(
        &self,
        actor: &Actor,
        class_id: &ClassId,
        component: &ComponentId,
        title: &str,
        max_points: f64,
    ) -> Result<GradeItem> {
        self.mutate(|st, _| {
            gradebook::add_grade_item(st, actor, class_id, component, title, max_points)
        })
    }

    pub fn record_score(
        &self,
        actor: &Actor,
        class_id: &ClassId,
        student: &UserId,
        item: &ItemId,
        raw_score: f64,
    ) -> Result<ScoreEntry> {
        self.mutate(|st, now| {
            gradebook::record_score(st, actor, class_id, student, item, raw_score, now)
        })
    }

    pub fn import_scores(
        &self,
        actor: &Actor,
        class_id: &ClassId,
        csv: &[u8],
    ) -> Result<ScoreImport> {
        self.mutate(|st, now| import::plan_score_import(st, actor, class_id, csv, now))
    }

    pub fn gradebook(&self, actor: &Actor, class_id: &ClassId) -> Result<GradeSummary> {
        let snap = self.store.snapshot();
        require(
            &snap,
            actor,
            Action::ReadGradebook,
            &Resource::Class(class_id.clone()),
        )?;
        gradebook::class_grade_summary(&snap, class_id, &snap.settings.grade_scale)
    }

    // -- rubrics -----------------------------------------------------------

    pub fn list_rubrics(&self, actor: &Actor) -> Result<Vec<Rubric>> {
        let snap = self.store.snapshot();
        require(&snap, actor, Action::ListRubrics, &Resource::None)?;
        Ok(snap.rubrics.values().cloned().collect())
    }

    pub fn define_rubric(
        &self,
        actor: &Actor,
        title: &str,
        criteria: Vec<Criterion>,
    ) -> Result<Rubric> {
        self.mutate(|st, _| domain::define_rubric(st, actor, title, criteria.clone()))
    }

    pub fn record_evaluation(
        &self,
        actor: &Actor,
        class_id: &ClassId,
        rubric: &RubricId,
        student: &UserId,
        levels: BTreeMap<CriterionId, i64>,
    ) -> Result<EvaluationRecord> {
        self.mutate(|st, now| {
            domain::record_evaluation(st, actor, class_id, rubric, student, levels.clone(), now)
        })
    }

    // -- skills ------------------------------------------------------------

    pub fn list_skills(&self, actor: &Actor, course: Option<&CourseCode>) -> Result<Vec<Skill>> {
        let snap = self.store.snapshot();
        require(&snap, actor, Action::ListSkills, &Resource::None)?;
        let mut out: Vec<Skill> = snap
            .skills
            .values()
            .filter(|s| course.is_none_or(|c| c == &s.course_code))
            .cloned()
            .collect();
        out.sort_by(|a, b| {
            a.name
                .cmp(&b.name)
                .then_with(|| a.skill_id.cmp(&b.skill_id))
        });
        Ok(out)
    }

    pub fn create_skill(&self, actor: &Actor, name: &str, course: &CourseCode) -> Result<Skill> {
        self.mutate(|st, _| domain::create_skill(st, actor, name, course))
    }

    pub fn rate_skill(
        &self,
        actor: &Actor,
        student: &UserId,
        skill: &SkillId,
        class_id: &ClassId,
        score: f64,
    ) -> Result<SkillRating> {
        self.mutate(|st, now| {
            domain::record_skill_rating(st, actor, student, skill, class_id, score, now)
        })
    }

    pub fn student_skills(
        &self,
        actor: &Actor,
        student: &UserId,
        filter: &SkillFilter,
    ) -> Result<Vec<StudentSkill>> {
        domain::query_student_skills(&self.store.snapshot(), actor, student, filter)
    }

    pub fn skills_summary(&self, actor: &Actor, class_id: &ClassId) -> Result<Vec<SkillSummary>> {
        let snap = self.store.snapshot();
        require(
            &snap,
            actor,
            Action::ReadSkillsSummary,
            &Resource::Class(class_id.clone()),
        )?;
        analytics::skills_summary(&snap, class_id)
    }

    // -- analytics ---------------------------------------------------------

    pub fn class_attainment(
        &self,
        actor: &Actor,
        class_id: &ClassId,
        outcome: &OutcomeCode,
        threshold: Option<f64>,
    ) -> Result<ClassAttainment> {
        let snap = self.store.snapshot();
        require(
            &snap,
            actor,
            Action::ReadAttainment,
            &Resource::Class(class_id.clone()),
        )?;
        let theta = threshold.unwrap_or(snap.settings.attainment_threshold);
        analytics::class_attainment_rate(&snap, class_id, outcome, theta)
    }

    pub fn student_outcome_attainment(
        &self,
        actor: &Actor,
        student: &UserId,
        outcome: &OutcomeCode,
        scope: &Scope,
        threshold: Option<f64>,
    ) -> Result<AttainmentRecord> {
        let snap = self.store.snapshot();
        require(
            &snap,
            actor,
            Action::ReadAttainment,
            &Resource::StudentInScope(student.clone(), scope.clone()),
        )?;
        let theta = threshold.unwrap_or(snap.settings.attainment_threshold);
        analytics::student_outcome_attainment(&snap, student, outcome, scope, theta)
    }

    pub fn distribution(
        &self,
        actor: &Actor,
        scope: &Scope,
        outcome: &OutcomeCode,
        threshold: Option<f64>,
    ) -> Result<Distribution> {
        let snap = self.store.snapshot();
        require(
            &snap,
            actor,
            Action::ReadDistribution,
            &Resource::Scope(scope.clone()),
        )?;
        let theta = threshold.unwrap_or(snap.settings.attainment_threshold);
        analytics::distribution(&snap, scope, outcome, &snap.settings.band_scheme, theta)
    }

    pub fn rollup(
        &self,
        actor: &Actor,
        curriculum_version: &str,
        from_term: &str,
        to_term: &str,
        threshold: Option<f64>,
    ) -> Result<ProgramRollup> {
        let snap = self.store.snapshot();
        require(&snap, actor, Action::ReadRollup, &Resource::None)?;
        let theta = threshold.unwrap_or(snap.settings.attainment_threshold);
        analytics::program_rollup(
            &snap,
            curriculum_version,
            from_term,
            to_term,
            theta,
            &snap.settings.band_scheme,
        )
    }

    pub fn trend(
        &self,
        actor: &Actor,
        outcome: &OutcomeCode,
        curriculum_version: &str,
        terms: &[String],
        threshold: Option<f64>,
    ) -> Result<Vec<TrendPoint>> {
        let snap = self.store.snapshot();
        require(&snap, actor, Action::ReadTrend, &Resource::None)?;
        let theta = threshold.unwrap_or(snap.settings.attainment_threshold);
        analytics::term_trend(&snap, outcome, curriculum_version, terms, theta)
    }

    pub fn student_attainment(
        &self,
        actor: &Actor,
        student: &UserId,
        scope: &Scope,
    ) -> Result<StudentAttainmentView> {
        let snap = self.store.snapshot();
        require(
            &snap,
            actor,
            Action::ReadStudentAttainment,
            &Resource::StudentInScope(student.clone(), scope.clone()),
        )?;
        analytics::student_attainment_view(
            &snap,
            student,
            scope,
            snap.settings.attainment_threshold,
            &snap.settings.band_scheme,
        )
    }

    // -- reports -----------------------------------------------------------

    pub fn analytics_report(
        &self,
        actor: &Actor,
        scope: &Scope,
        threshold: Option<f64>,
    ) -> Result<AnalyticsReport> {
        let snap = self.store.snapshot();
        require(
            &snap,
            actor,
            Action::ExportReport,
            &Resource::Scope(scope.clone()),
        )?;
        let theta = threshold.unwrap_or(snap.settings.attainment_threshold);
        report::analytics_report(
            &snap,
            snap.commit_id(),
            scope,
            theta,
            &snap.settings.band_scheme,
        )
    }

    pub fn export(
        &self,
        actor: &Actor,
        scope: &Scope,
        format: ReportFormat,
        threshold: Option<f64>,
    ) -> Result<Vec<u8>> {
        report::render(&self.analytics_report(actor, scope, threshold)?, format)
    }

    // -- settings ----------------------------------------------------------

    pub fn settings(&self, actor: &Actor) -> Result<Settings> {
        let snap = self.store.snapshot();
        require(&snap, actor, Action::ReadSettings, &Resource::None)?;
        Ok(snap.settings.clone())
    }

    pub fn put_settings(&self, actor: &Actor, settings: Settings) -> Result<Settings> {
        self.mutate(|st, _| domain::put_settings(st, actor, settings.clone()))
    }
}
