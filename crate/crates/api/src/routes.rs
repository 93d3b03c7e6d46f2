use std::collections::BTreeMap;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Path, State};
use axum::http::{header, HeaderMap, StatusCode};
use axum::response::{IntoResponse, Response};
use outcomes_core::domain::SkillFilter;
use outcomes_core::*;
use serde::Deserialize;
use serde_json::json;

use crate::error::ApiError;
use crate::extract::{created, ok, Authed, Body, Canon, Q};

type Svc = State<Arc<Service>>;
type ApiResult<T> = std::result::Result<T, ApiError>;

/// Runs a service call off the async workers; commits fsync and password
/// hashing both block.
async fn run<T, F>(svc: &Arc<Service>, f: F) -> ApiResult<T>
where
    T: Send + 'static,
    F: FnOnce(&Service) -> Result<T> + Send + 'static,
{
    let svc = svc.clone();
    tokio::task::spawn_blocking(move || f(&svc))
        .await
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", e.to_string()))?
        .map_err(ApiError::from)
}

fn parse_scope(s: Option<&str>) -> ApiResult<Scope> {
    s.map_or(Ok(Scope::All), |s| s.parse().map_err(ApiError::from))
}

pub async fn health() -> impl IntoResponse {
    ok(json!({"status": "ok"}))
}

// -- auth and accounts --------------------------------------------------------

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LoginBody {
    username: String,
    password: String,
}

pub async fn issue_token(
    State(svc): Svc,
    Body(b): Body<LoginBody>,
) -> ApiResult<impl IntoResponse> {
    Ok(ok(
        run(&svc, move |s| s.login(&b.username, &b.password)).await?
    ))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NewUser {
    display_name: String,
    role: Role,
    #[serde(default)]
    email: Option<String>,
    password: String,
}

pub async fn create_user(
    State(svc): Svc,
    Authed(a): Authed,
    Body(b): Body<NewUser>,
) -> ApiResult<impl IntoResponse> {
    let u = run(&svc, move |s| {
        s.create_user(&a, &b.display_name, b.role, b.email, &b.password)
    })
    .await?;
    Ok(created(u))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UserPatch {
    #[serde(default)]
    password: Option<String>,
    #[serde(default)]
    active: Option<bool>,
}

pub async fn update_user(
    State(svc): Svc,
    Authed(a): Authed,
    Path(id): Path<String>,
    Body(b): Body<UserPatch>,
) -> ApiResult<impl IntoResponse> {
    let u = run(&svc, move |s| {
        s.update_user(&a, &id.into(), b.password.as_deref(), b.active)
    })
    .await?;
    Ok(ok(u))
}

// -- curriculum ---------------------------------------------------------------

pub async fn list_outcomes(State(svc): Svc, Authed(a): Authed) -> ApiResult<impl IntoResponse> {
    Ok(ok(run(&svc, move |s| s.list_outcomes(&a)).await?))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NewOutcome {
    outcome_code: String,
    graduate_attribute: String,
    curriculum_version: String,
    #[serde(default)]
    active: Option<bool>,
}

pub async fn post_outcome(
    State(svc): Svc,
    Authed(a): Authed,
    Body(b): Body<NewOutcome>,
) -> ApiResult<impl IntoResponse> {
    let r = run(&svc, move |s| {
        s.upsert_outcome(
            &a,
            &b.outcome_code,
            &b.graduate_attribute,
            &b.curriculum_version,
            b.active,
        )
    })
    .await?;
    let status = if r.created {
        StatusCode::CREATED
    } else {
        StatusCode::OK
    };
    Ok(Canon(status, r))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutcomePatch {
    graduate_attribute: String,
    curriculum_version: String,
    #[serde(default)]
    active: Option<bool>,
}

pub async fn put_outcome(
    State(svc): Svc,
    Authed(a): Authed,
    Path(code): Path<String>,
    Body(b): Body<OutcomePatch>,
) -> ApiResult<impl IntoResponse> {
    let r = run(&svc, move |s| {
        s.upsert_outcome(
            &a,
            &code,
            &b.graduate_attribute,
            &b.curriculum_version,
            b.active,
        )
    })
    .await?;
    let status = if r.created {
        StatusCode::CREATED
    } else {
        StatusCode::OK
    };
    Ok(Canon(status, r))
}

pub async fn list_courses(State(svc): Svc, Authed(a): Authed) -> ApiResult<impl IntoResponse> {
    Ok(ok(run(&svc, move |s| s.list_courses(&a)).await?))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NewCourse {
    course_code: String,
    title: String,
    units: f64,
}

pub async fn create_course(
    State(svc): Svc,
    Authed(a): Authed,
    Body(b): Body<NewCourse>,
) -> ApiResult<impl IntoResponse> {
    let c = run(&svc, move |s| {
        s.create_course(&a, &b.course_code, &b.title, b.units)
    })
    .await?;
    Ok(created(c))
}

// -- classes ------------------------------------------------------------------

pub async fn list_classes(State(svc): Svc, Authed(a): Authed) -> ApiResult<impl IntoResponse> {
    Ok(ok(run(&svc, move |s| s.list_classes(&a)).await?))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NewClass {
    course_code: CourseCode,
    term: String,
    instructor_id: UserId,
}

pub async fn create_class(
    State(svc): Svc,
    Authed(a): Authed,
    Body(b): Body<NewClass>,
) -> ApiResult<impl IntoResponse> {
    let c = run(&svc, move |s| {
        s.create_class(&a, &b.course_code, &b.term, &b.instructor_id)
    })
    .await?;
    Ok(created(c))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnrollBody {
    student_id: UserId,
}

pub async fn enroll(
    State(svc): Svc,
    Authed(a): Authed,
    Path(id): Path<String>,
    Body(b): Body<EnrollBody>,
) -> ApiResult<impl IntoResponse> {
    let class_id = ClassId::from(id);
    let cid = class_id.clone();
    let n = run(&svc, move |s| s.enroll(&a, &cid, &b.student_id)).await?;
    Ok(ok(json!({"class_id": class_id, "roster_size": n})))
}

pub async fn roster_import(
    State(svc): Svc,
    Authed(a): Authed,
    Path(id): Path<String>,
    body: Bytes,
) -> ApiResult<impl IntoResponse> {
    Ok(ok(run(&svc, move |s| {
        s.import_roster(&a, &id.into(), &body)
    })
    .await?))
}

// -- gradebook ----------------------------------------------------------------

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComponentSpec {
    name: String,
    weight: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComponentsBody {
    components: Vec<ComponentSpec>,
}

pub async fn grade_components(
    State(svc): Svc,
    Authed(a): Authed,
    Path(id): Path<String>,
    Body(b): Body<ComponentsBody>,
) -> ApiResult<impl IntoResponse> {
    let comps: Vec<(String, f64)> = b
        .components
        .into_iter()
        .map(|c| (c.name, c.weight))
        .collect();
    Ok(ok(run(&svc, move |s| {
        s.define_grade_components(&a, &id.into(), &comps)
    })
    .await?))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NewItem {
    component_id: ComponentId,
    title: String,
    max_points: f64,
}

pub async fn add_item(
    State(svc): Svc,
    Authed(a): Authed,
    Path(id): Path<String>,
    Body(b): Body<NewItem>,
) -> ApiResult<impl IntoResponse> {
    let item = run(&svc, move |s| {
        s.add_grade_item(&a, &id.into(), &b.component_id, &b.title, b.max_points)
    })
    .await?;
    Ok(created(item))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScoreBody {
    student_id: UserId,
    item_id: ItemId,
    raw_score: f64,
}

/// One JSON score, or a scores CSV when sent as `text/csv`.
pub async fn scores(
    State(svc): Svc,
    Authed(a): Authed,
    Path(id): Path<String>,
    headers: HeaderMap,
    body: Bytes,
) -> ApiResult<Response> {
    let is_csv = headers
        .get(header::CONTENT_TYPE)
        .and_then(|v| v.to_str().ok())
        .is_some_and(|v| v.starts_with("text/csv"));
    let class_id = ClassId::from(id);
    if is_csv {
        let r = run(&svc, move |s| s.import_scores(&a, &class_id, &body)).await?;
        return Ok(ok(r).into_response());
    }
    let b: ScoreBody =
        serde_json::from_slice(&body).map_err(|e| ApiError::bad_body(e.to_string()))?;
    let entry = run(&svc, move |s| {
        s.record_score(&a, &class_id, &b.student_id, &b.item_id, b.raw_score)
    })
    .await?;
    Ok(created(entry).into_response())
}

pub async fn gradebook(
    State(svc): Svc,
    Authed(a): Authed,
    Path(id): Path<String>,
) -> ApiResult<impl IntoResponse> {
    Ok(ok(run(&svc, move |s| s.gradebook(&a, &id.into())).await?))
}

pub async fn skills_summary(
    State(svc): Svc,
    Authed(a): Authed,
    Path(id): Path<String>,
) -> ApiResult<impl IntoResponse> {
    Ok(ok(
        run(&svc, move |s| s.skills_summary(&a, &id.into())).await?
    ))
}

// -- rubrics ------------------------------------------------------------------

pub async fn list_rubrics(State(svc): Svc, Authed(a): Authed) -> ApiResult<impl IntoResponse> {
    Ok(ok(run(&svc, move |s| s.list_rubrics(&a)).await?))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NewRubric {
    title: String,
    criteria: Vec<Criterion>,
}

pub async fn define_rubric(
    State(svc): Svc,
    Authed(a): Authed,
    Body(b): Body<NewRubric>,
) -> ApiResult<impl IntoResponse> {
    Ok(created(
        run(&svc, move |s| s.define_rubric(&a, &b.title, b.criteria)).await?,
    ))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NewEvaluation {
    rubric_id: RubricId,
    student_id: UserId,
    levels: BTreeMap<CriterionId, i64>,
}

pub async fn record_evaluation(
    State(svc): Svc,
    Authed(a): Authed,
    Path(id): Path<String>,
    Body(b): Body<NewEvaluation>,
) -> ApiResult<impl IntoResponse> {
    let ev = run(&svc, move |s| {
        s.record_evaluation(&a, &id.into(), &b.rubric_id, &b.student_id, b.levels)
    })
    .await?;
    Ok(created(ev))
}

// -- skills -------------------------------------------------------------------

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CourseQuery {
    #[serde(default)]
    course: Option<CourseCode>,
}

pub async fn list_skills(
    State(svc): Svc,
    Authed(a): Authed,
    Q(q): Q<CourseQuery>,
) -> ApiResult<impl IntoResponse> {
    Ok(ok(
        run(&svc, move |s| s.list_skills(&a, q.course.as_ref())).await?
    ))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NewSkill {
    name: String,
    course_code: CourseCode,
}

pub async fn create_skill(
    State(svc): Svc,
    Authed(a): Authed,
    Body(b): Body<NewSkill>,
) -> ApiResult<impl IntoResponse> {
    Ok(created(
        run(&svc, move |s| s.create_skill(&a, &b.name, &b.course_code)).await?,
    ))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NewRating {
    student_id: UserId,
    skill_id: SkillId,
    class_id: ClassId,
    score: f64,
}

pub async fn rate_skill(
    State(svc): Svc,
    Authed(a): Authed,
    Body(b): Body<NewRating>,
) -> ApiResult<impl IntoResponse> {
    let r = run(&svc, move |s| {
        s.rate_skill(&a, &b.student_id, &b.skill_id, &b.class_id, b.score)
    })
    .await?;
    Ok(created(r))
}

pub async fn student_skills(
    State(svc): Svc,
    Authed(a): Authed,
    Path(id): Path<String>,
    Q(filter): Q<SkillFilter>,
) -> ApiResult<impl IntoResponse> {
    Ok(ok(run(&svc, move |s| {
        s.student_skills(&a, &id.into(), &filter)
    })
    .await?))
}

// -- analytics ----------------------------------------------------------------

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AttainmentQuery {
    outcome: OutcomeCode,
    #[serde(default)]
    class: Option<ClassId>,
    #[serde(default)]
    student: Option<UserId>,
    #[serde(default)]
    scope: Option<String>,
    #[serde(default)]
    threshold: Option<f64>,
}

/// With `student`: that student's record over `scope` (default: the given
/// class, else everything). Otherwise the class attainment rate.
pub async fn attainment(
    State(svc): Svc,
    Authed(a): Authed,
    Q(q): Q<AttainmentQuery>,
) -> ApiResult<Response> {
    if let Some(student) = q.student {
        let scope = match (&q.scope, &q.class) {
            (Some(s), _) => parse_scope(Some(s))?,
            (None, Some(c)) => Scope::Class(c.clone()),
            (None, None) => Scope::All,
        };
        let r = run(&svc, move |s| {
            s.student_outcome_attainment(&a, &student, &q.outcome, &scope, q.threshold)
        })
        .await?;
        return Ok(ok(r).into_response());
    }
    let class = q
        .class
        .ok_or_else(|| ApiError::bad_query("either `class` or `student` is required"))?;
    let r = run(&svc, move |s| {
        s.class_attainment(&a, &class, &q.outcome, q.threshold)
    })
    .await?;
    Ok(ok(r).into_response())
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DistributionQuery {
    outcome: OutcomeCode,
    #[serde(default)]
    scope: Option<String>,
    #[serde(default)]
    threshold: Option<f64>,
}

pub async fn distribution(
    State(svc): Svc,
    Authed(a): Authed,
    Q(q): Q<DistributionQuery>,
) -> ApiResult<impl IntoResponse> {
    let scope = parse_scope(q.scope.as_deref())?;
    Ok(ok(run(&svc, move |s| {
        s.distribution(&a, &scope, &q.outcome, q.threshold)
    })
    .await?))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RollupQuery {
    curriculum_version: String,
    from: String,
    to: String,
    #[serde(default)]
    threshold: Option<f64>,
}

pub async fn rollup(
    State(svc): Svc,
    Authed(a): Authed,
    Q(q): Q<RollupQuery>,
) -> ApiResult<impl IntoResponse> {
    Ok(ok(run(&svc, move |s| {
        s.rollup(&a, &q.curriculum_version, &q.from, &q.to, q.threshold)
    })
    .await?))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrendQuery {
    outcome: OutcomeCode,
    curriculum_version: String,
    /// Comma-separated, in display order.
    terms: String,
    #[serde(default)]
    threshold: Option<f64>,
}

pub async fn trend(
    State(svc): Svc,
    Authed(a): Authed,
    Q(q): Q<TrendQuery>,
) -> ApiResult<impl IntoResponse> {
    let terms: Vec<String> = q
        .terms
        .split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(String::from)
        .collect();
    Ok(ok(run(&svc, move |s| {
        s.trend(&a, &q.outcome, &q.curriculum_version, &terms, q.threshold)
    })
    .await?))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScopeQuery {
    #[serde(default)]
    scope: Option<String>,
}

pub async fn student_attainment(
    State(svc): Svc,
    Authed(a): Authed,
    Path(id): Path<String>,
    Q(q): Q<ScopeQuery>,
) -> ApiResult<impl IntoResponse> {
    let scope = parse_scope(q.scope.as_deref())?;
    Ok(ok(run(&svc, move |s| {
        s.student_attainment(&a, &id.into(), &scope)
    })
    .await?))
}

// -- reports and settings -----------------------------------------------------

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExportQuery {
    format: String,
    #[serde(default)]
    scope: Option<String>,
    #[serde(default)]
    threshold: Option<f64>,
}

pub async fn export(
    State(svc): Svc,
    Authed(a): Authed,
    Q(q): Q<ExportQuery>,
) -> ApiResult<Response> {
    let format: ReportFormat = q
        .format
        .parse()
        .map_err(|e: DomainError| ApiError::bad_query(e.to_string()))?;
    let scope = parse_scope(q.scope.as_deref())?;
    let bytes = run(&svc, move |s| s.export(&a, &scope, format, q.threshold)).await?;
    let ctype = match format {
        ReportFormat::Csv => "text/csv; charset=utf-8",
        ReportFormat::Json => "application/json",
    };
    Ok(([(header::CONTENT_TYPE, ctype)], bytes).into_response())
}

pub async fn get_settings(State(svc): Svc, Authed(a): Authed) -> ApiResult<impl IntoResponse> {
    Ok(ok(run(&svc, move |s| s.settings(&a)).await?))
}

pub async fn put_settings(
    State(svc): Svc,
    Authed(a): Authed,
    Body(settings): Body<Settings>,
) -> ApiResult<impl IntoResponse> {
    Ok(ok(run(&svc, move |s| s.put_settings(&a, settings)).await?))
}
