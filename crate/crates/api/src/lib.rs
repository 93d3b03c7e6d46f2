//! HTTP/JSON API under `/api/v1/`.
//!
//! Every handler resolves the bearer token, makes exactly one service call
//! (one snapshot for reads, one commit for writes) and answers with
//! canonical JSON. Errors carry a stable machine code.

mod error;
mod extract;
mod routes;

use std::future::Future;
use std::net::SocketAddr;
use std::sync::Arc;

use axum::routing::{get, post, put};
use axum::Router;
use outcomes_core::Service;

pub use error::{status_of, ApiError};

pub const API_PREFIX: &str = "/api/v1";

pub fn router(svc: Arc<Service>) -> Router {
    use routes::*;
    let api = Router::new()
        .route("/health", get(health))
        .route("/auth/token", post(issue_token))
        .route("/users", post(create_user))
        .route("/users/{id}", put(update_user))
        .route("/outcomes", get(list_outcomes).post(post_outcome))
        .route("/outcomes/{code}", put(put_outcome))
        .route("/courses", get(list_courses).post(create_course))
        .route("/classes", get(list_classes).post(create_class))
        .route("/classes/{id}/enroll", post(enroll))
        .route("/classes/{id}/roster-import", post(roster_import))
        .route("/classes/{id}/grade-components", post(grade_components))
        .route("/classes/{id}/items", post(add_item))
        .route("/classes/{id}/scores", post(scores))
        .route("/classes/{id}/gradebook", get(gradebook))
        .route("/classes/{id}/skills-summary", get(skills_summary))
        .route("/classes/{id}/evaluations", post(record_evaluation))
        .route("/rubrics", get(list_rubrics).post(define_rubric))
        .route("/skills", get(list_skills).post(create_skill))
        .route("/skill-ratings", post(rate_skill))
        .route("/students/{id}/skills", get(student_skills))
        .route("/students/{id}/attainment", get(student_attainment))
        .route("/analytics/attainment", get(attainment))
        .route("/analytics/distribution", get(distribution))
        .route("/analytics/rollup", get(rollup))
        .route("/analytics/trend", get(trend))
        .route("/reports/export", get(export))
        .route("/settings", get(get_settings).put(put_settings));
    Router::new()
        .route("/health", get(health))
        .nest(API_PREFIX, api)
        .with_state(svc)
}

/// Serves until `shutdown` resolves.
pub async fn serve(
    svc: Arc<Service>,
    addr: SocketAddr,
    shutdown: impl Future<Output = ()> + Send + 'static,
) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    tracing::info!(addr = %listener.local_addr()?, "listening");
    axum::serve(listener, router(svc))
        .with_graceful_shutdown(shutdown)
        .await
}
