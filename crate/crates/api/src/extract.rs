use std::sync::Arc;

use axum::extract::{FromRequest, FromRequestParts, Json, Query, Request};
use axum::http::request::Parts;
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use outcomes_core::{to_canonical_json, Actor, DomainError, Service};
use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::error::ApiError;

/// The authenticated caller, from `Authorization: Bearer <token>`.
pub struct Authed(pub Actor);

impl FromRequestParts<Arc<Service>> for Authed {
    type Rejection = ApiError;

    async fn from_request_parts(parts: &mut Parts, svc: &Arc<Service>) -> Result<Self, ApiError> {
        let token = parts
            .headers
            .get(header::AUTHORIZATION)
            .and_then(|v| v.to_str().ok())
            .and_then(|v| v.strip_prefix("Bearer "))
            .map(str::trim)
            .ok_or(DomainError::Unauthenticated)?;
        Ok(Authed(svc.actor(token)?))
    }
}

/// JSON request body; any parse failure is a 422 `bad_body`.
pub struct Body<T>(pub T);

impl<T, S> FromRequest<S> for Body<T>
where
    T: DeserializeOwned,
    S: Send + Sync,
{
    type Rejection = ApiError;

    async fn from_request(req: Request, state: &S) -> Result<Self, ApiError> {
        match Json::<T>::from_request(req, state).await {
            Ok(Json(v)) => Ok(Body(v)),
            Err(rej) => Err(ApiError::bad_body(rej.body_text())),
        }
    }
}

/// Query string; a parse failure is a 422 `bad_query`.
pub struct Q<T>(pub T);

impl<T, S> FromRequestParts<S> for Q<T>
where
    T: DeserializeOwned,
    S: Send + Sync,
{
    type Rejection = ApiError;

    async fn from_request_parts(parts: &mut Parts, state: &S) -> Result<Self, ApiError> {
        match Query::<T>::from_request_parts(parts, state).await {
            Ok(Query(v)) => Ok(Q(v)),
            Err(rej) => Err(ApiError::bad_query(rej.body_text())),
        }
    }
}

/// Canonical JSON response.
pub struct Canon<T>(pub StatusCode, pub T);

impl<T: Serialize> IntoResponse for Canon<T> {
    fn into_response(self) -> Response {
        match to_canonical_json(&self.1) {
            Ok(body) => {
                (self.0, [(header::CONTENT_TYPE, "application/json")], body).into_response()
            }
            Err(e) => ApiError::from(e).into_response(),
        }
    }
}

pub fn ok<T>(v: T) -> Canon<T> {
    Canon(StatusCode::OK, v)
}

pub fn created<T>(v: T) -> Canon<T> {
    Canon(StatusCode::CREATED, v)
}
