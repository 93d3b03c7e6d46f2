mod common;

use std::sync::Arc;

use axum::http::StatusCode;
use chrono::{Duration, TimeZone, Utc};
use common::*;
use outcomes_core::*;
use serde_json::json;

fn code(r: &Resp) -> String {
    r.json()["code"].as_str().unwrap_or_default().to_string()
}

#[test]
fn health_needs_no_token() {
    let f = fixture();
    for path in ["//health", "/health"] {
        let r = f.http.call("GET", path, None, Payload::None);
        assert_eq!(r.status, StatusCode::OK, "{path}");
        assert_eq!(r.json(), json!({"status": "ok"}));
    }
}

#[test]
fn missing_or_bad_token_is_unauthorized() {
    let f = fixture();
    let r = f.http.call("GET", "/outcomes", None, Payload::None);
    assert_eq!(
        (r.status, code(&r).as_str()),
        (StatusCode::UNAUTHORIZED, "unauthenticated")
    );
    let r = f.http.get("/outcomes", "not-a-token");
    assert_eq!(r.status, StatusCode::UNAUTHORIZED);
    let r = f.http.call(
        "POST",
        "/auth/token",
        None,
        Payload::Json(json!({"username": HEAD, "password": "wrong"})),
    );
    assert_eq!(r.status, StatusCode::UNAUTHORIZED);
    assert_eq!(code(&r), "bad_credentials");
}

#[test]
fn token_expires_after_its_lifetime() {
    let dir = tempfile::tempdir().unwrap();
    let clock = Arc::new(ManualClock::new(
        Utc.with_ymd_and_hms(2024, 8, 1, 8, 0, 0).unwrap(),
    ));
    let svc = Service::with_clock(Store::open(dir.path()).unwrap(), clock.clone())
        .with_hash_iterations(1);
    svc.bootstrap_admin("Head", PW).unwrap();
    let ttl = svc.snapshot().settings.token_ttl_minutes;
    let http = Http::new(Arc::new(svc));
    let r = http.call(
        "POST",
        "/auth/token",
        None,
        Payload::Json(json!({"username": HEAD, "password": PW})),
    );
    assert_eq!(r.status, StatusCode::OK);
    let token = r.json()["token"].as_str().unwrap().to_string();
    clock.advance(Duration::minutes(i64::from(ttl) - 1));
    assert_eq!(http.get("/outcomes", &token).status, StatusCode::OK);
    clock.advance(Duration::minutes(1));
    let r = http.get("/outcomes", &token);
    assert_eq!(
        (r.status, code(&r).as_str()),
        (StatusCode::UNAUTHORIZED, "unauthenticated")
    );
}

#[test]
fn malformed_bodies_and_queries_are_unprocessable() {
    let f = fixture();
    let t = f.token(HEAD);
    let before = f.svc.commit_count();
    let r = f.http.call(
        "POST",
        "/courses",
        Some(&t),
        Payload::Raw("application/json", b"{not json".to_vec()),
    );
    assert_eq!(
        (r.status, code(&r).as_str()),
        (StatusCode::UNPROCESSABLE_ENTITY, "bad_body")
    );
    let r = f.http.post(
        "/courses",
        &t,
        json!({"course_code": "CS2", "title": "T", "units": 3, "extra": 1}),
    );
    assert_eq!(code(&r), "bad_body");
    let r = f.http.post("/courses", &t, json!({"course_code": "CS2"}));
    assert_eq!(code(&r), "bad_body");
    let r = f
        .http
        .get("/analytics/attainment?scope=class:C0001&threshold=abc", &t);
    assert_eq!(
        (r.status, code(&r).as_str()),
        (StatusCode::UNPROCESSABLE_ENTITY, "bad_query")
    );
    let r = f.http.get("/reports/export?format=xml", &t);
    assert_eq!(code(&r), "bad_query");
    let r = f.http.get(
        "/analytics/distribution?scope=class:C0001&outcome=PO-A&threshold=1.5",
        &t,
    );
    assert_eq!(
        (r.status, code(&r).as_str()),
        (StatusCode::UNPROCESSABLE_ENTITY, "invalid_threshold")
    );
    assert_eq!(f.svc.commit_count(), before);
}

#[test]
fn status_codes_follow_error_kinds() {
    let f = fixture();
    let t = f.token(HEAD);
    let r = f.http.post(
        "/courses",
        &t,
        json!({"course_code": "CS102", "title": "Programming 2", "units": 3}),
    );
    assert_eq!(r.status, StatusCode::CREATED);
    assert_eq!(r.json()["course_code"], "CS102");
    let r = f.http.post(
        "/courses",
        &t,
        json!({"course_code": "CS102", "title": "Again", "units": 3}),
    );
    assert_eq!(
        (r.status, code(&r).as_str()),
        (StatusCode::CONFLICT, "duplicate_code")
    );
    let r = f
        .http
        .post("/classes/C0001/enroll", &t, json!({"student_id": S1}));
    assert_eq!(
        (r.status, code(&r).as_str()),
        (StatusCode::CONFLICT, "already_enrolled")
    );
    let r = f.http.get("/classes/C9999/gradebook", &t);
    assert_eq!(
        (r.status, code(&r).as_str()),
        (StatusCode::NOT_FOUND, "unknown_class")
    );
    let r = f.http.post(
        "/classes/C0001/scores",
        &t,
        json!({"student_id": S1, "item_id": "GI0001", "raw_score": 11}),
    );
    assert_eq!(
        (r.status, code(&r).as_str()),
        (StatusCode::UNPROCESSABLE_ENTITY, "out_of_range")
    );
    let r = f.http.post(
        "/classes/C0001/scores",
        &t,
        json!({"student_id": S1, "item_id": "GI0001", "raw_score": 9}),
    );
    assert_eq!(r.status, StatusCode::CREATED);
    let g = f.http.get("/classes/C0001/gradebook", &t).json();
    assert_eq!(g["rows"][0]["final_percent"], 90.0);
    assert_eq!(g["rows"][0]["grade"], "1.50");
    let err = f.http.get("/classes/C9999/gradebook", &t).json();
    let keys: Vec<&String> = err.as_object().unwrap().keys().collect();
    assert_eq!(keys, ["code", "message"]);
}

#[test]
fn csv_uploads_and_exports() {
    let f = fixture();
    let t = f.token(I1);
    let roster =
        b"student_id,last_name,first_name,email\nN01,Diaz,Ana,ana@example.edu\nN02,,,\n".to_vec();
    let r = f.http.call(
        "POST",
        "/classes/C0001/roster-import",
        Some(&t),
        Payload::Raw("text/csv", roster),
    );
    assert_eq!(r.status, StatusCode::OK);
    let v = r.json();
    assert_eq!(v["enrolled"], 1);
    assert_eq!(v["rejected"][0]["line"], 3);
    let scores =
        format!("student_id,item_id,raw_score\n{S1},GI0001,7\n{S2},GI0001,8.5\n").into_bytes();
    let r = f.http.call(
        "POST",
        "/classes/C0001/scores",
        Some(&t),
        Payload::Raw("text/csv", scores),
    );
    assert_eq!(r.json()["recorded"], 2);

    let r = f
        .http
        .get("/reports/export?format=csv&scope=class:C0001", &t);
    assert_eq!(r.status, StatusCode::OK);
    assert_eq!(r.content_type.as_deref(), Some("text/csv; charset=utf-8"));
    let text = r.text();
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some("student_id,outcome_code,scope,score,attained,evidence_count")
    );
    assert_eq!(lines.next(), Some("U0004,PO-A,class:C0001,0.6667,false,1"));
    assert_eq!(lines.next(), None);
    let r = f
        .http
        .get("/reports/export?format=json&scope=class:C0001", &t);
    assert_eq!(r.content_type.as_deref(), Some("application/json"));
    assert_eq!(r.json()["scope"], "class:C0001");
}

#[test]
fn credentials_never_leave_the_server() {
    let f = fixture();
    let t = f.token(HEAD);
    let mut bodies = Vec::new();
    let r = f.http.post(
        "/users",
        &t,
        json!({"display_name": "New Person", "role": "student", "password": "yet-another-9"}),
    );
    assert_eq!(r.status, StatusCode::CREATED);
    let id = r.json()["user_id"].as_str().unwrap().to_string();
    bodies.push(r.text());
    let r = f.http.call(
        "PUT",
        &format!("/users/{id}"),
        Some(&t),
        Payload::Json(json!({"password": "changed-pass-3"})),
    );
    assert_eq!(r.status, StatusCode::OK);
    bodies.push(r.text());
    bodies.push(
        f.http
            .call(
                "POST",
                "/auth/token",
                None,
                Payload::Json(json!({"username": id, "password": "changed-pass-3"})),
            )
            .text(),
    );
    for p in [
        "/settings",
        "/reports/export?format=json",
        "/reports/export?format=csv",
        "/classes/C0001/gradebook",
    ] {
        bodies.push(f.http.get(p, &t).text());
    }
    for b in bodies {
        for needle in ["password", "pbkdf2", "changed-pass-3"] {
            assert!(!b.contains(needle), "`{needle}` in {b}");
        }
    }
}
