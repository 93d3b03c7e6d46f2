//! Fixture store and an in-process HTTP client shared by the api tests.
#![allow(dead_code)]

use std::collections::BTreeMap;
use std::sync::Arc;

use axum::body::Body;
use axum::http::{header, Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use outcomes_core::*;
use tempfile::TempDir;
use tower::ServiceExt;

pub const PW: &str = "fixture-pass-1";

pub struct Resp {
    pub status: StatusCode,
    pub content_type: Option<String>,
    pub bytes: Vec<u8>,
}

impl Resp {
    pub fn json(&self) -> serde_json::Value {
        serde_json::from_slice(&self.bytes)
            .unwrap_or_else(|e| panic!("not json ({e}): {}", self.text()))
    }

    pub fn text(&self) -> String {
        String::from_utf8_lossy(&self.bytes).into_owned()
    }
}

pub enum Payload {
    None,
    Json(serde_json::Value),
    Raw(&'static str, Vec<u8>),
}

pub struct Http {
    app: Router,
    rt: tokio::runtime::Runtime,
}

impl Http {
    pub fn new(svc: Arc<Service>) -> Self {
        Self {
            app: outcomes_api::router(svc),
            rt: tokio::runtime::Builder::new_current_thread()
                .enable_all()
                .build()
                .unwrap(),
        }
    }

    /// `path` is relative to the api prefix unless it starts with `//`.
    pub fn call(&self, method: &str, path: &str, token: Option<&str>, body: Payload) -> Resp {
        let uri = match path.strip_prefix("//") {
            Some(root) => format!("/{root}"),
            None => format!("{}{path}", outcomes_api::API_PREFIX),
        };
        let mut req = Request::builder().method(method).uri(uri);
        if let Some(t) = token {
            req = req.header(header::AUTHORIZATION, format!("Bearer {t}"));
        }
        let req = match body {
            Payload::None => req.body(Body::empty()),
            Payload::Json(v) => req
                .header(header::CONTENT_TYPE, "application/json")
                .body(Body::from(serde_json::to_vec(&v).unwrap())),
            Payload::Raw(ctype, bytes) => req
                .header(header::CONTENT_TYPE, ctype)
                .body(Body::from(bytes)),
        }
        .unwrap();
        self.rt.block_on(async {
            let res = self.app.clone().oneshot(req).await.unwrap();
            let status = res.status();
            let content_type = res
                .headers()
                .get(header::CONTENT_TYPE)
                .map(|v| v.to_str().unwrap().to_string());
            let bytes = res.into_body().collect().await.unwrap().to_bytes().to_vec();
            Resp {
                status,
                content_type,
                bytes,
            }
        })
    }

    pub fn get(&self, path: &str, token: &str) -> Resp {
        self.call("GET", path, Some(token), Payload::None)
    }

    pub fn post(&self, path: &str, token: &str, body: serde_json::Value) -> Resp {
        self.call("POST", path, Some(token), Payload::Json(body))
    }
}

/// Two CS101 sections in term 2024-1.
///
/// | id    | who                         |
/// |-------|-----------------------------|
/// | U0001 | department head             |
/// | U0002 | instructor of C0001         |
/// | U0003 | instructor of C0002         |
/// | U0004 | student in C0001, evaluated |
/// | U0005 | student in C0001            |
/// | U0006 | student in C0002, evaluated |
///
/// Rubric R0001 has one criterion `c1` (levels 1..4) mapped to PO-A.
/// Each class has one component and one item (GI0001, GI0002). Skill
/// SK0001 belongs to CS101.
pub struct Fixture {
    pub dir: TempDir,
    pub svc: Arc<Service>,
    pub http: Http,
}

pub const HEAD: &str = "U0001";
pub const I1: &str = "U0002";
pub const I2: &str = "U0003";
pub const S1: &str = "U0004";
pub const S2: &str = "U0005";
pub const S3: &str = "U0006";

pub fn empty_service(dir: &TempDir) -> Service {
    Service::new(Store::open(dir.path()).unwrap()).with_hash_iterations(1)
}

pub fn criterion(id: &str, lo: i64, hi: i64, weight: f64, maps: &[(&str, f64)]) -> Criterion {
    Criterion {
        criterion_id: id.into(),
        description: format!("criterion {id}"),
        min_level: lo,
        max_level: hi,
        level_descriptors: Vec::new(),
        weight,
        mappings: maps
            .iter()
            .map(|(c, w)| OutcomeMapping {
                outcome_code: (*c).into(),
                map_weight: *w,
            })
            .collect(),
    }
}

pub fn fixture() -> Fixture {
    let dir = tempfile::tempdir().unwrap();
    let svc = empty_service(&dir);
    let op = Actor::operator();
    for (name, role) in [
        ("Hana Head", Role::DepartmentHead),
        ("Ira One", Role::Instructor),
        ("Ivo Two", Role::Instructor),
        ("Sam One", Role::Student),
        ("Sue Two", Role::Student),
        ("Sid Three", Role::Student),
    ] {
        svc.create_user(&op, name, role, None, PW).unwrap();
    }
    let head = Actor::new(HEAD, Role::DepartmentHead);
    svc.upsert_outcome(&head, "PO-A", "Apply computing knowledge", "2023", None)
        .unwrap();
    svc.create_course(&head, "CS101", "Programming 1", 3.0)
        .unwrap();
    let c1 = svc
        .create_class(&head, &"CS101".into(), "2024-1", &I1.into())
        .unwrap();
    let c2 = svc
        .create_class(&head, &"CS101".into(), "2024-1", &I2.into())
        .unwrap();
    assert_eq!(
        (c1.class_id.as_str(), c2.class_id.as_str()),
        ("C0001", "C0002")
    );
    svc.enroll(&head, &c1.class_id, &S1.into()).unwrap();
    svc.enroll(&head, &c1.class_id, &S2.into()).unwrap();
    svc.enroll(&head, &c2.class_id, &S3.into()).unwrap();
    let r = svc
        .define_rubric(
            &head,
            "Lab",
            vec![criterion("c1", 1, 4, 1.0, &[("PO-A", 1.0)])],
        )
        .unwrap();
    let lv = |n| BTreeMap::from([("c1".into(), n)]);
    svc.record_evaluation(&head, &c1.class_id, &r.rubric_id, &S1.into(), lv(3))
        .unwrap();
    svc.record_evaluation(&head, &c2.class_id, &r.rubric_id, &S3.into(), lv(4))
        .unwrap();
    for c in [&c1, &c2] {
        let comps = svc
            .define_grade_components(&head, &c.class_id, &[("All".to_string(), 1.0)])
            .unwrap();
        svc.add_grade_item(&head, &c.class_id, &comps[0].component_id, "Quiz", 10.0)
            .unwrap();
    }
    svc.create_skill(&head, "debugging", &"CS101".into())
        .unwrap();
    let svc = Arc::new(svc);
    Fixture {
        dir,
        http: Http::new(svc.clone()),
        svc,
    }
}

impl Fixture {
    pub fn token(&self, user: &str) -> String {
        self.svc.login(user, PW).unwrap().token
    }
}
