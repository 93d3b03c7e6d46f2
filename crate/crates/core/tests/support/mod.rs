//! Builders shared by the core integration tests.
#![allow(dead_code)]

use std::collections::BTreeSet;

use outcomes_core::*;

pub const PW: &str = "support-pass-1";

pub fn head() -> Actor {
    Actor::new("U0001", Role::DepartmentHead)
}

pub fn service(dir: &tempfile::TempDir) -> Service {
    Service::new(Store::open(dir.path()).unwrap()).with_hash_iterations(1)
}

pub fn account(id: &str, role: Role) -> Op {
    Op::CreateUser(UserRecord {
        account: UserAccount {
            user_id: id.into(),
            display_name: format!("User {id}"),
            role,
            email: None,
            active: true,
        },
        password_hash: None,
    })
}

pub fn outcome(code: &str, version: &str) -> Op {
    Op::PutOutcome(ProgramOutcome {
        outcome_code: code.into(),
        graduate_attribute: format!("Attribute {code}"),
        curriculum_version: version.into(),
        active: true,
    })
}

pub fn class(id: &str, term: &str, instructor: &str) -> Op {
    Op::CreateClass(ClassSection {
        class_id: id.into(),
        course_code: "CS101".into(),
        term: term.into(),
        instructor_id: instructor.into(),
        roster: BTreeSet::new(),
    })
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

pub fn evaluation(
    id: &str,
    class: &str,
    rubric: &str,
    student: &str,
    levels: &[(&str, i64)],
) -> Op {
    Op::RecordEvaluation(EvaluationRecord {
        evaluation_id: id.into(),
        class_id: class.into(),
        rubric_id: rubric.into(),
        student_id: student.into(),
        levels: levels.iter().map(|(c, l)| ((*c).into(), *l)).collect(),
        evaluator_id: "U0001".into(),
        recorded_at: "2024-08-01T09:00:00Z".parse().unwrap(),
    })
}

/// Head U0001, instructor I1, course CS101 and outcomes PO-A, PO-B (2023).
pub fn base_ops() -> Vec<Op> {
    vec![
        account("U0001", Role::DepartmentHead),
        account("I1", Role::Instructor),
        outcome("PO-A", "2023"),
        outcome("PO-B", "2023"),
        Op::CreateCourse(Course {
            course_code: "CS101".into(),
            title: "Programming 1".into(),
            units: 3.0,
        }),
    ]
}

pub fn commit(store: &Store, ops: Vec<Op>) -> u64 {
    store
        .commit(ChangeSet::new(store.commit_count(), ops))
        .unwrap()
}
