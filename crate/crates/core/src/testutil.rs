//! Small fixture shared by unit tests.

use chrono::TimeZone;

use crate::model::*;
use crate::state::{Op, State};

pub fn t0() -> Timestamp {
    chrono::Utc.with_ymd_and_hms(2024, 8, 1, 9, 0, 0).unwrap()
}

pub fn account(id: &str, role: Role) -> UserRecord {
    UserRecord {
        account: UserAccount {
            user_id: id.into(),
            display_name: format!("User {id}"),
            role,
            email: None,
            active: true,
        },
        password_hash: None,
    }
}

pub fn student_record(id: &str) -> UserRecord {
    account(id, Role::Student)
}

pub fn head() -> Actor {
    Actor::new("h1", Role::DepartmentHead)
}

pub fn instructor() -> Actor {
    Actor::new("i1", Role::Instructor)
}

pub fn student(id: &str) -> Actor {
    Actor::new(id, Role::Student)
}

/// Levels 1..4 with the given weight and outcome mappings.
pub fn crit(id: &str, weight: f64, maps: &[(&str, f64)]) -> Criterion {
    Criterion {
        criterion_id: id.into(),
        description: format!("criterion {id}"),
        min_level: 1,
        max_level: 4,
        level_descriptors: Vec::new(),
        weight,
        mappings: maps
            .iter()
            .map(|(code, w)| OutcomeMapping {
                outcome_code: (*code).into(),
                map_weight: *w,
            })
            .collect(),
    }
}

pub fn apply_all(st: &mut State, ops: &[Op]) {
    for op in ops {
        st.apply(op).unwrap();
    }
}

/// h1 heads the department; i1 teaches C0001 (s1, s2) and i2 teaches the
/// empty C0002. Both are CS101 sections in 2024-1. s3 is not enrolled.
pub fn base_state() -> State {
    let mut st = State::default();
    for (id, role) in [
        ("h1", Role::DepartmentHead),
        ("i1", Role::Instructor),
        ("i2", Role::Instructor),
        ("s1", Role::Student),
        ("s2", Role::Student),
        ("s3", Role::Student),
    ] {
        st.users.insert(id.into(), account(id, role));
    }
    for code in ["PO-A", "PO-B", "PO-C"] {
        st.outcomes.insert(
            (code.into(), "2023".into()),
            ProgramOutcome {
                outcome_code: code.into(),
                graduate_attribute: format!("attribute {code}"),
                curriculum_version: "2023".into(),
                active: true,
            },
        );
    }
    st.courses.insert(
        "CS101".into(),
        Course {
            course_code: "CS101".into(),
            title: "Programming 1".into(),
            units: 3.0,
        },
    );
    for (id, instructor, roster) in [("C0001", "i1", vec!["s1", "s2"]), ("C0002", "i2", vec![])] {
        st.classes.insert(
            id.into(),
            ClassSection {
                class_id: id.into(),
                course_code: "CS101".into(),
                term: "2024-1".into(),
                instructor_id: instructor.into(),
                roster: roster.into_iter().map(UserId::from).collect(),
            },
        );
    }
    st
}
