//! Deterministic demo cohort.
//!
//! 30 students, 2 instructors and a department head; two CS sections in
//! consecutive terms sharing ten students; five program outcomes; two
//! rubrics; evaluations, grades and skill ratings drawn from a ChaCha
//! stream so the same seed always yields the same records. Only password
//! salts differ between runs.

use std::collections::BTreeMap;

use chrono::{Duration, TimeZone, Utc};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::credential::PasswordHash;
use crate::domain::{self, Planned};
use crate::error::{DomainError, Result};
use crate::gradebook;
use crate::model::*;
use crate::state::{Op, State};
use crate::store::{ChangeSet, CommitId, Store};

pub const DEMO_SEED: u64 = 20_240_601;
pub const DEMO_PASSWORD: &str = "demo-pass-1";
pub const DEMO_STUDENTS: usize = 30;
pub const DEMO_CURRICULUM: &str = "2023";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DemoSummary {
    pub commit_id: CommitId,
    pub head: UserId,
    pub instructors: Vec<UserId>,
    pub students: Vec<UserId>,
    pub classes: Vec<ClassId>,
    pub outcomes: Vec<OutcomeCode>,
    pub rubrics: Vec<RubricId>,
    pub evaluations: usize,
}

/// Plans every op on a scratch copy so later steps see earlier ones.
struct Builder {
    state: State,
    ops: Vec<Op>,
    actor: Actor,
    clock: Timestamp,
}

impl Builder {
    fn run<T>(
        &mut self,
        f: impl FnOnce(&State, &Actor, Timestamp) -> Result<Planned<T>>,
    ) -> Result<T> {
        self.clock += Duration::seconds(1);
        let p = f(&self.state, &self.actor, self.clock)?;
        for op in &p.ops {
            self.state.apply(op)?;
        }
        self.ops.extend(p.ops);
        Ok(p.output)
    }
}

fn criterion(id: &str, desc: &str, max_level: i64, weight: f64, maps: &[(&str, f64)]) -> Criterion {
    Criterion {
        criterion_id: id.into(),
        description: desc.into(),
        min_level: 1,
        max_level,
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

/// A level skewed towards the upper half, as real cohorts tend to be.
fn level(rng: &mut ChaCha8Rng, c: &Criterion, ability: f64) -> i64 {
    let span = (c.max_level - c.min_level) as f64;
    let x = (ability + rng.random_range(-0.35..0.35)).clamp(0.0, 1.0);
    c.min_level + (x * span).round() as i64
}

/// Seeds an empty store with the demo cohort in a single commit.
pub fn seed_demo(store: &Store, seed: u64, hash_iterations: u32) -> Result<DemoSummary> {
    let snap = store.snapshot();
    if !snap.users.is_empty() || !snap.classes.is_empty() {
        return Err(DomainError::Validation(
            "seed-demo needs an empty store".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let password = PasswordHash::create_with_iterations(DEMO_PASSWORD, hash_iterations)?;
    let mut b = Builder {
        state: snap.state().clone(),
        ops: Vec::new(),
        actor: Actor::operator(),
        clock: Utc.with_ymd_and_hms(2024, 6, 1, 8, 0, 0).unwrap(),
    };

    let user = |b: &mut Builder, name: &str, role: Role| -> Result<UserId> {
        let email = Some(format!(
            "{}@demo.edu",
            name.to_ascii_lowercase().replace(' ', ".")
        ));
        b.run(|st, a, _| domain::create_user(st, a, name, role, email, password.clone()))
            .map(|u| u.user_id)
    };
    let head = user(&mut b, "Dean Santos", Role::DepartmentHead)?;
    let instructors = vec![
        user(&mut b, "Ana Reyes", Role::Instructor)?,
        user(&mut b, "Ben Cruz", Role::Instructor)?,
    ];
    const FIRST: [&str; 10] = [
        "Aira", "Bea", "Carlo", "Dan", "Ela", "Fe", "Gino", "Hana", "Ivan", "Jo",
    ];
    const LAST: [&str; 3] = ["Lim", "Tan", "Uy"];
    let mut students = Vec::new();
    for n in 0..DEMO_STUDENTS {
        let name = format!("{} {}", FIRST[n % 10], LAST[n / 10]);
        students.push(user(&mut b, &name, Role::Student)?);
    }

    let attributes = [
        ("PO-A", "Apply knowledge of computing and mathematics"),
        (
            "PO-B",
            "Analyze a problem and specify its computing requirements",
        ),
        ("PO-C", "Design and evaluate computer-based solutions"),
        ("PO-D", "Communicate effectively with a range of audiences"),
        ("PO-E", "Function effectively on teams"),
    ];
    let mut outcomes = Vec::new();
    for (code, text) in attributes {
        b.run(|st, a, _| domain::upsert_program_outcome(st, a, code, text, DEMO_CURRICULUM, None))?;
        outcomes.push(OutcomeCode::from(code));
    }

    b.run(|st, a, _| domain::create_course(st, a, "CS101", "Programming 1", 3.0))?;
    b.run(|st, a, _| domain::create_course(st, a, "CS102", "Programming 2", 3.0))?;
    let sections = [
        ("CS101", "2024-1", 0, 0..20),
        ("CS102", "2024-2", 1, 10..30),
    ];
    let mut classes = Vec::new();
    for (course, term, inst, range) in sections.clone() {
        let c = b.run(|st, a, _| {
            domain::create_class_section(st, a, &course.into(), term, &instructors[inst])
        })?;
        for s in &students[range] {
            b.run(|st, a, _| domain::enroll_student(st, a, &c.class_id, s))?;
        }
        classes.push(c.class_id);
    }

    let project = b.run(|st, a, _| {
        domain::define_rubric(
            st,
            a,
            "Programming project",
            vec![
                criterion(
                    "correctness",
                    "Program produces correct results",
                    4,
                    3.0,
                    &[("PO-A", 1.0), ("PO-C", 0.5)],
                ),
                criterion(
                    "analysis",
                    "Problem analysis and specification",
                    4,
                    2.0,
                    &[("PO-B", 1.0)],
                ),
                criterion(
                    "design",
                    "Solution design and structure",
                    5,
                    2.0,
                    &[("PO-C", 1.0)],
                ),
            ],
        )
    })?;
    let presentation = b.run(|st, a, _| {
        domain::define_rubric(
            st,
            a,
            "Project presentation",
            vec![
                criterion(
                    "delivery",
                    "Clarity of oral delivery",
                    4,
                    1.0,
                    &[("PO-D", 1.0)],
                ),
                criterion(
                    "teamwork",
                    "Division of work within the team",
                    4,
                    1.0,
                    &[("PO-E", 1.0)],
                ),
                criterion(
                    "demo",
                    "Live demonstration of the solution",
                    4,
                    2.0,
                    &[("PO-C", 0.5), ("PO-D", 0.5)],
                ),
            ],
        )
    })?;
    let rubrics = vec![project.rubric_id.clone(), presentation.rubric_id.clone()];

    // per-student ability so outcomes correlate across evaluations
    let ability: BTreeMap<UserId, f64> = students
        .iter()
        .map(|s| (s.clone(), rng.random_range(0.25..1.0)))
        .collect();

    let mut evaluations = 0;
    for (k, class_id) in classes.iter().enumerate() {
        b.actor = Actor::new(
            b.state.classes[class_id].instructor_id.clone(),
            Role::Instructor,
        );
        let roster: Vec<UserId> = b.state.classes[class_id].roster.iter().cloned().collect();
        let used: &[&Rubric] = if k == 0 {
            &[&project]
        } else {
            &[&project, &presentation]
        };
        for s in &roster {
            // about one in ten students has no evaluation in a class
            if rng.random_range(0..10) == 0 {
                continue;
            }
            for rubric in used {
                let levels: BTreeMap<CriterionId, i64> = rubric
                    .criteria
                    .iter()
                    .map(|c| (c.criterion_id.clone(), level(&mut rng, c, ability[s])))
                    .collect();
                b.run(|st, a, now| {
                    domain::record_evaluation(st, a, class_id, &rubric.rubric_id, s, levels, now)
                })?;
                evaluations += 1;
            }
        }

        let comps = b.run(|st, a, _| {
            gradebook::define_grade_components(
                st,
                a,
                class_id,
                &[("Quizzes".to_string(), 0.4), ("Exam".to_string(), 0.6)],
            )
        })?;
        let mut items = Vec::new();
        for (comp, title, max) in [
            (0, "Quiz 1", 20.0),
            (0, "Quiz 2", 10.0),
            (1, "Final exam", 100.0),
        ] {
            let it = b.run(|st, a, _| {
                gradebook::add_grade_item(st, a, class_id, &comps[comp].component_id, title, max)
            })?;
            items.push(it);
        }
        for s in &roster {
            for it in &items {
                let x = (ability[s] + rng.random_range(-0.2..0.2)).clamp(0.0, 1.0);
                let raw = (x * it.max_points).round();
                b.run(|st, a, now| {
                    gradebook::record_score(st, a, class_id, s, &it.item_id, raw, now)
                })?;
            }
        }

        let course = b.state.classes[class_id].course_code.clone();
        for name in ["debugging", "testing"] {
            let sk = b.run(|st, a, _| domain::create_skill(st, a, name, &course))?;
            for s in &roster {
                let score = (ability[s] * 100.0 + rng.random_range(-10.0..10.0))
                    .clamp(0.0, 100.0)
                    .round();
                b.run(|st, a, now| {
                    domain::record_skill_rating(st, a, s, &sk.skill_id, class_id, score, now)
                })?;
            }
        }
    }

    let commit_id = store.commit(ChangeSet::new(snap.commit_id(), b.ops))?;
    Ok(DemoSummary {
        commit_id,
        head,
        instructors,
        students,
        classes,
        outcomes,
        rubrics,
        evaluations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_records() {
        let (d1, d2) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
        let (s1, s2) = (
            Store::open(d1.path()).unwrap(),
            Store::open(d2.path()).unwrap(),
        );
        let a = seed_demo(&s1, DEMO_SEED, 1).unwrap();
        let b = seed_demo(&s2, DEMO_SEED, 1).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.students.len(), 30);
        assert_eq!(a.classes.len(), 2);
        assert_eq!(a.outcomes.len(), 5);
        assert_eq!(a.rubrics.len(), 2);
        let (x, y) = (s1.snapshot(), s2.snapshot());
        assert_eq!(x.evaluations, y.evaluations);
        assert_eq!(x.scores, y.scores);
        assert!(seed_demo(&s1, DEMO_SEED, 1).is_err());
    }

    #[test]
    fn gradebooks_are_finalizable() {
        let d = tempfile::tempdir().unwrap();
        let s = Store::open(d.path()).unwrap();
        let demo = seed_demo(&s, 7, 1).unwrap();
        let snap = s.snapshot();
        for c in &demo.classes {
            let g = gradebook::class_grade_summary(&snap, c, &snap.settings.grade_scale).unwrap();
            assert_eq!(g.rows.len(), 20);
            assert!(g.incomplete.is_empty());
        }
    }
}
