//! Outcome attainment analytics.
//!
//! Every (evaluation, criterion) pair whose criterion maps onto an outcome
//! is one piece of evidence for that outcome: its value is the chosen
//! level normalized onto `[0, 1]` and its weight is
//! `criterion.weight × map_weight`. A student's attainment score is the
//! weighted mean of their evidence within a scope, and the outcome counts
//! as attained when the score reaches the threshold (inclusive).
//!
//! Class rates, pie-chart distributions, program rollups and term trends
//! are all built from those per-student records. Rollups and trends pool
//! one record per (student, class), so a student evaluated in two classes
//! counts twice.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::bands::BandScheme;
use crate::error::{DomainError, Result};
use crate::model::*;
use crate::numeric::{normalize_level, reaches, round_half_up, weighted_mean};
use crate::scope::Scope;
use crate::settings::check_threshold;
use crate::state::State;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttainmentRecord {
    pub student_id: UserId,
    pub outcome_code: OutcomeCode,
    pub scope: Scope,
    pub score: f64,
    pub attained: bool,
    pub evidence_count: usize,
}

/// One weighted observation of an outcome.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Evidence {
    pub value: f64,
    pub weight: f64,
}

/// Evidence for `outcome` from `student`'s evaluations in classes within `scope`.
pub fn evidence(
    state: &State,
    student: &UserId,
    outcome: &OutcomeCode,
    scope: &Scope,
) -> Result<Vec<Evidence>> {
    let mut out = Vec::new();
    for ev in state.evaluations.values() {
        if &ev.student_id != student {
            continue;
        }
        let class = state.class(&ev.class_id)?;
        if !scope.includes(class) {
            continue;
        }
        let rubric = state.rubric(&ev.rubric_id)?;
        for criterion in &rubric.criteria {
            let Some(map_weight) = criterion.mapping_for(outcome) else {
                continue;
            };
            let level = *ev.levels.get(&criterion.criterion_id).ok_or_else(|| {
                DomainError::IncompleteEvaluation(vec![criterion.criterion_id.to_string()])
            })?;
            out.push(Evidence {
                value: normalize_level(level, criterion.min_level, criterion.max_level)?,
                weight: criterion.weight * map_weight,
            });
        }
    }
    Ok(out)
}

pub fn student_outcome_attainment(
    state: &State,
    student: &UserId,
    outcome: &OutcomeCode,
    scope: &Scope,
    threshold: f64,
) -> Result<AttainmentRecord> {
    check_threshold(threshold)?;
    if !state.outcome_code_exists(outcome) {
        return Err(DomainError::UnknownOutcome(outcome.to_string()));
    }
    let pairs = evidence(state, student, outcome, scope)?;
    if pairs.is_empty() {
        return Err(DomainError::NoEvidence);
    }
    let values: Vec<f64> = pairs.iter().map(|e| e.value).collect();
    let weights: Vec<f64> = pairs.iter().map(|e| e.weight).collect();
    let score = weighted_mean(&values, &weights)?;
    Ok(AttainmentRecord {
        student_id: student.clone(),
        outcome_code: outcome.clone(),
        scope: scope.clone(),
        score,
        attained: reaches(score, threshold),
        evidence_count: pairs.len(),
    })
}

/// Same as [`student_outcome_attainment`] but maps `NoEvidence` to `None`.
pub fn try_attainment(
    state: &State,
    student: &UserId,
    outcome: &OutcomeCode,
    scope: &Scope,
    threshold: f64,
) -> Result<Option<AttainmentRecord>> {
    match student_outcome_attainment(state, student, outcome, scope, threshold) {
        Ok(r) => Ok(Some(r)),
        Err(DomainError::NoEvidence) => Ok(None),
        Err(e) => Err(e),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassAttainment {
    pub class_id: ClassId,
    pub outcome_code: OutcomeCode,
    pub threshold: f64,
    pub rate: f64,
    pub attained: usize,
    pub evaluated: usize,
    /// Enrolled students without evidence; excluded from the rate.
    pub no_evidence: Vec<UserId>,
    pub records: Vec<AttainmentRecord>,
}

pub fn class_attainment_rate(
    state: &State,
    class_id: &ClassId,
    outcome: &OutcomeCode,
    threshold: f64,
) -> Result<ClassAttainment> {
    check_threshold(threshold)?;
    let class = state.class(class_id)?;
    let scope = Scope::Class(class_id.clone());
    let mut records = Vec::new();
    let mut no_evidence = Vec::new();
    for student in &class.roster {
        match try_attainment(state, student, outcome, &scope, threshold)? {
            Some(r) => records.push(r),
            None => no_evidence.push(student.clone()),
        }
    }
    if records.is_empty() {
        return Err(DomainError::NoEvaluatedStudents);
    }
    let attained = records.iter().filter(|r| r.attained).count();
    Ok(ClassAttainment {
        class_id: class_id.clone(),
        outcome_code: outcome.clone(),
        threshold,
        rate: attained as f64 / records.len() as f64,
        attained,
        evaluated: records.len(),
        no_evidence,
        records,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BandCount {
    pub label: String,
    pub count: usize,
}

/// Pie-chart payload: how many records fall in each band, in scheme order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Distribution {
    pub scope: Scope,
    pub outcome_code: OutcomeCode,
    pub bands: Vec<BandCount>,
    pub total: usize,
}

impl Distribution {
    pub fn tally(
        scope: Scope,
        outcome: OutcomeCode,
        scheme: &BandScheme,
        scores: impl IntoIterator<Item = f64>,
    ) -> Result<Self> {
        let mut counts = vec![0usize; scheme.bands.len()];
        for s in scores {
            counts[scheme.band_index(s)?] += 1;
        }
        Ok(Self {
            scope,
            outcome_code: outcome,
            total: counts.iter().sum(),
            bands: scheme
                .labels()
                .zip(counts)
                .map(|(label, count)| BandCount {
                    label: label.to_string(),
                    count,
                })
                .collect(),
        })
    }
}

fn require_unit_domain(scheme: &BandScheme) -> Result<()> {
    scheme.validate()?;
    if scheme.lo != 0.0 || scheme.hi != 1.0 {
        return Err(DomainError::InvalidScale(
            "attainment bands must cover [0, 1]".into(),
        ));
    }
    Ok(())
}

/// Students enrolled in any class within `scope`.
pub fn students_in_scope(state: &State, scope: &Scope) -> BTreeSet<UserId> {
    state
        .classes
        .values()
        .filter(|c| scope.includes(c))
        .flat_map(|c| c.roster.iter().cloned())
        .collect()
}

/// One record per student with evidence anywhere in `scope`.
pub fn scope_records(
    state: &State,
    scope: &Scope,
    outcome: &OutcomeCode,
    threshold: f64,
) -> Result<Vec<AttainmentRecord>> {
    let mut out = Vec::new();
    for student in students_in_scope(state, scope) {
        if let Some(r) = try_attainment(state, &student, outcome, scope, threshold)? {
            out.push(r);
        }
    }
    Ok(out)
}

pub fn distribution(
    state: &State,
    scope: &Scope,
    outcome: &OutcomeCode,
    scheme: &BandScheme,
    threshold: f64,
) -> Result<Distribution> {
    require_unit_domain(scheme)?;
    check_threshold(threshold)?;
    if !state.outcome_code_exists(outcome) {
        return Err(DomainError::UnknownOutcome(outcome.to_string()));
    }
    let records = scope_records(state, scope, outcome, threshold)?;
    if records.is_empty() {
        return Err(DomainError::NoEvaluatedStudents);
    }
    Distribution::tally(
        scope.clone(),
        outcome.clone(),
        scheme,
        records.iter().map(|r| r.score),
    )
}

/// One record per (class, student) pair with evidence in that class.
pub fn pooled_records<'a>(
    state: &State,
    classes: impl IntoIterator<Item = &'a ClassSection>,
    outcome: &OutcomeCode,
    threshold: f64,
) -> Result<Vec<AttainmentRecord>> {
    let mut out = Vec::new();
    for class in classes {
        let scope = Scope::Class(class.class_id.clone());
        for student in &class.roster {
            if let Some(r) = try_attainment(state, student, outcome, &scope, threshold)? {
                out.push(r);
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutcomeRollup {
    pub outcome_code: OutcomeCode,
    pub no_evidence: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rate: Option<f64>,
    pub attained: usize,
    pub evaluated: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub distribution: Option<Distribution>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProgramRollup {
    pub curriculum_version: String,
    pub from_term: String,
    pub to_term: String,
    pub threshold: f64,
    pub classes: Vec<ClassId>,
    pub outcomes: Vec<OutcomeRollup>,
}

/// Pooled attainment per outcome of `curriculum_version` over all classes
/// whose term lies in `from_term..=to_term`.
pub fn program_rollup(
    state: &State,
    curriculum_version: &str,
    from_term: &str,
    to_term: &str,
    threshold: f64,
    scheme: &BandScheme,
) -> Result<ProgramRollup> {
    check_threshold(threshold)?;
    require_unit_domain(scheme)?;
    let scope = Scope::Terms {
        from: from_term.to_string(),
        to: to_term.to_string(),
    };
    let classes: Vec<&ClassSection> = state
        .classes
        .values()
        .filter(|c| scope.includes(c))
        .collect();
    if classes.is_empty() {
        return Err(DomainError::EmptyScope);
    }
    let codes: BTreeSet<&OutcomeCode> = state
        .outcomes
        .keys()
        .filter(|(_, v)| v == curriculum_version)
        .map(|(c, _)| c)
        .collect();

    let mut outcomes = Vec::new();
    for code in codes {
        let records = pooled_records(state, classes.iter().copied(), code, threshold)?;
        let attained = records.iter().filter(|r| r.attained).count();
        let entry = if records.is_empty() {
            OutcomeRollup {
                outcome_code: code.clone(),
                no_evidence: true,
                rate: None,
                attained: 0,
                evaluated: 0,
                distribution: None,
            }
        } else {
            OutcomeRollup {
                outcome_code: code.clone(),
                no_evidence: false,
                rate: Some(attained as f64 / records.len() as f64),
                attained,
                evaluated: records.len(),
                distribution: Some(Distribution::tally(
                    scope.clone(),
                    code.clone(),
                    scheme,
                    records.iter().map(|r| r.score),
                )?),
            }
        };
        outcomes.push(entry);
    }
    Ok(ProgramRollup {
        curriculum_version: curriculum_version.to_string(),
        from_term: from_term.to_string(),
        to_term: to_term.to_string(),
        threshold,
        classes: classes.iter().map(|c| c.class_id.clone()).collect(),
        outcomes,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrendPoint {
    pub term: String,
    pub no_evidence: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rate: Option<f64>,
    pub attained: usize,
    pub evaluated: usize,
}

/// Pooled attainment rate per term, in the order given. An outcome that is
/// not part of `curriculum_version` has no evidence in any term.
pub fn term_trend(
    state: &State,
    outcome: &OutcomeCode,
    curriculum_version: &str,
    terms: &[String],
    threshold: f64,
) -> Result<Vec<TrendPoint>> {
    check_threshold(threshold)?;
    let in_version = state
        .outcomes
        .contains_key(&(outcome.clone(), curriculum_version.to_string()));
    let mut out = Vec::with_capacity(terms.len());
    for term in terms {
        let records = if in_version {
            let classes = state.classes.values().filter(|c| &c.term == term);
            pooled_records(state, classes, outcome, threshold)?
        } else {
            Vec::new()
        };
        let attained = records.iter().filter(|r| r.attained).count();
        out.push(TrendPoint {
            term: term.clone(),
            no_evidence: records.is_empty(),
            rate: (!records.is_empty()).then(|| attained as f64 / records.len() as f64),
            attained,
            evaluated: records.len(),
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkillSummary {
    pub skill_id: SkillId,
    pub name: String,
    /// Mean effective score, two decimals.
    pub mean: f64,
    pub count: usize,
}

pub fn skills_summary(state: &State, class_id: &ClassId) -> Result<Vec<SkillSummary>> {
    state.class(class_id)?;
    let mut out = Vec::new();
    for skill in state.skills.values() {
        let scores: Vec<f64> = state
            .skill_ratings
            .values()
            .filter(|r| &r.class_id == class_id && r.skill_id == skill.skill_id)
            .map(|r| r.score)
            .collect();
        if scores.is_empty() {
            continue;
        }
        out.push(SkillSummary {
            skill_id: skill.skill_id.clone(),
            name: skill.name.clone(),
            mean: round_half_up(scores.iter().sum::<f64>() / scores.len() as f64, 2),
            count: scores.len(),
        });
    }
    out.sort_by(|a, b| {
        a.name
            .cmp(&b.name)
            .then_with(|| a.skill_id.cmp(&b.skill_id))
    });
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudentOutcome {
    pub outcome_code: OutcomeCode,
    pub no_evidence: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub score: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub attained: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub band: Option<String>,
    pub evidence_count: usize,
}

/// A student's own feedback page: every outcome with score and band.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudentAttainmentView {
    pub student_id: UserId,
    pub scope: Scope,
    pub threshold: f64,
    pub outcomes: Vec<StudentOutcome>,
}

pub fn student_attainment_view(
    state: &State,
    student: &UserId,
    scope: &Scope,
    threshold: f64,
    scheme: &BandScheme,
) -> Result<StudentAttainmentView> {
    require_unit_domain(scheme)?;
    state.require_role(student, Role::Student)?;
    let mut outcomes = Vec::new();
    for code in state.outcome_codes() {
        let entry = match try_attainment(state, student, &code, scope, threshold)? {
            Some(r) => StudentOutcome {
                outcome_code: code,
                no_evidence: false,
                score: Some(r.score),
                attained: Some(r.attained),
                band: Some(scheme.band_of(r.score)?.to_string()),
                evidence_count: r.evidence_count,
            },
            None => StudentOutcome {
                outcome_code: code,
                no_evidence: true,
                score: None,
                attained: None,
                band: None,
                evidence_count: 0,
            },
        };
        outcomes.push(entry);
    }
    Ok(StudentAttainmentView {
        student_id: student.clone(),
        scope: scope.clone(),
        threshold,
        outcomes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::*;
    use std::collections::BTreeMap;

    /// Rubric R0001 with `(criterion, weight, levels min..max, mappings)`.
    fn with_rubric(st: &mut State, criteria: Vec<Criterion>) -> RubricId {
        let p = crate::domain::define_rubric(st, &head(), "rubric", criteria).unwrap();
        apply_all(st, &p.ops);
        p.output.rubric_id
    }

    fn evaluate(
        st: &mut State,
        class: &str,
        rubric: &RubricId,
        student: &str,
        levels: &[(&str, i64)],
    ) {
        let levels: BTreeMap<CriterionId, i64> = levels
            .iter()
            .map(|(c, l)| (CriterionId::new(*c), *l))
            .collect();
        let p = crate::domain::record_evaluation(
            st,
            &head(),
            &class.into(),
            rubric,
            &student.into(),
            levels,
            t0(),
        )
        .unwrap();
        apply_all(st, &p.ops);
    }

    fn crit5(id: &str, weight: f64, maps: &[(&str, f64)]) -> Criterion {
        // levels 0..10 so that a level of 9 normalizes to exactly 0.9
        let mut c = crit(id, weight, maps);
        c.min_level = 0;
        c.max_level = 10;
        c
    }

    #[test]
    fn weighted_evidence_example() {
        let mut st = base_state();
        let r = with_rubric(
            &mut st,
            vec![
                crit5("a", 2.0, &[("PO-A", 1.0)]),
                crit5("b", 1.0, &[("PO-A", 1.0)]),
            ],
        );
        evaluate(&mut st, "C0001", &r, "s1", &[("a", 9), ("b", 6)]);
        let rec = student_outcome_attainment(&st, &"s1".into(), &"PO-A".into(), &Scope::All, 0.70)
            .unwrap();
        // oracle: (2*0.9 + 1*0.6) / 3
        assert!((rec.score - 0.8).abs() < 1e-12);
        assert!(rec.attained);
        assert_eq!(rec.evidence_count, 2);
    }

    #[test]
    fn all_max_levels_score_one() {
        let mut st = base_state();
        let r = with_rubric(
            &mut st,
            vec![
                crit("a", 1.0, &[("PO-A", 1.0)]),
                crit("b", 3.0, &[("PO-A", 0.5)]),
            ],
        );
        evaluate(&mut st, "C0001", &r, "s1", &[("a", 4), ("b", 4)]);
        let rec = student_outcome_attainment(&st, &"s1".into(), &"PO-A".into(), &Scope::All, 1.0)
            .unwrap();
        assert_eq!(rec.score, 1.0);
        assert!(rec.attained);
    }

    #[test]
    fn no_evidence_is_not_zero() {
        let mut st = base_state();
        let r = with_rubric(&mut st, vec![crit("a", 1.0, &[("PO-A", 1.0)])]);
        evaluate(&mut st, "C0001", &r, "s1", &[("a", 1)]);
        let zero = student_outcome_attainment(&st, &"s1".into(), &"PO-A".into(), &Scope::All, 0.7)
            .unwrap();
        assert_eq!(zero.score, 0.0);
        assert!(matches!(
            student_outcome_attainment(&st, &"s2".into(), &"PO-A".into(), &Scope::All, 0.7),
            Err(DomainError::NoEvidence)
        ));
        assert!(matches!(
            student_outcome_attainment(&st, &"s1".into(), &"PO-B".into(), &Scope::All, 0.7),
            Err(DomainError::NoEvidence)
        ));
        assert!(matches!(
            student_outcome_attainment(&st, &"s1".into(), &"PO-A".into(), &Scope::All, 0.0),
            Err(DomainError::InvalidThreshold)
        ));
    }

    #[test]
    fn threshold_is_inclusive() {
        let mut st = base_state();
        let r = with_rubric(&mut st, vec![crit5("a", 1.0, &[("PO-A", 1.0)])]);
        evaluate(&mut st, "C0001", &r, "s1", &[("a", 7)]);
        let rec = student_outcome_attainment(&st, &"s1".into(), &"PO-A".into(), &Scope::All, 0.7)
            .unwrap();
        assert!(rec.attained, "score {} at θ=0.7", rec.score);
    }

    fn three_student_class() -> State {
        let mut st = base_state();
        st.users.insert("s3".into(), student_record("s3"));
        st.classes
            .get_mut("C0001")
            .unwrap()
            .roster
            .insert("s3".into());
        st.users.insert("s4".into(), student_record("s4"));
        st.classes
            .get_mut("C0001")
            .unwrap()
            .roster
            .insert("s4".into());
        let r = with_rubric(&mut st, vec![crit5("a", 1.0, &[("PO-A", 1.0)])]);
        evaluate(&mut st, "C0001", &r, "s1", &[("a", 8)]);
        evaluate(&mut st, "C0001", &r, "s2", &[("a", 7)]);
        evaluate(&mut st, "C0001", &r, "s3", &[("a", 5)]);
        st
    }

    #[test]
    fn class_rate_excludes_unevaluated() {
        let st = three_student_class();
        let rate = class_attainment_rate(&st, &"C0001".into(), &"PO-A".into(), 0.70).unwrap();
        // oracle: {0.8, 0.7, 0.5} at θ = 0.70 → 2 of 3
        assert_eq!(rate.attained, 2);
        assert_eq!(rate.evaluated, 3);
        assert!((rate.rate - 2.0 / 3.0).abs() < 1e-12);
        assert_eq!(rate.no_evidence, vec![UserId::from("s4")]);
        assert!(matches!(
            class_attainment_rate(&st, &"C0002".into(), &"PO-A".into(), 0.70),
            Err(DomainError::NoEvaluatedStudents)
        ));
        let all = class_attainment_rate(&st, &"C0001".into(), &"PO-A".into(), 0.5).unwrap();
        assert_eq!(all.rate, 1.0);
    }

    #[test]
    fn distribution_example() {
        let mut st = three_student_class();
        let r = RubricId::from("R0001");
        // replace s2/s3 picture with {0.9, 0.72, 0.72, 0.3} using levels on 0..50
        let mut c = crit("a", 1.0, &[("PO-B", 1.0)]);
        c.min_level = 0;
        c.max_level = 50;
        let r2 = with_rubric(&mut st, vec![c]);
        evaluate(&mut st, "C0001", &r2, "s1", &[("a", 45)]);
        evaluate(&mut st, "C0001", &r2, "s2", &[("a", 36)]);
        evaluate(&mut st, "C0001", &r2, "s3", &[("a", 36)]);
        evaluate(&mut st, "C0001", &r2, "s4", &[("a", 15)]);
        let _ = r;
        let d = distribution(
            &st,
            &Scope::Class("C0001".into()),
            &"PO-B".into(),
            &BandScheme::attainment_default(),
            0.7,
        )
        .unwrap();
        let counts: Vec<(&str, usize)> = d
            .bands
            .iter()
            .map(|b| (b.label.as_str(), b.count))
            .collect();
        assert_eq!(
            counts,
            [
                ("Exemplary", 1),
                ("Satisfactory", 2),
                ("Developing", 0),
                ("Beginning", 1)
            ]
        );
        assert_eq!(d.total, 4);
        assert!(matches!(
            distribution(
                &st,
                &Scope::Class("C0002".into()),
                &"PO-B".into(),
                &BandScheme::attainment_default(),
                0.7
            ),
            Err(DomainError::NoEvaluatedStudents)
        ));
        assert!(distribution(
            &st,
            &Scope::All,
            &"PO-B".into(),
            &BandScheme::likert5(),
            0.7
        )
        .is_err());
    }

    #[test]
    fn rollup_single_class_matches_class_rate() {
        let st = three_student_class();
        let roll = program_rollup(
            &st,
            "2023",
            "2024-1",
            "2024-1",
            0.7,
            &BandScheme::attainment_default(),
        )
        .unwrap();
        let a = roll
            .outcomes
            .iter()
            .find(|o| o.outcome_code.as_str() == "PO-A")
            .unwrap();
        let rate = class_attainment_rate(&st, &"C0001".into(), &"PO-A".into(), 0.7).unwrap();
        assert_eq!(a.rate, Some(rate.rate));
        let b = roll
            .outcomes
            .iter()
            .find(|o| o.outcome_code.as_str() == "PO-B")
            .unwrap();
        assert!(b.no_evidence && b.rate.is_none());
        assert!(matches!(
            program_rollup(
                &st,
                "2023",
                "2030-1",
                "2030-2",
                0.7,
                &BandScheme::attainment_default()
            ),
            Err(DomainError::EmptyScope)
        ));
    }

    #[test]
    fn trend_marks_empty_terms() {
        let st = three_student_class();
        let terms = vec!["2023-2".to_string(), "2024-1".to_string()];
        let t = term_trend(&st, &"PO-A".into(), "2023", &terms, 0.7).unwrap();
        assert!(t[0].no_evidence && t[0].rate.is_none());
        assert!((t[1].rate.unwrap() - 2.0 / 3.0).abs() < 1e-12);
        assert!(term_trend(&st, &"PO-A".into(), "2023", &[], 0.7)
            .unwrap()
            .is_empty());
        let other = term_trend(&st, &"PO-A".into(), "1999", &terms, 0.7).unwrap();
        assert!(other.iter().all(|p| p.no_evidence));
    }

    #[test]
    fn skills_summary_means() {
        let mut st = base_state();
        let k = crate::domain::create_skill(&st, &head(), "debugging", &"CS101".into()).unwrap();
        apply_all(&mut st, &k.ops);
        assert!(skills_summary(&st, &"C0001".into()).unwrap().is_empty());
        for (s, score) in [("s1", 80.0), ("s2", 90.0)] {
            let p = crate::domain::record_skill_rating(
                &st,
                &head(),
                &s.into(),
                &k.output.skill_id,
                &"C0001".into(),
                score,
                t0(),
            )
            .unwrap();
            apply_all(&mut st, &p.ops);
        }
        let sum = skills_summary(&st, &"C0001".into()).unwrap();
        assert_eq!(sum.len(), 1);
        assert_eq!(sum[0].mean, 85.0);
        assert_eq!(sum[0].count, 2);
    }

    #[test]
    fn student_view_lists_every_outcome() {
        let st = three_student_class();
        let v = student_attainment_view(
            &st,
            &"s1".into(),
            &Scope::All,
            0.7,
            &BandScheme::attainment_default(),
        )
        .unwrap();
        assert_eq!(v.outcomes.len(), st.outcome_codes().len());
        let a = &v.outcomes[0];
        assert_eq!(a.outcome_code.as_str(), "PO-A");
        assert_eq!(a.band.as_deref(), Some("Satisfactory"));
        assert!(v.outcomes[1].no_evidence);
    }
}
