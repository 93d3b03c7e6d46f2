//! Weighted grade components, score recording, final grades and
//! transmutation onto the institutional grade scale.
//!
//! A component's score pools points over its scored items
//! (`Σ raw / Σ max`). The final percent is `100 × Σ weight × component
//! score`, rounded half-up to two decimals; it is only defined once the
//! class's active component weights sum to 1 and every component has at
//! least one score for the student.

use serde::{Deserialize, Serialize};

use crate::access::{require, Action, Resource};
use crate::domain::{fresh_id, Planned};
use crate::error::{DomainError, Result};
use crate::model::*;
use crate::numeric::{reaches, round_half_up};
use crate::state::{Op, State};

pub const WEIGHT_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradeBand {
    pub lower_bound: f64,
    pub label: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradeScale {
    pub bands: Vec<GradeBand>,
}

impl Default for GradeScale {
    /// Philippine 1.00 (best) to 5.00 (failing) convention.
    fn default() -> Self {
        let table = [
            (96.0, "1.00"),
            (93.0, "1.25"),
            (90.0, "1.50"),
            (87.0, "1.75"),
            (84.0, "2.00"),
            (81.0, "2.25"),
            (78.0, "2.50"),
            (75.0, "2.75"),
            (70.0, "3.00"),
            (0.0, "5.00"),
        ];
        Self {
            bands: table
                .iter()
                .map(|(lower_bound, label)| GradeBand {
                    lower_bound: *lower_bound,
                    label: label.to_string(),
                })
                .collect(),
        }
    }
}

impl GradeScale {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(DomainError::InvalidScale(m.to_string()));
        let (Some(first), Some(last)) = (self.bands.first(), self.bands.last()) else {
            return bad("grade scale has no bands");
        };
        if !(first.lower_bound <= 100.0) {
            return bad("top band must start at or below 100");
        }
        if last.lower_bound != 0.0 {
            return bad("lowest band must start at 0");
        }
        if self
            .bands
            .windows(2)
            .any(|w| !(w[0].lower_bound > w[1].lower_bound))
        {
            return bad("lower bounds must be strictly decreasing");
        }
        if self.bands.iter().any(|b| b.label.trim().is_empty()) {
            return bad("grade labels must not be empty");
        }
        Ok(())
    }

    fn band_index(&self, percent: f64) -> usize {
        self.bands
            .iter()
            .position(|b| reaches(percent, b.lower_bound))
            .unwrap_or(self.bands.len() - 1)
    }
}

pub fn transmute_grade(percent: f64, scale: &GradeScale) -> Result<&str> {
    scale.validate()?;
    if !(0.0..=100.0).contains(&percent) {
        return Err(DomainError::OutOfRange(format!("percent {percent}")));
    }
    Ok(&scale.bands[scale.band_index(percent)].label)
}

pub fn weight_sum(state: &State, class_id: &ClassId) -> f64 {
    state
        .active_components(class_id)
        .iter()
        .map(|c| c.weight)
        .sum()
}

pub fn check_finalizable(state: &State, class_id: &ClassId) -> Result<()> {
    state.class(class_id)?;
    let sum = weight_sum(state, class_id);
    if (sum - 1.0).abs() > WEIGHT_TOLERANCE {
        return Err(DomainError::WeightsNotNormalized { sum });
    }
    Ok(())
}

/// Points-pooled score in `[0, 1]` over the items the student has scores for.
pub fn component_score(state: &State, student: &UserId, component: &ComponentId) -> Result<f64> {
    state.component(component)?;
    let (raw, max) = state
        .items_of(component)
        .filter_map(|item| {
            state
                .scores
                .get(&(student.clone(), item.item_id.clone()))
                .map(|s| (s.raw_score, item.max_points))
        })
        .fold((0.0, 0.0), |(r, m), (raw, max)| (r + raw, m + max));
    if max == 0.0 {
        return Err(DomainError::NoScores);
    }
    Ok((raw / max).clamp(0.0, 1.0))
}

pub fn final_percent(state: &State, student: &UserId, class_id: &ClassId) -> Result<f64> {
    check_finalizable(state, class_id)?;
    let mut total = 0.0;
    let mut missing = Vec::new();
    for comp in state.active_components(class_id) {
        match component_score(state, student, &comp.component_id) {
            Ok(s) => total += comp.weight * s,
            Err(DomainError::NoScores) => missing.push(comp.name.clone()),
            Err(e) => return Err(e),
        }
    }
    if !missing.is_empty() {
        return Err(DomainError::IncompleteComponents(missing));
    }
    Ok(round_half_up((100.0 * total).clamp(0.0, 100.0), 2))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradeRow {
    pub student_id: UserId,
    pub final_percent: f64,
    pub grade: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IncompleteRow {
    pub student_id: UserId,
    pub missing_components: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradeSummary {
    pub class_id: ClassId,
    pub rows: Vec<GradeRow>,
    pub incomplete: Vec<IncompleteRow>,
    /// Mean of the complete rows' final percents; absent when there are none.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mean: Option<f64>,
}

pub fn class_grade_summary(
    state: &State,
    class_id: &ClassId,
    scale: &GradeScale,
) -> Result<GradeSummary> {
    let class = state.class(class_id)?;
    let mut summary = GradeSummary {
        class_id: class_id.clone(),
        rows: Vec::new(),
        incomplete: Vec::new(),
        mean: None,
    };
    if class.roster.is_empty() {
        return Ok(summary);
    }
    check_finalizable(state, class_id)?;
    // The roster is a BTreeSet, so rows come out ordered by student id.
    for student in &class.roster {
        match final_percent(state, student, class_id) {
            Ok(p) => summary.rows.push(GradeRow {
                student_id: student.clone(),
                final_percent: p,
                grade: transmute_grade(p, scale)?.to_string(),
            }),
            Err(DomainError::IncompleteComponents(missing)) => {
                summary.incomplete.push(IncompleteRow {
                    student_id: student.clone(),
                    missing_components: missing,
                })
            }
            Err(e) => return Err(e),
        }
    }
    if !summary.rows.is_empty() {
        let sum: f64 = summary.rows.iter().map(|r| r.final_percent).sum();
        summary.mean = Some(round_half_up(sum / summary.rows.len() as f64, 2));
    }
    Ok(summary)
}

// ---------------------------------------------------------------------------
// Mutations
// ---------------------------------------------------------------------------

/// Replaces the class's component list. Components whose name matches an
/// existing active component keep their id (and items); the rest of the
/// old list is archived. The sum-to-one rule is enforced at finalization,
/// so drafts may be saved.
pub fn define_grade_components(
    state: &State,
    actor: &Actor,
    class_id: &ClassId,
    components: &[(String, f64)],
) -> Result<Planned<Vec<GradeComponent>>> {
    require(
        state,
        actor,
        Action::DefineGradeComponents,
        &Resource::Class(class_id.clone()),
    )?;
    state.class(class_id)?;
    if components.is_empty() {
        return Err(DomainError::EmptyInput);
    }
    if components.iter().any(|(_, w)| !(*w > 0.0)) {
        return Err(DomainError::NonPositiveWeight);
    }

    let existing: Vec<&GradeComponent> = state
        .components
        .values()
        .filter(|c| &c.class_id == class_id)
        .collect();
    let mut allocated: Vec<String> = Vec::new();
    let mut next: Vec<GradeComponent> = Vec::new();
    for (name, weight) in components {
        let reuse = existing
            .iter()
            .find(|c| c.active && c.name.trim() == name.trim())
            .map(|c| c.component_id.clone());
        let id = reuse.unwrap_or_else(|| {
            let id = fresh_id("GC", state.components.len(), |id| {
                state.components.contains_key(id) || allocated.iter().any(|a| a == id)
            });
            allocated.push(id.clone());
            ComponentId(id)
        });
        next.push(GradeComponent {
            component_id: id,
            class_id: class_id.clone(),
            name: name.trim().to_string(),
            weight: *weight,
            active: true,
        });
    }
    let mut all = next.clone();
    for old in existing {
        if !next.iter().any(|c| c.component_id == old.component_id) {
            all.push(GradeComponent {
                active: false,
                ..old.clone()
            });
        }
    }
    let op = Op::SetComponents {
        class_id: class_id.clone(),
        components: all,
    };
    state.validate(&op)?;
    Ok(Planned::new(vec![op], next))
}

pub fn add_grade_item(
    state: &State,
    actor: &Actor,
    class_id: &ClassId,
    component_id: &ComponentId,
    title: &str,
    max_points: f64,
) -> Result<Planned<GradeItem>> {
    require(
        state,
        actor,
        Action::AddGradeItem,
        &Resource::Class(class_id.clone()),
    )?;
    state.class(class_id)?;
    let comp = state.component(component_id)?;
    if &comp.class_id != class_id {
        return Err(DomainError::UnknownComponent(component_id.to_string()));
    }
    let item = GradeItem {
        item_id: ItemId(fresh_id("GI", state.items.len(), |id| {
            state.items.contains_key(id)
        })),
        component_id: component_id.clone(),
        title: title.trim().to_string(),
        max_points,
    };
    let op = Op::CreateItem(item.clone());
    state.validate(&op)?;
    Ok(Planned::new(vec![op], item))
}

/// Class that owns an item, through its component.
pub fn class_of_item<'a>(state: &'a State, item: &ItemId) -> Result<&'a ClassId> {
    let item = state.item(item)?;
    Ok(&state.component(&item.component_id)?.class_id)
}

pub fn record_score(
    state: &State,
    actor: &Actor,
    class_id: &ClassId,
    student: &UserId,
    item: &ItemId,
    raw_score: f64,
    now: Timestamp,
) -> Result<Planned<ScoreEntry>> {
    require(
        state,
        actor,
        Action::RecordScore,
        &Resource::Class(class_id.clone()),
    )?;
    state.class(class_id)?;
    if class_of_item(state, item)? != class_id {
        return Err(DomainError::UnknownItem(item.to_string()));
    }
    let entry = ScoreEntry {
        student_id: student.clone(),
        item_id: item.clone(),
        raw_score,
        recorded_at: now,
    };
    let op = Op::RecordScore(entry.clone());
    state.validate(&op)?;
    Ok(Planned::new(vec![op], entry))
}
