//! Ordered, lower-bound-inclusive partitions of a score domain.
//!
//! Bands are listed from the top down; a score belongs to the first band
//! whose lower bound it reaches. Two schemes ship by default: the four-band
//! attainment scheme over `[0, 1]` that feeds the pie charts, and the
//! five-label Likert interpretation over `[1, 5]`.

use serde::{Deserialize, Serialize};

use crate::error::{DomainError, Result};
use crate::numeric::reaches;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Band {
    pub label: String,
    pub lower_bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandScheme {
    pub lo: f64,
    pub hi: f64,
    pub bands: Vec<Band>,
}

impl BandScheme {
    pub fn new(lo: f64, hi: f64, bands: &[(&str, f64)]) -> Result<Self> {
        let scheme = Self {
            lo,
            hi,
            bands: bands
                .iter()
                .map(|(label, lower_bound)| Band {
                    label: label.to_string(),
                    lower_bound: *lower_bound,
                })
                .collect(),
        };
        scheme.validate()?;
        Ok(scheme)
    }

    /// Exemplary ≥ 0.85, Satisfactory ≥ 0.70, Developing ≥ 0.50, Beginning ≥ 0.
    pub fn attainment_default() -> Self {
        Self::new(
            0.0,
            1.0,
            &[
                ("Exemplary", 0.85),
                ("Satisfactory", 0.70),
                ("Developing", 0.50),
                ("Beginning", 0.0),
            ],
        )
        .expect("default attainment scheme is valid")
    }

    /// Half-step Likert interpretation on `[1, 5]`.
    pub fn likert5() -> Self {
        Self::new(
            1.0,
            5.0,
            &[
                ("Highly Acceptable", 4.50),
                ("Acceptable", 3.50),
                ("Moderately Acceptable", 2.50),
                ("Slightly Acceptable", 1.50),
                ("Not Acceptable", 1.00),
            ],
        )
        .expect("likert scheme is valid")
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(DomainError::InvalidScale(msg.to_string()));
        if !(self.lo.is_finite() && self.hi.is_finite() && self.lo < self.hi) {
            return bad("domain must satisfy lo < hi");
        }
        let Some(last) = self.bands.last() else {
            return bad("scheme has no bands");
        };
        if last.lower_bound != self.lo {
            return bad("lowest band must start at the domain's lower end");
        }
        if self.bands[0].lower_bound > self.hi {
            return bad("top band starts above the domain");
        }
        for pair in self.bands.windows(2) {
            if !(pair[0].lower_bound > pair[1].lower_bound) {
                return bad("lower bounds must be strictly decreasing");
            }
        }
        let mut labels: Vec<&str> = self.bands.iter().map(|b| b.label.as_str()).collect();
        if labels.iter().any(|l| l.trim().is_empty()) {
            return bad("band labels must not be empty");
        }
        labels.sort_unstable();
        labels.dedup();
        if labels.len() != self.bands.len() {
            return bad("band labels must be unique");
        }
        Ok(())
    }

    /// Position of the band holding `score`; 0 is the top band.
    pub fn band_index(&self, score: f64) -> Result<usize> {
        if !(score >= self.lo && score <= self.hi) {
            return Err(DomainError::OutOfDomain(score));
        }
        Ok(self
            .bands
            .iter()
            .position(|b| reaches(score, b.lower_bound))
            .unwrap_or(self.bands.len() - 1))
    }

    pub fn band_of(&self, score: f64) -> Result<&str> {
        let i = self.band_index(score)?;
        Ok(&self.bands[i].label)
    }

    pub fn labels(&self) -> impl Iterator<Item = &str> {
        self.bands.iter().map(|b| b.label.as_str())
    }
}

pub fn band_of(score: f64, scheme: &BandScheme) -> Result<&str> {
    scheme.band_of(score)
}
