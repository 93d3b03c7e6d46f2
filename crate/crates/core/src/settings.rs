use std::net::SocketAddr;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::bands::BandScheme;
use crate::error::{DomainError, Result};
use crate::gradebook::GradeScale;

pub const DEFAULT_THRESHOLD: f64 = 0.70;
pub const DEFAULT_TOKEN_TTL_MINUTES: u32 = 480;

/// Department-wide settings. Serialized as the settings document, and
/// journaled like any other state so that `PUT /settings` is durable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Settings {
    pub attainment_threshold: f64,
    pub band_scheme: BandScheme,
    pub likert_scheme: BandScheme,
    pub grade_scale: GradeScale,
    pub token_ttl_minutes: u32,
    pub listen_address: String,
    pub data_dir: String,
}

impl Default for Settings {
    fn default() -> Self {
        Self {
            attainment_threshold: DEFAULT_THRESHOLD,
            band_scheme: BandScheme::attainment_default(),
            likert_scheme: BandScheme::likert5(),
            grade_scale: GradeScale::default(),
            token_ttl_minutes: DEFAULT_TOKEN_TTL_MINUTES,
            listen_address: "127.0.0.1:8080".to_string(),
            data_dir: "data".to_string(),
        }
    }
}

impl Settings {
    pub fn validate(&self) -> Result<()> {
        check_threshold(self.attainment_threshold)?;
        self.band_scheme.validate()?;
        if self.band_scheme.lo != 0.0 || self.band_scheme.hi != 1.0 {
            return Err(DomainError::InvalidScale(
                "attainment band scheme must cover [0, 1]".into(),
            ));
        }
        self.likert_scheme.validate()?;
        self.grade_scale.validate()?;
        if self.token_ttl_minutes == 0 {
            return Err(DomainError::Validation(
                "token_ttl_minutes must be positive".into(),
            ));
        }
        self.listen_address.parse::<SocketAddr>().map_err(|_| {
            DomainError::Validation(format!("bad listen_address `{}`", self.listen_address))
        })?;
        if self.data_dir.trim().is_empty() {
            return Err(DomainError::Validation("data_dir must not be empty".into()));
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let settings: Settings = serde_json::from_str(text)
            .map_err(|e| DomainError::Validation(format!("settings document: {e}")))?;
        settings.validate()?;
        Ok(settings)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(crate::store::StoreError::from)?;
        Self::from_json(&text)
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("settings serialize")
    }
}

pub fn check_threshold(theta: f64) -> Result<()> {
    if theta > 0.0 && theta <= 1.0 {
        Ok(())
    } else {
        Err(DomainError::InvalidThreshold)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate_and_round_trip() {
        let s = Settings::default();
        s.validate().unwrap();
        let back = Settings::from_json(&s.to_json_pretty()).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn document_keys() {
        let v: serde_json::Value = serde_json::to_value(Settings::default()).unwrap();
        let keys: Vec<&str> = v.as_object().unwrap().keys().map(|k| k.as_str()).collect();
        assert_eq!(
            keys,
            [
                "attainment_threshold",
                "band_scheme",
                "data_dir",
                "grade_scale",
                "likert_scheme",
                "listen_address",
                "token_ttl_minutes"
            ]
        );
    }

    #[test]
    fn rejects_bad_values() {
        let mut s = Settings::default();
        s.attainment_threshold = 0.0;
        assert!(matches!(s.validate(), Err(DomainError::InvalidThreshold)));
        let mut s = Settings::default();
        s.band_scheme = BandScheme::likert5();
        assert!(s.validate().is_err());
        let mut s = Settings::default();
        s.listen_address = "nowhere".into();
        assert!(s.validate().is_err());
        assert!(Settings::from_json(r#"{"bogus": 1}"#).is_err());
    }
}
