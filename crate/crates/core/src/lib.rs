//! Outcome-based education records: rubrics mapped onto program outcomes,
//! attainment analytics, a weighted gradebook and a journaled store.

pub mod access;
pub mod analytics;
pub mod auth;
pub mod bands;
pub mod credential;
pub mod demo;
pub mod domain;
pub mod error;
pub mod gradebook;
pub mod import;
pub mod model;
pub mod numeric;
pub mod report;
pub mod scope;
pub mod service;
pub mod settings;
pub mod state;
pub mod store;

#[cfg(test)]
pub(crate) mod testutil;

pub use auth::{Clock, ManualClock, SystemClock};
pub use bands::{Band, BandScheme};
pub use error::{DomainError, ErrorKind, Result};
pub use model::*;
pub use report::{to_canonical_json, ReportFormat};
pub use scope::Scope;
pub use service::Service;
pub use settings::Settings;
pub use state::{Op, State};
pub use store::{ChangeSet, Snapshot, Store, StoreError};
