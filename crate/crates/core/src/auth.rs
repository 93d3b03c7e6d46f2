//! Password login and opaque bearer sessions.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use chrono::Duration;
use serde::{Deserialize, Serialize};

use crate::credential::PasswordHash;
use crate::error::{DomainError, Result};
use crate::model::{Actor, Role, Timestamp, UserAccount, UserId};
use crate::state::State;

pub trait Clock: Send + Sync {
    fn now(&self) -> Timestamp;
}

#[derive(Debug, Default, Clone, Copy)]
pub struct SystemClock;

impl Clock for SystemClock {
    fn now(&self) -> Timestamp {
        chrono::Utc::now()
    }
}

/// Test clock that only moves when told to.
#[derive(Debug)]
pub struct ManualClock(Mutex<Timestamp>);

impl ManualClock {
    pub fn new(start: Timestamp) -> Self {
        Self(Mutex::new(start))
    }

    pub fn advance(&self, by: Duration) {
        *self.0.lock().unwrap() += by;
    }

    pub fn set(&self, t: Timestamp) {
        *self.0.lock().unwrap() = t;
    }
}

impl Clock for ManualClock {
    fn now(&self) -> Timestamp {
        *self.0.lock().unwrap()
    }
}

/// Checks `password` against the account whose id, or failing that whose
/// display name, is `name_or_id`. Unknown user and wrong password give the
/// same error.
pub fn authenticate<'a>(
    state: &'a State,
    name_or_id: &str,
    password: &str,
) -> Result<&'a UserAccount> {
    let name_or_id = name_or_id.trim();
    let candidates: Vec<_> = match state.users.get(name_or_id) {
        Some(u) => vec![u],
        None => state
            .users
            .values()
            .filter(|u| u.account.display_name == name_or_id)
            .collect(),
    };
    let matched = candidates
        .into_iter()
        .find(|u| u.password_hash.as_ref().is_some_and(|h| h.verify(password)));
    let Some(user) = matched else {
        // keep the failure path roughly as slow as a real check
        let _ = dummy_hash().verify(password);
        return Err(DomainError::BadCredentials);
    };
    if !user.account.active {
        return Err(DomainError::AccountInactive);
    }
    Ok(&user.account)
}

fn dummy_hash() -> &'static PasswordHash {
    static DUMMY: std::sync::OnceLock<PasswordHash> = std::sync::OnceLock::new();
    DUMMY.get_or_init(|| PasswordHash::create("not-a-real-password").expect("dummy hash"))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IssuedToken {
    pub token: String,
    pub expires_at: Timestamp,
    pub user_id: UserId,
    pub role: Role,
}

#[derive(Debug, Clone)]
struct Session {
    actor: Actor,
    expires_at: Timestamp,
}

/// In-memory token table. Tokens are 128 random bits, hex encoded.
pub struct SessionRegistry {
    clock: Arc<dyn Clock>,
    sessions: Mutex<HashMap<String, Session>>,
}

impl SessionRegistry {
    pub fn new(clock: Arc<dyn Clock>) -> Self {
        Self {
            clock,
            sessions: Mutex::new(HashMap::new()),
        }
    }

    pub fn clock(&self) -> &Arc<dyn Clock> {
        &self.clock
    }

    pub fn issue(&self, account: &UserAccount, ttl_minutes: u32) -> IssuedToken {
        let token = format!("{:032x}", rand::random::<u128>());
        let expires_at = self.clock.now() + Duration::minutes(ttl_minutes.into());
        let actor = Actor::new(account.user_id.clone(), account.role);
        let mut sessions = self.sessions.lock().unwrap();
        let now = self.clock.now();
        sessions.retain(|_, s| s.expires_at > now);
        sessions.insert(token.clone(), Session { actor, expires_at });
        IssuedToken {
            token,
            expires_at,
            user_id: account.user_id.clone(),
            role: account.role,
        }
    }

    /// The actor behind a live token.
    pub fn resolve(&self, token: &str) -> Result<Actor> {
        let mut sessions = self.sessions.lock().unwrap();
        let now = self.clock.now();
        match sessions.get(token) {
            Some(s) if s.expires_at > now => Ok(s.actor.clone()),
            Some(_) => {
                sessions.remove(token);
                Err(DomainError::Unauthenticated)
            }
            None => Err(DomainError::Unauthenticated),
        }
    }

    pub fn revoke(&self, token: &str) {
        self.sessions.lock().unwrap().remove(token);
    }
}
