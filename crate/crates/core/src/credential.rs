//! Salted, iterated password hashes (PBKDF2-HMAC-SHA256).
//!
//! Encoded as `pbkdf2-sha256$<iterations>$<salt hex>$<hash hex>`.

use std::fmt;

use pbkdf2::pbkdf2_hmac;
use rand::RngCore;
use serde::{Deserialize, Serialize};
use sha2::Sha256;

use crate::error::{DomainError, Result};

pub const MIN_PASSWORD_LEN: usize = 8;
pub const DEFAULT_ITERATIONS: u32 = 20_000;

const SCHEME: &str = "pbkdf2-sha256";
const SALT_LEN: usize = 16;
const HASH_LEN: usize = 32;

#[derive(Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PasswordHash(String);

impl fmt::Debug for PasswordHash {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("PasswordHash(<redacted>)")
    }
}

impl PasswordHash {
    pub fn create(password: &str) -> Result<Self> {
        Self::create_with_iterations(password, DEFAULT_ITERATIONS)
    }

    pub fn create_with_iterations(password: &str, iterations: u32) -> Result<Self> {
        check_strength(password)?;
        let mut salt = [0u8; SALT_LEN];
        rand::rng().fill_bytes(&mut salt);
        let hash = derive(password, &salt, iterations);
        Ok(Self(format!(
            "{SCHEME}${iterations}${}${}",
            hex::encode(salt),
            hex::encode(hash)
        )))
    }

    pub fn verify(&self, password: &str) -> bool {
        let mut parts = self.0.split('$');
        let (Some(SCHEME), Some(iter), Some(salt), Some(hash), None) = (
            parts.next(),
            parts.next(),
            parts.next(),
            parts.next(),
            parts.next(),
        ) else {
            return false;
        };
        let (Ok(iterations), Ok(salt), Ok(expected)) =
            (iter.parse::<u32>(), hex::decode(salt), hex::decode(hash))
        else {
            return false;
        };
        let actual = derive(password, &salt, iterations);
        constant_time_eq(&actual, &expected)
    }
}

pub fn check_strength(password: &str) -> Result<()> {
    if password.chars().count() < MIN_PASSWORD_LEN {
        return Err(DomainError::WeakPassword {
            min: MIN_PASSWORD_LEN,
        });
    }
    Ok(())
}

fn derive(password: &str, salt: &[u8], iterations: u32) -> [u8; HASH_LEN] {
    let mut out = [0u8; HASH_LEN];
    pbkdf2_hmac::<Sha256>(password.as_bytes(), salt, iterations, &mut out);
    out
}

fn constant_time_eq(a: &[u8], b: &[u8]) -> bool {
    if a.len() != b.len() {
        return false;
    }
    a.iter().zip(b).fold(0u8, |acc, (x, y)| acc | (x ^ y)) == 0
}
