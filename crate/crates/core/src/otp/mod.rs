//! One-time passwords derived by folding a SHA-1 digest of account data.
//!
//! ```text
//! seed   = username | verifier | email | mobile | unix_seconds
//! digest = SHA-1(seed)                       20 bytes
//! folded = g0 ^ g1 ^ g2 ^ g3                 four 5-byte groups -> 5 bytes
//! code   = uppercase hex(folded)             10 characters
//! ```

mod authority;
mod transport;

pub use authority::{OtpAccount, OtpAuthority, OtpChallenge, DEFAULT_OTP_TTL};
pub use transport::{
    extract_code, message_body, MemoryTransport, OutboxRecord, OutboxTransport, SmsTransport,
    TransportError,
};

use std::fmt;

use sha1::{Digest, Sha1};
use subtle::ConstantTimeEq;
use thiserror::Error;

pub const DIGEST_LEN: usize = 20;
pub const GROUP_LEN: usize = 5;
pub const CODE_LEN: usize = 2 * GROUP_LEN;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OtpError {
    #[error("digest must be {DIGEST_LEN} bytes, got {0}")]
    WrongLength(usize),
    #[error("seed field {0} must not be empty")]
    EmptySeedField(&'static str),
    #[error("account has no mobile number")]
    MissingMobile,
    #[error("not a valid one-time password: {0:?}")]
    InvalidCode(String),
    #[error(transparent)]
    Transport(#[from] TransportError),
}

/// The account fields that feed one code. `password_material` is the stored
/// verifier string, never a plaintext password.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OtpSeed {
    pub username: String,
    pub password_material: String,
    pub email: String,
    pub mobile: String,
    pub timestamp: u64,
}

impl OtpSeed {
    pub fn validate(&self) -> Result<(), OtpError> {
        for (name, value) in [
            ("username", &self.username),
            ("password_material", &self.password_material),
            ("email", &self.email),
            ("mobile", &self.mobile),
        ] {
            if value.is_empty() {
                return Err(OtpError::EmptySeedField(name));
            }
        }
        Ok(())
    }
}

pub fn build_seed_string(seed: &OtpSeed) -> String {
    format!(
        "{}|{}|{}|{}|{}",
        seed.username, seed.password_material, seed.email, seed.mobile, seed.timestamp
    )
}

pub fn digest_seed(s: &str) -> [u8; DIGEST_LEN] {
    Sha1::digest(s.as_bytes()).into()
}

/// XORs the four 5-byte groups of a 20-byte digest together.
pub fn fold_digest(digest: &[u8]) -> Result<[u8; GROUP_LEN], OtpError> {
    if digest.len() != DIGEST_LEN {
        return Err(OtpError::WrongLength(digest.len()));
    }
    let mut out = [0u8; GROUP_LEN];
    for group in digest.chunks_exact(GROUP_LEN) {
        for (o, b) in out.iter_mut().zip(group) {
            *o ^= b;
        }
    }
    Ok(out)
}

pub fn encode_otp(folded: &[u8; GROUP_LEN]) -> OtpCode {
    let mut code = String::with_capacity(CODE_LEN);
    for b in folded {
        code.push_str(&format!("{b:02X}"));
    }
    OtpCode(code)
}

/// Full pipeline for one seed.
pub fn generate_code(seed: &OtpSeed) -> OtpCode {
    let folded = fold_digest(&digest_seed(&build_seed_string(seed))).expect("sha-1 is 20 bytes");
    encode_otp(&folded)
}

/// Exactly ten characters from `[0-9A-F]`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct OtpCode(String);

impl OtpCode {
    /// Accepts either case, normalises to uppercase.
    pub fn parse(s: &str) -> Result<Self, OtpError> {
        if s.len() == CODE_LEN && s.bytes().all(|b| b.is_ascii_hexdigit()) {
            Ok(OtpCode(s.to_ascii_uppercase()))
        } else {
            Err(OtpError::InvalidCode(s.to_owned()))
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// Case-insensitive, constant-time for equal-length input.
    pub fn matches(&self, submitted: &str) -> bool {
        let submitted = submitted.trim().to_ascii_uppercase();
        bool::from(self.0.as_bytes().ct_eq(submitted.as_bytes()))
    }
}

impl fmt::Display for OtpCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for OtpCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("OtpCode(**********)")
    }
}
