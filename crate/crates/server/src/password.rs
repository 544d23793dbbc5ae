//! Salted, iterated password verifiers (PBKDF2-HMAC-SHA256).

use pbkdf2::pbkdf2_hmac;
use rand::{CryptoRng, RngCore};
use serde::{Deserialize, Serialize};
use sha2::Sha256;
use subtle::ConstantTimeEq;

pub const SCHEME_PBKDF2_SHA256: &str = "pbkdf2-sha256";
const SALT_LEN: usize = 16;
const HASH_LEN: usize = 32;

#[derive(Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PasswordVerifier {
    pub scheme: String,
    pub iterations: u32,
    #[serde(with = "hex::serde")]
    pub salt: Vec<u8>,
    #[serde(with = "hex::serde")]
    pub hash: Vec<u8>,
}

impl std::fmt::Debug for PasswordVerifier {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("PasswordVerifier")
            .field("scheme", &self.scheme)
            .field("iterations", &self.iterations)
            .finish_non_exhaustive()
    }
}

fn derive(password: &str, salt: &[u8], iterations: u32) -> [u8; HASH_LEN] {
    let mut out = [0u8; HASH_LEN];
    pbkdf2_hmac::<Sha256>(password.as_bytes(), salt, iterations, &mut out);
    out
}

impl PasswordVerifier {
    pub fn create<R: CryptoRng + RngCore + ?Sized>(password: &str, iterations: u32, rng: &mut R) -> Self {
        let mut salt = vec![0u8; SALT_LEN];
        rng.fill_bytes(&mut salt);
        let hash = derive(password, &salt, iterations).to_vec();
        PasswordVerifier { scheme: SCHEME_PBKDF2_SHA256.to_owned(), iterations, salt, hash }
    }

    pub fn verify(&self, password: &str) -> bool {
        if self.scheme != SCHEME_PBKDF2_SHA256 {
            return false;
        }
        let candidate = derive(password, &self.salt, self.iterations);
        bool::from(candidate.as_slice().ct_eq(&self.hash))
    }

    /// `scheme$iterations$salt$hash`, hex-encoded. Used as OTP seed material.
    pub fn record_string(&self) -> String {
        format!("{}${}${}${}", self.scheme, self.iterations, hex::encode(&self.salt), hex::encode(&self.hash))
    }
}

/// Burns the same work as a real check so unknown usernames are not faster.
pub fn dummy_verify(password: &str, iterations: u32) {
    let _ = derive(password, &[0u8; SALT_LEN], iterations);
}
