//! Python bindings: classification, the DES envelope, the OTP pipeline and
//! authority, and graphical challenges.

use std::borrow::Cow;

use pyo3::create_exception;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use rand::rngs::StdRng;
use rand::SeedableRng;
use ringvault_core::classification::{self, CiaRating, RatingError};
use ringvault_core::clock::ManualClock;
use ringvault_core::crypto::{self, CryptoError, EncryptionKey};
use ringvault_core::graphical::{self, ImageCatalog, ImageId};
use ringvault_core::otp::{self, MemoryTransport, OtpAccount, OtpError, OtpSeed};

create_exception!(ringvault, RingVaultError, PyValueError);
create_exception!(ringvault, OutOfRangeError, RingVaultError);
create_exception!(ringvault, CryptoFailure, RingVaultError);
create_exception!(ringvault, OtpFailure, RingVaultError);
create_exception!(ringvault, GraphicalFailure, RingVaultError);

fn rating_err(e: RatingError) -> PyErr {
    OutOfRangeError::new_err(e.to_string())
}

fn crypto_err(e: CryptoError) -> PyErr {
    CryptoFailure::new_err(e.to_string())
}

fn otp_err(e: OtpError) -> PyErr {
    OtpFailure::new_err(e.to_string())
}

fn key_from(bytes: &[u8]) -> PyResult<EncryptionKey> {
    let arr: [u8; 8] = bytes.try_into().map_err(|_| CryptoFailure::new_err("key must be 8 bytes"))?;
    Ok(EncryptionKey::from_bytes(arr))
}

fn block_from(bytes: &[u8]) -> PyResult<[u8; 8]> {
    bytes.try_into().map_err(|_| CryptoFailure::new_err("block must be 8 bytes"))
}

/// Validates a rating and returns it as a (c, i, a) tuple.
#[pyfunction]
fn validate_rating(c: i64, i: i64, a: i64) -> PyResult<(u8, u8, u8)> {
    let r = classification::validate_rating(c, i, a).map_err(rating_err)?;
    Ok((r.confidentiality(), r.integrity(), r.availability()))
}

/// Criticality index (c + i) / 2. Half-integers are exact in a float.
#[pyfunction]
fn compute_ci(c: i64, i: i64) -> PyResult<f64> {
    let r = CiaRating::new(c, i, 1).map_err(rating_err)?;
    Ok(classification::compute_ci(&r).as_f64())
}

/// Ring level 1, 2 or 3 for a CIA rating.
#[pyfunction]
fn classify(c: i64, i: i64, a: i64) -> PyResult<u8> {
    let r = classification::validate_rating(c, i, a).map_err(rating_err)?;
    Ok(classification::classify(&r).level())
}

#[pyfunction]
fn ring_label(level: u8) -> PyResult<&'static str> {
    classification::ProtectionRing::from_level(level)
        .map(|r| r.label())
        .ok_or_else(|| OutOfRangeError::new_err(format!("ring level {level} is not 1, 2 or 3")))
}

#[pyfunction]
fn derive_key(passphrase: &str) -> PyResult<Cow<'static, [u8]>> {
    let key = crypto::derive_key(passphrase).map_err(crypto_err)?;
    Ok(Cow::Owned(key.as_bytes().to_vec()))
}

#[pyfunction]
fn des_encrypt_block(block: &[u8], key: &[u8]) -> PyResult<Cow<'static, [u8]>> {
    Ok(Cow::Owned(crypto::des_block_encrypt(&block_from(block)?, &key_from(key)?).to_vec()))
}

#[pyfunction]
fn des_decrypt_block(block: &[u8], key: &[u8]) -> PyResult<Cow<'static, [u8]>> {
    Ok(Cow::Owned(crypto::des_block_decrypt(&block_from(block)?, &key_from(key)?).to_vec()))
}

#[pyfunction]
fn ciphertext_len(plaintext_len: usize) -> usize {
    crypto::ciphertext_len(plaintext_len)
}

/// Seals `plaintext` into a serialized envelope under an 8-byte key.
#[pyfunction]
fn encrypt(plaintext: &[u8], key: &[u8]) -> PyResult<Cow<'static, [u8]>> {
    let key = key_from(key)?;
    Ok(Cow::Owned(crypto::encrypt_to_bytes(plaintext, &key, &mut rand::rng())))
}

#[pyfunction]
fn decrypt(envelope: &[u8], key: &[u8]) -> PyResult<Cow<'static, [u8]>> {
    let key = key_from(key)?;
    crypto::decrypt_from_bytes(envelope, &key).map(Cow::Owned).map_err(crypto_err)
}

fn seed(username: &str, password_material: &str, email: &str, mobile: &str, timestamp: u64) -> OtpSeed {
    OtpSeed {
        username: username.to_owned(),
        password_material: password_material.to_owned(),
        email: email.to_owned(),
        mobile: mobile.to_owned(),
        timestamp,
    }
}

#[pyfunction]
fn build_seed_string(username: &str, password_material: &str, email: &str, mobile: &str, timestamp: u64) -> String {
    otp::build_seed_string(&seed(username, password_material, email, mobile, timestamp))
}

#[pyfunction]
fn digest_seed(s: &str) -> Cow<'static, [u8]> {
    Cow::Owned(otp::digest_seed(s).to_vec())
}

#[pyfunction]
fn fold_digest(digest: &[u8]) -> PyResult<Cow<'static, [u8]>> {
    otp::fold_digest(digest).map(|f| Cow::Owned(f.to_vec())).map_err(otp_err)
}

#[pyfunction]
fn encode_otp(folded: &[u8]) -> PyResult<String> {
    let arr: [u8; 5] = folded.try_into().map_err(|_| OtpFailure::new_err("folded value must be 5 bytes"))?;
    Ok(otp::encode_otp(&arr).as_str().to_owned())
}

#[pyfunction]
fn generate_otp(username: &str, password_material: &str, email: &str, mobile: &str, timestamp: u64) -> PyResult<String> {
    let s = seed(username, password_material, email, mobile, timestamp);
    s.validate().map_err(otp_err)?;
    Ok(otp::generate_code(&s).as_str().to_owned())
}

struct Account {
    user_id: String,
    username: String,
    password_material: String,
    email: String,
    mobile: String,
}

impl OtpAccount for Account {
    fn user_id(&self) -> &str {
        &self.user_id
    }
    fn username(&self) -> &str {
        &self.username
    }
    fn password_material(&self) -> &str {
        &self.password_material
    }
    fn email(&self) -> &str {
        &self.email
    }
    fn mobile(&self) -> Option<&str> {
        Some(&self.mobile)
    }
}

/// Issues and verifies OTP challenges against caller-supplied times. Codes
/// go to an in-memory outbox readable through `messages()`.
#[pyclass(frozen, name = "OtpAuthority")]
struct PyOtpAuthority {
    inner: otp::OtpAuthority,
    outbox: MemoryTransport,
}

#[pymethods]
impl PyOtpAuthority {
    #[new]
    #[pyo3(signature = (ttl_seconds = otp::DEFAULT_OTP_TTL))]
    fn new(ttl_seconds: u64) -> PyResult<Self> {
        if ttl_seconds == 0 {
            return Err(OtpFailure::new_err("ttl_seconds must be positive"));
        }
        Ok(PyOtpAuthority { inner: otp::OtpAuthority::new(ttl_seconds), outbox: MemoryTransport::new() })
    }

    #[getter]
    fn ttl_seconds(&self) -> u64 {
        self.inner.ttl_seconds()
    }

    /// Returns the new challenge id; the code is only in the outbox.
    #[allow(clippy::too_many_arguments)]
    fn issue(
        &self,
        user_id: &str,
        username: &str,
        password_material: &str,
        email: &str,
        mobile: &str,
        scope: &str,
        now: u64,
    ) -> PyResult<String> {
        let account = Account {
            user_id: user_id.into(),
            username: username.into(),
            password_material: password_material.into(),
            email: email.into(),
            mobile: mobile.into(),
        };
        let ch = self
            .inner
            .issue_challenge(&account, scope, &ManualClock::new(now), &self.outbox)
            .map_err(otp_err)?;
        Ok(ch.challenge_id)
    }

    /// Returns None on acceptance, otherwise the rejection reason.
    fn verify(&self, challenge_id: &str, submitted: &str, now: u64) -> Option<&'static str> {
        self.inner.verify(challenge_id, submitted, now).err().map(|r| r.as_str())
    }

    /// Delivered (mobile, body) pairs, oldest first.
    fn messages(&self) -> Vec<(String, String)> {
        self.outbox.messages()
    }
}

/// The bundled 3 x 8 image catalog as JSON.
#[pyfunction]
fn catalog_json() -> String {
    ImageCatalog::bundled().to_json()
}

/// One shuffled presentation of the bundled catalog, as three id lists.
#[pyfunction]
#[pyo3(signature = (seed = None))]
fn graphical_challenge(seed: Option<u64>) -> Vec<Vec<ImageId>> {
    let catalog = ImageCatalog::bundled();
    let ch = match seed {
        Some(s) => graphical::issue_challenge(&catalog, &mut StdRng::seed_from_u64(s), 0, 1),
        None => graphical::issue_challenge(&catalog, &mut rand::rng(), 0, 1),
    };
    ch.presented_sets.to_vec()
}

/// Whether `submitted` matches the secret enrolled as `enrolled`.
#[pyfunction]
fn graphical_matches(enrolled: Vec<ImageId>, submitted: Vec<ImageId>) -> PyResult<bool> {
    let secret = graphical::enroll(&ImageCatalog::bundled(), &enrolled)
        .map_err(|e| GraphicalFailure::new_err(e.to_string()))?;
    Ok(secret.matches(&submitted))
}

#[pymodule]
fn ringvault(m: &Bound<'_, PyModule>) -> PyResult<()> {
    let py = m.py();
    m.add("RingVaultError", py.get_type::<RingVaultError>())?;
    m.add("OutOfRangeError", py.get_type::<OutOfRangeError>())?;
    m.add("CryptoError", py.get_type::<CryptoFailure>())?;
    m.add("OtpError", py.get_type::<OtpFailure>())?;
    m.add("GraphicalError", py.get_type::<GraphicalFailure>())?;
    m.add("ALGORITHM_TAG", crypto::ALGORITHM_TAG)?;
    m.add_class::<PyOtpAuthority>()?;
    m.add_function(wrap_pyfunction!(validate_rating, m)?)?;
    m.add_function(wrap_pyfunction!(compute_ci, m)?)?;
    m.add_function(wrap_pyfunction!(classify, m)?)?;
    m.add_function(wrap_pyfunction!(ring_label, m)?)?;
    m.add_function(wrap_pyfunction!(derive_key, m)?)?;
    m.add_function(wrap_pyfunction!(des_encrypt_block, m)?)?;
    m.add_function(wrap_pyfunction!(des_decrypt_block, m)?)?;
    m.add_function(wrap_pyfunction!(ciphertext_len, m)?)?;
    m.add_function(wrap_pyfunction!(encrypt, m)?)?;
    m.add_function(wrap_pyfunction!(decrypt, m)?)?;
    m.add_function(wrap_pyfunction!(build_seed_string, m)?)?;
    m.add_function(wrap_pyfunction!(digest_seed, m)?)?;
    m.add_function(wrap_pyfunction!(fold_digest, m)?)?;
    m.add_function(wrap_pyfunction!(encode_otp, m)?)?;
    m.add_function(wrap_pyfunction!(generate_otp, m)?)?;
    m.add_function(wrap_pyfunction!(catalog_json, m)?)?;
    m.add_function(wrap_pyfunction!(graphical_challenge, m)?)?;
    m.add_function(wrap_pyfunction!(graphical_matches, m)?)?;
    Ok(())
}
