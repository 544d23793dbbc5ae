//! Client-side encryption with user-held keys.
//!
//! Payloads are encrypted with DES in CBC mode over PKCS#7-padded plaintext
//! and a fresh random IV, then framed in a self-describing envelope:
//!
//! ```text
//! "RV3D" | 0x01 | tag_len:u8 | tag (ASCII) | iv:[u8; 8] | ct_len:u64 BE | ct
//! ```
//!
//! The server only ever sees envelope bytes. Keys stay on the client.

mod des;

pub use des::Des;

use rand::{CryptoRng, RngCore};
use sha1::{Digest, Sha1};
use thiserror::Error;

pub const BLOCK_SIZE: usize = 8;
pub const ALGORITHM_TAG: &str = "DES-CBC-PKCS7";
pub const ENVELOPE_MAGIC: &[u8; 4] = b"RV3D";
pub const ENVELOPE_VERSION: u8 = 0x01;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CryptoError {
    #[error("passphrase must not be empty")]
    EmptyPassphrase,
    #[error("decryption failed: bad padding (wrong key or corrupted ciphertext)")]
    BadPadding,
    #[error("malformed envelope: {0}")]
    MalformedEnvelope(String),
    #[error("unsupported algorithm {0:?}")]
    UnsupportedAlgorithm(String),
}

/// A 64-bit DES key. The low bit of each byte is the parity bit.
#[derive(Clone, PartialEq, Eq)]
pub struct EncryptionKey([u8; 8]);

impl EncryptionKey {
    /// Wraps raw key bytes as-is. DES ignores the parity bits.
    pub fn from_bytes(bytes: [u8; 8]) -> Self {
        EncryptionKey(bytes)
    }

    pub fn as_bytes(&self) -> &[u8; 8] {
        &self.0
    }

    pub fn has_odd_parity(&self) -> bool {
        self.0.iter().all(|b| b.count_ones() % 2 == 1)
    }
}

impl std::fmt::Debug for EncryptionKey {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("EncryptionKey(<redacted>)")
    }
}

/// Sets each byte's least-significant bit so the byte has an odd number of ones.
pub fn set_odd_parity(byte: u8) -> u8 {
    let high = byte & 0xfe;
    if high.count_ones().is_multiple_of(2) {
        high | 1
    } else {
        high
    }
}

/// First 8 bytes of SHA-1(passphrase), parity-adjusted.
pub fn derive_key(passphrase: &str) -> Result<EncryptionKey, CryptoError> {
    if passphrase.is_empty() {
        return Err(CryptoError::EmptyPassphrase);
    }
    let digest = Sha1::digest(passphrase.as_bytes());
    let mut key = [0u8; 8];
    for (k, d) in key.iter_mut().zip(digest.iter()) {
        *k = set_odd_parity(*d);
    }
    Ok(EncryptionKey(key))
}

pub fn des_block_encrypt(block: &[u8; 8], key: &EncryptionKey) -> [u8; 8] {
    Des::new(&key.0).encrypt_block(block)
}

pub fn des_block_decrypt(block: &[u8; 8], key: &EncryptionKey) -> [u8; 8] {
    Des::new(&key.0).decrypt_block(block)
}

/// Ciphertext length for a plaintext of `len` bytes: always at least one block.
pub fn ciphertext_len(len: usize) -> usize {
    BLOCK_SIZE * (len / BLOCK_SIZE + 1)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CipherEnvelope {
    algorithm_tag: String,
    iv: [u8; 8],
    ciphertext: Vec<u8>,
}

impl CipherEnvelope {
    pub fn new(algorithm_tag: &str, iv: [u8; 8], ciphertext: Vec<u8>) -> Result<Self, CryptoError> {
        if !algorithm_tag.is_ascii() || algorithm_tag.len() > u8::MAX as usize {
            return Err(CryptoError::MalformedEnvelope("algorithm tag must be short ASCII".into()));
        }
        if ciphertext.is_empty() || !ciphertext.len().is_multiple_of(BLOCK_SIZE) {
            return Err(CryptoError::MalformedEnvelope(format!(
                "ciphertext length {} is not a positive multiple of {BLOCK_SIZE}",
                ciphertext.len()
            )));
        }
        Ok(CipherEnvelope { algorithm_tag: algorithm_tag.to_owned(), iv, ciphertext })
    }

    pub fn algorithm_tag(&self) -> &str {
        &self.algorithm_tag
    }

    pub fn iv(&self) -> &[u8; 8] {
        &self.iv
    }

    pub fn ciphertext(&self) -> &[u8] {
        &self.ciphertext
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let tag = self.algorithm_tag.as_bytes();
        let mut out = Vec::with_capacity(4 + 1 + 1 + tag.len() + 8 + 8 + self.ciphertext.len());
        out.extend_from_slice(ENVELOPE_MAGIC);
        out.push(ENVELOPE_VERSION);
        out.push(tag.len() as u8);
        out.extend_from_slice(tag);
        out.extend_from_slice(&self.iv);
        out.extend_from_slice(&(self.ciphertext.len() as u64).to_be_bytes());
        out.extend_from_slice(&self.ciphertext);
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, CryptoError> {
        let malformed = |why: &str| CryptoError::MalformedEnvelope(why.to_owned());
        let mut rest = bytes;
        let mut take = |n: usize, what: &str| -> Result<&[u8], CryptoError> {
            if rest.len() < n {
                return Err(malformed(&format!("truncated {what}")));
            }
            let (head, tail) = rest.split_at(n);
            rest = tail;
            Ok(head)
        };
        if take(4, "magic")? != ENVELOPE_MAGIC {
            return Err(malformed("bad magic"));
        }
        let version = take(1, "version")?[0];
        if version != ENVELOPE_VERSION {
            return Err(malformed(&format!("unknown version {version}")));
        }
        let tag_len = take(1, "tag length")?[0] as usize;
        let tag = std::str::from_utf8(take(tag_len, "algorithm tag")?)
            .ok()
            .filter(|t| t.is_ascii())
            .ok_or_else(|| malformed("algorithm tag is not ASCII"))?
            .to_owned();
        let iv: [u8; 8] = take(8, "iv")?.try_into().expect("length checked");
        let ct_len = u64::from_be_bytes(take(8, "length")?.try_into().expect("length checked"));
        let ct_len = usize::try_from(ct_len).map_err(|_| malformed("ciphertext length overflow"))?;
        let ciphertext = take(ct_len, "ciphertext")?.to_vec();
        if !rest.is_empty() {
            return Err(malformed("trailing bytes after ciphertext"));
        }
        CipherEnvelope::new(&tag, iv, ciphertext)
    }
}

/// Encrypts under DES-CBC with PKCS#7 padding and a fresh IV from `rng`.
pub fn encrypt<R: CryptoRng + RngCore + ?Sized>(
    plaintext: &[u8],
    key: &EncryptionKey,
    rng: &mut R,
) -> CipherEnvelope {
    let cipher = Des::new(&key.0);
    let mut iv = [0u8; 8];
    rng.fill_bytes(&mut iv);

    let pad = BLOCK_SIZE - plaintext.len() % BLOCK_SIZE;
    let mut buf = Vec::with_capacity(plaintext.len() + pad);
    buf.extend_from_slice(plaintext);
    buf.resize(plaintext.len() + pad, pad as u8);

    let mut prev = iv;
    for chunk in buf.chunks_exact_mut(BLOCK_SIZE) {
        let mut block = [0u8; 8];
        for (b, (p, c)) in block.iter_mut().zip(prev.iter().zip(chunk.iter())) {
            *b = p ^ c;
        }
        prev = cipher.encrypt_block(&block);
        chunk.copy_from_slice(&prev);
    }
    CipherEnvelope { algorithm_tag: ALGORITHM_TAG.to_owned(), iv, ciphertext: buf }
}

pub fn decrypt(envelope: &CipherEnvelope, key: &EncryptionKey) -> Result<Vec<u8>, CryptoError> {
    if envelope.algorithm_tag != ALGORITHM_TAG {
        return Err(CryptoError::UnsupportedAlgorithm(envelope.algorithm_tag.clone()));
    }
    let ct = &envelope.ciphertext;
    if ct.is_empty() || !ct.len().is_multiple_of(BLOCK_SIZE) {
        return Err(CryptoError::MalformedEnvelope(format!("ciphertext length {}", ct.len())));
    }
    let cipher = Des::new(&key.0);
    let mut out = Vec::with_capacity(ct.len());
    let mut prev = envelope.iv;
    for chunk in ct.chunks_exact(BLOCK_SIZE) {
        let block: [u8; 8] = chunk.try_into().expect("exact chunk");
        let plain = cipher.decrypt_block(&block);
        out.extend(plain.iter().zip(prev.iter()).map(|(p, v)| p ^ v));
        prev = block;
    }
    let pad = *out.last().expect("non-empty") as usize;
    if pad == 0 || pad > BLOCK_SIZE || !out[out.len() - pad..].iter().all(|&b| b as usize == pad) {
        return Err(CryptoError::BadPadding);
    }
    out.truncate(out.len() - pad);
    Ok(out)
}

/// Convenience for the envelope wire format.
pub fn encrypt_to_bytes<R: CryptoRng + RngCore + ?Sized>(
    plaintext: &[u8],
    key: &EncryptionKey,
    rng: &mut R,
) -> Vec<u8> {
    encrypt(plaintext, key, rng).to_bytes()
}

pub fn decrypt_from_bytes(bytes: &[u8], key: &EncryptionKey) -> Result<Vec<u8>, CryptoError> {
    decrypt(&CipherEnvelope::from_bytes(bytes)?, key)
}
