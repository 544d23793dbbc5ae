use rand::CryptoRng;

/// 128 random bits as 32 lowercase hex characters.
pub fn random_token<R: CryptoRng + ?Sized>(rng: &mut R) -> String {
    let mut bytes = [0u8; 16];
    rng.fill_bytes(&mut bytes);
    let mut out = String::with_capacity(32);
    for b in bytes {
        out.push_str(&format!("{b:02x}"));
    }
    out
}

/// Token drawn from the thread-local CSPRNG.
pub fn new_token() -> String {
    random_token(&mut rand::rng())
}
