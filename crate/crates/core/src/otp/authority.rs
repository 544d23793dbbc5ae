use std::collections::HashMap;
use std::sync::Mutex;

use super::{generate_code, message_body, OtpCode, OtpError, OtpSeed, SmsTransport};
use crate::challenge::{is_live, RejectReason, Verdict};
use crate::clock::Clock;
use crate::token::new_token;

pub const DEFAULT_OTP_TTL: u64 = 600;

/// What the OTP flow needs to know about an account.
pub trait OtpAccount {
    fn user_id(&self) -> &str;
    fn username(&self) -> &str;
    /// The stored password verifier string.
    fn password_material(&self) -> &str;
    fn email(&self) -> &str;
    fn mobile(&self) -> Option<&str>;
}

#[derive(Debug, Clone)]
pub struct OtpChallenge {
    pub challenge_id: String,
    pub user_id: String,
    pub scope: String,
    code: OtpCode,
    pub issued_at: u64,
    pub ttl_seconds: u64,
    pub consumed: bool,
}

impl OtpChallenge {
    pub fn code(&self) -> &OtpCode {
        &self.code
    }

    pub fn expires_at(&self) -> u64 {
        self.issued_at.saturating_add(self.ttl_seconds)
    }
}

#[derive(Default)]
struct Book {
    challenges: HashMap<String, OtpChallenge>,
    // (user_id, scope) -> challenge_id of the one live challenge
    live: HashMap<(String, String), String>,
    // user_id -> last seed timestamp handed out
    last_seed: HashMap<String, u64>,
}

/// Issues and verifies OTP challenges. All state transitions happen under one lock.
pub struct OtpAuthority {
    ttl_seconds: u64,
    book: Mutex<Book>,
}

impl Default for OtpAuthority {
    fn default() -> Self {
        OtpAuthority::new(DEFAULT_OTP_TTL)
    }
}

impl OtpAuthority {
    pub fn new(ttl_seconds: u64) -> Self {
        assert!(ttl_seconds > 0, "ttl must be positive");
        OtpAuthority { ttl_seconds, book: Mutex::new(Book::default()) }
    }

    pub fn ttl_seconds(&self) -> u64 {
        self.ttl_seconds
    }

    fn book(&self) -> std::sync::MutexGuard<'_, Book> {
        self.book.lock().unwrap_or_else(|e| e.into_inner())
    }

    /// Derives a fresh code for `account`, sends it, and records the challenge.
    ///
    /// `scope` names what the challenge unlocks (an object id); a new challenge
    /// for the same user and scope voids the previous one. Nothing is recorded
    /// if delivery fails.
    pub fn issue_challenge(
        &self,
        account: &dyn OtpAccount,
        scope: &str,
        clock: &dyn Clock,
        transport: &dyn SmsTransport,
    ) -> Result<OtpChallenge, OtpError> {
        let mobile = account.mobile().filter(|m| !m.is_empty()).ok_or(OtpError::MissingMobile)?;
        let now = clock.now();
        let seed = OtpSeed {
            username: account.username().to_owned(),
            password_material: account.password_material().to_owned(),
            email: account.email().to_owned(),
            mobile: mobile.to_owned(),
            timestamp: self.reserve_seed_time(account.user_id(), now),
        };
        seed.validate()?;
        let code = generate_code(&seed);
        transport.deliver(mobile, &message_body(&code, self.ttl_seconds))?;

        let challenge = OtpChallenge {
            challenge_id: new_token(),
            user_id: account.user_id().to_owned(),
            scope: scope.to_owned(),
            code,
            issued_at: now,
            ttl_seconds: self.ttl_seconds,
            consumed: false,
        };
        let mut book = self.book();
        let horizon = 2 * self.ttl_seconds;
        book.challenges.retain(|_, c| is_live(c.issued_at, horizon, now));
        let key = (challenge.user_id.clone(), challenge.scope.clone());
        if let Some(prior) = book.live.insert(key, challenge.challenge_id.clone()) {
            book.challenges.remove(&prior);
        }
        book.challenges.insert(challenge.challenge_id.clone(), challenge.clone());
        Ok(challenge)
    }

    /// Seed timestamps are strictly increasing per user, so two challenges
    /// issued within one second still get different codes.
    fn reserve_seed_time(&self, user_id: &str, now: u64) -> u64 {
        let mut book = self.book();
        book.last_seed.retain(|_, t| *t >= now);
        let t = match book.last_seed.get(user_id) {
            Some(&last) => last.saturating_add(1).max(now),
            None => now,
        };
        book.last_seed.insert(user_id.to_owned(), t);
        t
    }

    /// Accepts at most once per challenge, inside the validity window.
    pub fn verify(&self, challenge_id: &str, submitted: &str, now: u64) -> Verdict {
        let mut book = self.book();
        let challenge = book.challenges.get_mut(challenge_id).ok_or(RejectReason::Unknown)?;
        if challenge.consumed {
            return Err(RejectReason::AlreadyUsed);
        }
        if !is_live(challenge.issued_at, challenge.ttl_seconds, now) {
            return Err(RejectReason::Expired);
        }
        if !challenge.code.matches(submitted) {
            return Err(RejectReason::Mismatch);
        }
        challenge.consumed = true;
        Ok(())
    }

    pub fn revoke(&self, challenge_id: &str) {
        let mut book = self.book();
        if let Some(c) = book.challenges.remove(challenge_id) {
            let key = (c.user_id, c.scope);
            if book.live.get(&key).map(String::as_str) == Some(challenge_id) {
                book.live.remove(&key);
            }
        }
    }

    pub fn get(&self, challenge_id: &str) -> Option<OtpChallenge> {
        self.book().challenges.get(challenge_id).cloned()
    }
}
