use std::collections::HashMap;
use std::sync::Mutex;

use rand::{CryptoRng, RngCore};

use super::{issue_challenge, GraphicalChallenge, GraphicalSecret, ImageCatalog, ImageId};
use crate::challenge::{is_live, RejectReason, Verdict};

pub const DEFAULT_GRAPHICAL_TTL: u64 = 600;

struct Entry {
    challenge: GraphicalChallenge,
    user_id: String,
    scope: String,
    consumed: bool,
}

#[derive(Default)]
struct Book {
    challenges: HashMap<String, Entry>,
    live: HashMap<(String, String), String>,
}

/// Holds outstanding graphical challenges. Consumption is atomic.
pub struct GraphicalAuthority {
    catalog: ImageCatalog,
    ttl_seconds: u64,
    book: Mutex<Book>,
}

impl GraphicalAuthority {
    pub fn new(catalog: ImageCatalog, ttl_seconds: u64) -> Self {
        assert!(ttl_seconds > 0, "ttl must be positive");
        GraphicalAuthority { catalog, ttl_seconds, book: Mutex::new(Book::default()) }
    }

    pub fn catalog(&self) -> &ImageCatalog {
        &self.catalog
    }

    fn book(&self) -> std::sync::MutexGuard<'_, Book> {
        self.book.lock().unwrap_or_else(|e| e.into_inner())
    }

    /// Shuffles a new presentation for `user_id`, voiding any live one for the same scope.
    pub fn issue<R: CryptoRng + RngCore + ?Sized>(
        &self,
        user_id: &str,
        scope: &str,
        rng: &mut R,
        now: u64,
    ) -> GraphicalChallenge {
        let challenge = issue_challenge(&self.catalog, rng, now, self.ttl_seconds);
        let mut book = self.book();
        let horizon = 2 * self.ttl_seconds;
        book.challenges.retain(|_, e| is_live(e.challenge.issued_at, horizon, now));
        if let Some(prior) =
            book.live.insert((user_id.to_owned(), scope.to_owned()), challenge.challenge_id.clone())
        {
            book.challenges.remove(&prior);
        }
        book.challenges.insert(
            challenge.challenge_id.clone(),
            Entry {
                challenge: challenge.clone(),
                user_id: user_id.to_owned(),
                scope: scope.to_owned(),
                consumed: false,
            },
        );
        challenge
    }

    pub fn verify(
        &self,
        challenge_id: &str,
        secret: &GraphicalSecret,
        submitted: &[ImageId],
        now: u64,
    ) -> Verdict {
        let mut book = self.book();
        let entry = book.challenges.get_mut(challenge_id).ok_or(RejectReason::Unknown)?;
        if entry.consumed {
            return Err(RejectReason::AlreadyUsed);
        }
        if !is_live(entry.challenge.issued_at, entry.challenge.ttl_seconds, now) {
            return Err(RejectReason::Expired);
        }
        if !secret.matches(submitted) {
            return Err(RejectReason::Mismatch);
        }
        entry.consumed = true;
        Ok(())
    }

    pub fn get(&self, challenge_id: &str) -> Option<GraphicalChallenge> {
        self.book().challenges.get(challenge_id).map(|e| e.challenge.clone())
    }

    pub fn revoke(&self, challenge_id: &str) {
        let mut book = self.book();
        if let Some(e) = book.challenges.remove(challenge_id) {
            let key = (e.user_id, e.scope);
            if book.live.get(&key).map(String::as_str) == Some(challenge_id) {
                book.live.remove(&key);
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LockoutPolicy {
    pub threshold: u32,
    pub cooldown_seconds: u64,
}

impl Default for LockoutPolicy {
    fn default() -> Self {
        LockoutPolicy { threshold: 5, cooldown_seconds: 15 * 60 }
    }
}

#[derive(Default, Clone, Copy)]
struct Streak {
    failures: u32,
    locked_until: u64,
}

/// Counts consecutive failures per key and locks the key for a cooldown once
/// the threshold is reached.
pub struct LockoutTracker {
    policy: LockoutPolicy,
    streaks: Mutex<HashMap<String, Streak>>,
}

impl LockoutTracker {
    pub fn new(policy: LockoutPolicy) -> Self {
        LockoutTracker { policy, streaks: Mutex::new(HashMap::new()) }
    }

    pub fn policy(&self) -> LockoutPolicy {
        self.policy
    }

    pub fn is_locked(&self, key: &str, now: u64) -> bool {
        let streaks = self.streaks.lock().unwrap_or_else(|e| e.into_inner());
        streaks.get(key).is_some_and(|s| now < s.locked_until)
    }

    /// Returns true if this failure triggered a lock.
    pub fn record_failure(&self, key: &str, now: u64) -> bool {
        let mut streaks = self.streaks.lock().unwrap_or_else(|e| e.into_inner());
        let s = streaks.entry(key.to_owned()).or_default();
        if now >= s.locked_until && s.locked_until != 0 {
            *s = Streak::default();
        }
        s.failures += 1;
        if s.failures >= self.policy.threshold {
            s.locked_until = now.saturating_add(self.policy.cooldown_seconds);
            s.failures = 0;
            true
        } else {
            false
        }
    }

    pub fn record_success(&self, key: &str) {
        self.streaks.lock().unwrap_or_else(|e| e.into_inner()).remove(key);
    }
}
