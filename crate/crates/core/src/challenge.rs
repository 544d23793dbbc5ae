//! Outcomes shared by every challenge kind.

use std::fmt;

use serde::{Deserialize, Serialize};

/// Why a challenge answer was refused. Recorded in the audit log only; callers
/// on the wire see a single generic failure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RejectReason {
    Unknown,
    Expired,
    AlreadyUsed,
    Mismatch,
    LockedOut,
}

impl RejectReason {
    pub fn as_str(self) -> &'static str {
        match self {
            RejectReason::Unknown => "unknown",
            RejectReason::Expired => "expired",
            RejectReason::AlreadyUsed => "already_used",
            RejectReason::Mismatch => "mismatch",
            RejectReason::LockedOut => "locked_out",
        }
    }
}

impl fmt::Display for RejectReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

pub type Verdict = Result<(), RejectReason>;

/// `now < issued_at + ttl`, saturating.
pub fn is_live(issued_at: u64, ttl_seconds: u64, now: u64) -> bool {
    now < issued_at.saturating_add(ttl_seconds)
}
