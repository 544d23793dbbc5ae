//! Protection-ring assignment from client-supplied CIA ratings.
//!
//! Every stored object carries a Confidentiality / Integrity / Availability
//! triple on a 1..=10 scale. The ring decides which authentication method
//! guards retrieval:
//!
//! | rule | condition                          | ring  |
//! |------|------------------------------------|-------|
//! | R1   | `c > 6 && i > 6`                   | 1     |
//! | R2   | `3 < ci < 5 && a < 5`              | 2     |
//! | R3   | `3 < ci < 5 && a > 5`              | 3     |
//! | R4   | `1 <= ci <= 3`                     | 3     |
//! | gap  | `3 < ci < 5 && a == 5`             | 2     |
//! | gap  | `ci >= 5` without R1               | 2     |
//!
//! where `ci = (c + i) / 2`. R1 is evaluated first and short-circuits.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const RATING_MIN: i64 = 1;
pub const RATING_MAX: i64 = 10;

/// Which of the three ratings a validation error refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CiaField {
    Confidentiality,
    Integrity,
    Availability,
}

impl fmt::Display for CiaField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CiaField::Confidentiality => "confidentiality",
            CiaField::Integrity => "integrity",
            CiaField::Availability => "availability",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RatingError {
    #[error("{field} rating {value} is out of range ({RATING_MIN}..={RATING_MAX})")]
    OutOfRange { field: CiaField, value: i64 },
}

/// A validated (C, I, A) triple, each component in `1..=10`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawRating", into = "RawRating")]
pub struct CiaRating {
    c: u8,
    i: u8,
    a: u8,
}

#[derive(Serialize, Deserialize)]
struct RawRating {
    confidentiality: i64,
    integrity: i64,
    availability: i64,
}

impl TryFrom<RawRating> for CiaRating {
    type Error = RatingError;

    fn try_from(raw: RawRating) -> Result<Self, Self::Error> {
        validate_rating(raw.confidentiality, raw.integrity, raw.availability)
    }
}

impl From<CiaRating> for RawRating {
    fn from(r: CiaRating) -> Self {
        RawRating {
            confidentiality: r.c.into(),
            integrity: r.i.into(),
            availability: r.a.into(),
        }
    }
}

impl CiaRating {
    pub fn new(c: i64, i: i64, a: i64) -> Result<Self, RatingError> {
        validate_rating(c, i, a)
    }

    pub fn confidentiality(&self) -> u8 {
        self.c
    }

    pub fn integrity(&self) -> u8 {
        self.i
    }

    pub fn availability(&self) -> u8 {
        self.a
    }

    /// Iterates all 1000 valid ratings in (c, i, a) lexicographic order.
    pub fn all() -> impl Iterator<Item = CiaRating> {
        (1..=10u8).flat_map(|c| {
            (1..=10u8).flat_map(move |i| (1..=10u8).map(move |a| CiaRating { c, i, a }))
        })
    }
}

impl fmt::Display for CiaRating {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "C={} I={} A={}", self.c, self.i, self.a)
    }
}

/// Validates a raw triple. The first offending field (in C, I, A order) is reported.
pub fn validate_rating(c: i64, i: i64, a: i64) -> Result<CiaRating, RatingError> {
    let check = |field, value: i64| {
        if (RATING_MIN..=RATING_MAX).contains(&value) {
            Ok(value as u8)
        } else {
            Err(RatingError::OutOfRange { field, value })
        }
    };
    Ok(CiaRating {
        c: check(CiaField::Confidentiality, c)?,
        i: check(CiaField::Integrity, i)?,
        a: check(CiaField::Availability, a)?,
    })
}

/// The mean of confidentiality and integrity, held exactly as a count of halves.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CriticalityIndex {
    halves: u8,
}

impl CriticalityIndex {
    /// `ci` as `numerator / 2`. The numerator is `c + i`.
    pub fn halves(&self) -> u8 {
        self.halves
    }

    pub fn is_integer(&self) -> bool {
        self.halves.is_multiple_of(2)
    }

    /// Lossless for every reachable value (multiples of 0.5 up to 10).
    pub fn as_f64(&self) -> f64 {
        f64::from(self.halves) / 2.0
    }

    fn gt(&self, whole: u8) -> bool {
        self.halves > 2 * whole
    }

    fn lt(&self, whole: u8) -> bool {
        self.halves < 2 * whole
    }

    fn le(&self, whole: u8) -> bool {
        self.halves <= 2 * whole
    }
}

impl fmt::Display for CriticalityIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_integer() {
            write!(f, "{}", self.halves / 2)
        } else {
            write!(f, "{}.5", self.halves / 2)
        }
    }
}

pub fn compute_ci(rating: &CiaRating) -> CriticalityIndex {
    CriticalityIndex {
        halves: rating.c + rating.i,
    }
}

/// Security class of a stored object. Ring 1 is the most protected.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "u8", try_from = "u8")]
pub enum ProtectionRing {
    Ring1High,
    Ring2Mid,
    Ring3Low,
}

impl ProtectionRing {
    pub const ALL: [ProtectionRing; 3] = [
        ProtectionRing::Ring1High,
        ProtectionRing::Ring2Mid,
        ProtectionRing::Ring3Low,
    ];

    pub fn level(self) -> u8 {
        match self {
            ProtectionRing::Ring1High => 1,
            ProtectionRing::Ring2Mid => 2,
            ProtectionRing::Ring3Low => 3,
        }
    }

    pub fn from_level(level: u8) -> Option<Self> {
        match level {
            1 => Some(ProtectionRing::Ring1High),
            2 => Some(ProtectionRing::Ring2Mid),
            3 => Some(ProtectionRing::Ring3Low),
            _ => None,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            ProtectionRing::Ring1High => "high",
            ProtectionRing::Ring2Mid => "mid",
            ProtectionRing::Ring3Low => "low",
        }
    }
}

impl From<ProtectionRing> for u8 {
    fn from(ring: ProtectionRing) -> u8 {
        ring.level()
    }
}

impl TryFrom<u8> for ProtectionRing {
    type Error = String;

    fn try_from(level: u8) -> Result<Self, Self::Error> {
        ProtectionRing::from_level(level).ok_or_else(|| format!("no protection ring {level}"))
    }
}

impl fmt::Display for ProtectionRing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.level())
    }
}

/// Assigns the protection ring. Total over all valid ratings.
pub fn classify(rating: &CiaRating) -> ProtectionRing {
    if rating.c > 6 && rating.i > 6 {
        return ProtectionRing::Ring1High;
    }
    let ci = compute_ci(rating);
    let a = rating.a;
    if ci.gt(3) && ci.lt(5) {
        // a == 5 falls between the two band rules; keep it in the stricter ring.
        if a > 5 {
            ProtectionRing::Ring3Low
        } else {
            ProtectionRing::Ring2Mid
        }
    } else if ci.le(3) {
        ProtectionRing::Ring3Low
    } else {
        // ci >= 5 with c or i at most 6: above the mid band but short of R1.
        ProtectionRing::Ring2Mid
    }
}

pub fn classify_batch(ratings: &[CiaRating]) -> Vec<ProtectionRing> {
    ratings.iter().map(classify).collect()
}
