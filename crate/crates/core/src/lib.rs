//! Core of RingVault: a cloud storage service that files every object into
//! one of three protection rings and guards each ring with a different
//! authentication method.
//!
//! * [`classification`] maps a CIA rating to a [`ProtectionRing`].
//! * [`crypto`] is the client-side DES-CBC envelope; keys never leave the client.
//! * [`otp`] derives, delivers and verifies ring-1 one-time passwords.
//! * [`graphical`] enrolls and verifies ring-2 graphical passwords.
//!
//! Ring 3 only asks for the account password again, which the server crate handles.

pub mod challenge;
pub mod classification;
pub mod clock;
pub mod crypto;
pub mod graphical;
pub mod otp;
pub mod token;

pub use challenge::{RejectReason, Verdict};
pub use classification::{classify, CiaRating, ProtectionRing};
pub use clock::{Clock, ManualClock, SystemClock};
