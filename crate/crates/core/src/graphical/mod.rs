//! Recognition-based graphical passwords.
//!
//! The catalog holds three sets of eight images. A secret is one image id per
//! set. Every challenge presents each set in a freshly shuffled order, and the
//! answer is compared by image id, so display position never matters.

mod authority;
mod shuffle;

pub use authority::{GraphicalAuthority, LockoutPolicy, LockoutTracker, DEFAULT_GRAPHICAL_TTL};
pub use shuffle::{fisher_yates, uniform_below};

use std::collections::HashSet;
use std::path::Path;

use rand::{CryptoRng, RngCore};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::token::random_token;

pub const SET_COUNT: usize = 3;
pub const SET_SIZE: usize = 8;

pub type ImageId = u32;

/// Directory holding the bundled catalog manifest and its images.
pub const BUNDLED_ASSETS_DIR: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/assets");

const BUNDLED_MANIFEST: &str = include_str!("../../assets/catalog.json");

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphicalError {
    #[error("invalid catalog: {0}")]
    InvalidCatalog(String),
    #[error("invalid selection: {0}")]
    InvalidSelection(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ImageEntry {
    pub image_id: ImageId,
    pub label: String,
    pub asset_ref: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ImageSet {
    #[serde(default)]
    pub name: String,
    pub images: Vec<ImageEntry>,
}

/// Three sets of eight images with 24 distinct ids. Immutable once loaded.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawCatalog")]
pub struct ImageCatalog {
    sets: Vec<ImageSet>,
}

#[derive(Deserialize)]
struct RawCatalog {
    sets: Vec<ImageSet>,
}

impl TryFrom<RawCatalog> for ImageCatalog {
    type Error = GraphicalError;

    fn try_from(raw: RawCatalog) -> Result<Self, Self::Error> {
        ImageCatalog::new(raw.sets)
    }
}

impl ImageCatalog {
    pub fn new(sets: Vec<ImageSet>) -> Result<Self, GraphicalError> {
        let bad = |m: String| Err(GraphicalError::InvalidCatalog(m));
        if sets.len() != SET_COUNT {
            return bad(format!("expected {SET_COUNT} sets, found {}", sets.len()));
        }
        let mut seen = HashSet::new();
        for (k, set) in sets.iter().enumerate() {
            if set.images.len() != SET_SIZE {
                return bad(format!("set {} has {} images, expected {SET_SIZE}", k + 1, set.images.len()));
            }
            for img in &set.images {
                if !seen.insert(img.image_id) {
                    return bad(format!("duplicate image id {}", img.image_id));
                }
                let path = Path::new(&img.asset_ref);
                if path.is_absolute() || path.components().any(|c| matches!(c, std::path::Component::ParentDir)) {
                    return bad(format!("asset_ref {:?} must be a relative path", img.asset_ref));
                }
            }
        }
        Ok(ImageCatalog { sets })
    }

    pub fn from_json(text: &str) -> Result<Self, GraphicalError> {
        serde_json::from_str(text).map_err(|e| GraphicalError::InvalidCatalog(e.to_string()))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, GraphicalError> {
        let text = std::fs::read_to_string(path.as_ref())
            .map_err(|e| GraphicalError::InvalidCatalog(format!("{}: {e}", path.as_ref().display())))?;
        Self::from_json(&text)
    }

    /// The manifest shipped with this crate.
    pub fn bundled() -> Self {
        Self::from_json(BUNDLED_MANIFEST).expect("bundled catalog is valid")
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("catalog serializes")
    }

    pub fn sets(&self) -> &[ImageSet] {
        &self.sets
    }

    pub fn set_ids(&self, k: usize) -> Vec<ImageId> {
        self.sets[k].images.iter().map(|i| i.image_id).collect()
    }

    pub fn set_of(&self, id: ImageId) -> Option<usize> {
        self.sets.iter().position(|s| s.images.iter().any(|i| i.image_id == id))
    }

    pub fn entry(&self, id: ImageId) -> Option<&ImageEntry> {
        self.sets.iter().flat_map(|s| s.images.iter()).find(|i| i.image_id == id)
    }
}

/// One image id per catalog set, in set order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphicalSecret {
    pub selections: [ImageId; SET_COUNT],
}

impl GraphicalSecret {
    /// Compares by id regardless of the order the ids were submitted in.
    pub fn matches(&self, submitted: &[ImageId]) -> bool {
        if submitted.len() != SET_COUNT {
            return false;
        }
        let mut want = self.selections;
        let mut got = [0; SET_COUNT];
        got.copy_from_slice(submitted);
        want.sort_unstable();
        got.sort_unstable();
        want == got
    }
}

/// Validates a selection against the catalog: exactly one id from each set, in set order.
pub fn enroll(catalog: &ImageCatalog, selections: &[ImageId]) -> Result<GraphicalSecret, GraphicalError> {
    if selections.len() != SET_COUNT {
        return Err(GraphicalError::InvalidSelection(format!(
            "expected {SET_COUNT} image ids, got {}",
            selections.len()
        )));
    }
    for (k, &id) in selections.iter().enumerate() {
        if catalog.set_of(id) != Some(k) {
            return Err(GraphicalError::InvalidSelection(format!("image {id} is not in set {}", k + 1)));
        }
    }
    Ok(GraphicalSecret { selections: [selections[0], selections[1], selections[2]] })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphicalChallenge {
    pub challenge_id: String,
    pub presented_sets: [Vec<ImageId>; SET_COUNT],
    pub issued_at: u64,
    pub ttl_seconds: u64,
}

impl GraphicalChallenge {
    pub fn expires_at(&self) -> u64 {
        self.issued_at.saturating_add(self.ttl_seconds)
    }
}

/// Presents every catalog set in an independent uniformly random order.
pub fn issue_challenge<R: CryptoRng + RngCore + ?Sized>(
    catalog: &ImageCatalog,
    rng: &mut R,
    now: u64,
    ttl_seconds: u64,
) -> GraphicalChallenge {
    let mut shuffled = |k: usize| {
        let mut ids = catalog.set_ids(k);
        fisher_yates(&mut ids, rng);
        ids
    };
    let presented_sets = [shuffled(0), shuffled(1), shuffled(2)];
    GraphicalChallenge { challenge_id: random_token(rng), presented_sets, issued_at: now, ttl_seconds }
}
