//! Place recognition: descriptor indexing, ratio-test matching, the place
//! database, and per-image voting.
//!
//! A query image casts one vote for the place it matches best; the place
//! with the most votes across all query images wins. A match counts as
//! "good" when its nearest-neighbor distance is strictly below 0.75 of the
//! second-nearest distance.

mod archive;
mod index;
mod vote;

pub use archive::{load_archive, save_archive, ArchiveError, DescriptorMode, WFDB_MAGIC, WFDB_VERSION};
pub use index::{
    build_index, good_matches, good_matches_with_ratio, knn2, nearest, ratio_test,
    DescriptorIndex, GoodMatch, IndexMode, Knn2,
};
pub use vote::{
    match_image_to_place, recognize_place, vote_places, ImageVote, MatchReport, RecognizeConfig,
    VoteMode,
};

use thiserror::Error;

use crate::features::{Descriptor, Keypoint, SiftError};
use crate::geomath::GeoCoordinate;

/// Fixed ratio-test threshold: nearest distance must be strictly below
/// 0.75 of the second nearest.
pub const RATIO_TEST_THRESHOLD: f32 = 0.75;

#[derive(Debug, Error)]
pub enum MatchingError {
    #[error("cannot build an index over an empty descriptor list")]
    EmptyInput,
    #[error("k-nearest-neighbor query needs at least 2 indexed descriptors")]
    InsufficientEntries,
    #[error("place database contains no places")]
    EmptyDatabase,
    #[error("every query image abstained from voting")]
    AllAbstained,
    #[error("duplicate place id {0:?}")]
    DuplicatePlaceId(String),
    #[error(transparent)]
    Sift(#[from] SiftError),
}

/// A named place: coordinates plus the SIFT features of its panorama.
#[derive(Debug, Clone, PartialEq)]
pub struct PlaceRecord {
    pub place_id: String,
    pub name: String,
    pub location: GeoCoordinate,
    pub keypoints: Vec<Keypoint>,
    pub descriptors: Vec<Descriptor>,
}

impl PlaceRecord {
    /// Build a record from extraction output.
    ///
    /// Pyramid bookkeeping (octave, layer, response) is extraction-internal
    /// and not part of the archived geometry, so it is zeroed here; only
    /// position, scale and orientation persist.
    pub fn from_features(
        place_id: impl Into<String>,
        name: impl Into<String>,
        location: GeoCoordinate,
        features: Vec<(Keypoint, Descriptor)>,
    ) -> Self {
        let mut keypoints = Vec::with_capacity(features.len());
        let mut descriptors = Vec::with_capacity(features.len());
        for (kp, desc) in features {
            keypoints.push(Keypoint {
                octave: 0,
                layer: 0,
                response: 0.0,
                ..kp
            });
            descriptors.push(desc);
        }
        PlaceRecord {
            place_id: place_id.into(),
            name: name.into(),
            location,
            keypoints,
            descriptors,
        }
    }
}

/// Immutable database of places with per-place descriptor indexes.
#[derive(Debug)]
pub struct PlaceDatabase {
    records: Vec<PlaceRecord>,
    indexes: Vec<Option<DescriptorIndex>>,
    mode: IndexMode,
}

impl PlaceDatabase {
    /// Indexes every place eagerly; places with fewer than two descriptors
    /// get no index and never produce good matches.
    pub fn new(records: Vec<PlaceRecord>, mode: IndexMode) -> Result<Self, MatchingError> {
        let mut seen = std::collections::BTreeSet::new();
        for record in &records {
            debug_assert_eq!(record.keypoints.len(), record.descriptors.len());
            if !seen.insert(record.place_id.clone()) {
                return Err(MatchingError::DuplicatePlaceId(record.place_id.clone()));
            }
        }
        let indexes = records
            .iter()
            .map(|record| {
                (record.descriptors.len() >= 2)
                    .then(|| build_index(&record.descriptors, mode))
                    .transpose()
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(PlaceDatabase {
            records,
            indexes,
            mode,
        })
    }

    pub fn records(&self) -> &[PlaceRecord] {
        &self.records
    }

    pub fn index_mode(&self) -> IndexMode {
        self.mode
    }

    pub(crate) fn index_of(&self, place: usize) -> Option<&DescriptorIndex> {
        self.indexes[place].as_ref()
    }

    pub fn find(&self, place_id: &str) -> Option<&PlaceRecord> {
        self.records.iter().find(|r| r.place_id == place_id)
    }
}

impl PartialEq for PlaceDatabase {
    /// Databases compare by content; the rebuilt indexes are derived state.
    fn eq(&self, other: &Self) -> bool {
        self.records == other.records
    }
}
