//! Per-image matching and the voting decision.

use std::collections::BTreeMap;

use serde_json::{Map, Value};

use super::{good_matches_with_ratio, MatchingError, PlaceDatabase, RATIO_TEST_THRESHOLD};
use crate::features::{extract_sift, Descriptor, GrayImage, SiftConfig};
use crate::geojson;
use crate::geomath::GeoCoordinate;

/// How an image's good-match counts turn into votes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum VoteMode {
    /// Each image casts one vote for its best place.
    #[default]
    OnePerImage,
    /// Each image adds its good-match count to its best place's tally.
    CountWeighted,
}

/// One image's voting outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageVote {
    pub image_index: usize,
    /// None when every per-place count was zero (the image abstains).
    pub best_place: Option<String>,
    pub best_count: u32,
    /// Good-match count per place, aligned with the database record order.
    pub counts: Vec<u32>,
}

/// Aggregated voting result.
#[derive(Debug, Clone, PartialEq)]
pub struct MatchReport {
    pub per_image: Vec<ImageVote>,
    pub tally: BTreeMap<String, u32>,
    pub winner: String,
    pub winner_location: GeoCoordinate,
    /// Set when the top tally was shared and the lexicographically smallest
    /// place id was chosen.
    pub tie: bool,
}

/// Good-match counts of one image's descriptors against every place.
pub fn match_image_to_place(
    image_descs: &[Descriptor],
    db: &PlaceDatabase,
) -> Result<Vec<u32>, MatchingError> {
    match_image_with_ratio(image_descs, db, RATIO_TEST_THRESHOLD)
}

pub fn match_image_with_ratio(
    image_descs: &[Descriptor],
    db: &PlaceDatabase,
    ratio: f32,
) -> Result<Vec<u32>, MatchingError> {
    if db.records().is_empty() {
        return Err(MatchingError::EmptyDatabase);
    }
    Ok((0..db.records().len())
        .map(|place| match db.index_of(place) {
            Some(index) => good_matches_with_ratio(image_descs, index, ratio).len() as u32,
            None => 0,
        })
        .collect())
}

/// Reduce per-image counts to a winner.
///
/// Each image votes for its argmax place and abstains when all counts are
/// zero; within-image ties go to the lexicographically smallest place id.
/// The winner maximizes the tally, ties again resolved lexicographically
/// and flagged in the report.
pub fn vote_places(
    per_image_counts: &[Vec<u32>],
    db: &PlaceDatabase,
    mode: VoteMode,
) -> Result<MatchReport, MatchingError> {
    if db.records().is_empty() {
        return Err(MatchingError::EmptyDatabase);
    }
    let mut per_image = Vec::with_capacity(per_image_counts.len());
    let mut tally: BTreeMap<String, u32> = BTreeMap::new();
    for (image_index, counts) in per_image_counts.iter().enumerate() {
        debug_assert_eq!(counts.len(), db.records().len());
        let best_count = counts.iter().copied().max().unwrap_or(0);
        let best_place = (best_count > 0).then(|| {
            counts
                .iter()
                .enumerate()
                .filter(|&(_, &c)| c == best_count)
                .map(|(i, _)| db.records()[i].place_id.clone())
                .min()
                .expect("a maximal count exists")
        });
        if let Some(place) = &best_place {
            let weight = match mode {
                VoteMode::OnePerImage => 1,
                VoteMode::CountWeighted => best_count,
            };
            *tally.entry(place.clone()).or_insert(0) += weight;
        }
        per_image.push(ImageVote {
            image_index,
            best_place,
            best_count,
            counts: counts.clone(),
        });
    }
    if tally.is_empty() {
        return Err(MatchingError::AllAbstained);
    }
    let top = *tally.values().max().expect("tally non-empty");
    let winners: Vec<&String> = tally.iter().filter(|(_, &v)| v == top).map(|(k, _)| k).collect();
    let winner = winners[0].clone(); // BTreeMap iterates in key order
    let tie = winners.len() > 1;
    let winner_location = db
        .find(&winner)
        .expect("winner comes from the database")
        .location;
    Ok(MatchReport {
        per_image,
        tally,
        winner,
        winner_location,
        tie,
    })
}

/// Recognition parameters.
#[derive(Debug, Clone, Default)]
pub struct RecognizeConfig {
    pub sift: SiftConfig,
    pub vote_mode: VoteMode,
    /// Ratio-test threshold override; `None` uses the standard 0.75.
    pub ratio: Option<f32>,
}

/// Full pipeline: extract, match, vote, and emit the winner marker.
///
/// The marker is a GeoJSON Point at the winning place's stored coordinates
/// with properties `name`, `place_id`, `votes` and `color: "green"`.
pub fn recognize_place(
    images: &[GrayImage],
    db: &PlaceDatabase,
    cfg: &RecognizeConfig,
) -> Result<(MatchReport, Vec<u8>), MatchingError> {
    if db.records().is_empty() {
        return Err(MatchingError::EmptyDatabase);
    }
    let ratio = cfg.ratio.unwrap_or(RATIO_TEST_THRESHOLD);
    let mut per_image_counts = Vec::with_capacity(images.len());
    for image in images {
        let features = extract_sift(image, &cfg.sift)?;
        let descriptors: Vec<Descriptor> = features.into_iter().map(|(_, d)| d).collect();
        per_image_counts.push(match_image_with_ratio(&descriptors, db, ratio)?);
    }
    let report = vote_places(&per_image_counts, db, cfg.vote_mode)?;
    let marker = marker_geojson(&report, db);
    Ok((report, marker))
}

/// GeoJSON Point marker for a finished vote.
pub fn marker_geojson(report: &MatchReport, db: &PlaceDatabase) -> Vec<u8> {
    let record = db.find(&report.winner).expect("winner exists");
    let mut props = Map::new();
    props.insert("place_id".into(), Value::from(record.place_id.clone()));
    props.insert("name".into(), Value::from(record.name.clone()));
    props.insert(
        "votes".into(),
        Value::from(report.tally.get(&report.winner).copied().unwrap_or(0)),
    );
    props.insert("color".into(), Value::from("green"));
    props.insert("tie".into(), Value::from(report.tie));
    let feature = geojson::point_feature(record.location, props);
    geojson::to_bytes(&geojson::feature_collection(vec![feature]))
}
