//! Segmentation-coverage filtering.
//!
//! Masks come from an external panoptic segmentation step as 8-bit label
//! images plus a JSON legend sidecar. Query images are retained when their
//! road + pavement coverage stays below a threshold (default 40%), so that
//! frames dominated by road surface never reach place matching.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::imgio::GrayImageU8;

/// Classes counted by the default retention rule.
pub const DEFAULT_FILTER_CLASSES: [&str; 2] = ["road", "pavement"];
/// Retain an image only when coverage is strictly below this fraction.
pub const DEFAULT_COVERAGE_THRESHOLD: f64 = 0.40;

#[derive(Debug, Error)]
pub enum SegfilterError {
    #[error("class {0:?} is not present in the mask legend")]
    UnknownClass(String),
    #[error("mask uses label {0} which the legend does not name")]
    UnlabeledId(u8),
    #[error("legend JSON is malformed: {0}")]
    BadLegend(String),
    #[error("threshold {0} outside (0, 1]")]
    BadThreshold(f64),
}

/// A per-pixel class-label image with its legend.
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentationMask {
    labels: GrayImageU8,
    legend: BTreeMap<u8, String>,
}

impl SegmentationMask {
    /// Every label occurring in the image must be named by the legend.
    pub fn new(labels: GrayImageU8, legend: BTreeMap<u8, String>) -> Result<Self, SegfilterError> {
        let present: BTreeSet<u8> = labels.data.iter().copied().collect();
        for id in present {
            if !legend.contains_key(&id) {
                return Err(SegfilterError::UnlabeledId(id));
            }
        }
        Ok(Self { labels, legend })
    }

    pub fn dimensions(&self) -> (usize, usize) {
        (self.labels.width, self.labels.height)
    }

    pub fn legend(&self) -> &BTreeMap<u8, String> {
        &self.legend
    }
}

/// Parse the legend sidecar: `{"classes": {"7": "road", "11": "pavement"}}`.
pub fn parse_legend_json(bytes: &[u8]) -> Result<BTreeMap<u8, String>, SegfilterError> {
    let doc: serde_json::Value =
        serde_json::from_slice(bytes).map_err(|e| SegfilterError::BadLegend(e.to_string()))?;
    let classes = doc
        .get("classes")
        .and_then(|c| c.as_object())
        .ok_or_else(|| SegfilterError::BadLegend("missing classes object".into()))?;
    let mut legend = BTreeMap::new();
    for (key, value) in classes {
        let id: u8 = key
            .parse()
            .map_err(|_| SegfilterError::BadLegend(format!("class id {key:?} is not a u8")))?;
        let name = value
            .as_str()
            .ok_or_else(|| SegfilterError::BadLegend(format!("class {key} name is not a string")))?;
        legend.insert(id, name.to_owned());
    }
    Ok(legend)
}

/// Fraction of pixels labeled with any of the requested classes.
pub fn coverage_fraction(
    mask: &SegmentationMask,
    classes: &[&str],
) -> Result<f64, SegfilterError> {
    let mut wanted_ids = BTreeSet::new();
    for &class in classes {
        let ids: Vec<u8> = mask
            .legend
            .iter()
            .filter(|(_, name)| name.as_str() == class)
            .map(|(&id, _)| id)
            .collect();
        if ids.is_empty() {
            return Err(SegfilterError::UnknownClass(class.to_owned()));
        }
        wanted_ids.extend(ids);
    }
    let covered = mask
        .labels
        .data
        .iter()
        .filter(|label| wanted_ids.contains(label))
        .count();
    Ok(covered as f64 / mask.labels.data.len() as f64)
}

/// Per-image outcome of a filtering pass, in input order.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterOutcome {
    pub retained: Vec<String>,
    pub rejected: Vec<String>,
    /// `(image id, coverage fraction)` for every input.
    pub fractions: Vec<(String, f64)>,
}

/// Retain images whose road + pavement coverage is strictly below
/// `threshold`.
pub fn filter_images(
    pairs: &[(String, SegmentationMask)],
    threshold: f64,
) -> Result<FilterOutcome, SegfilterError> {
    filter_images_by_classes(pairs, &DEFAULT_FILTER_CLASSES, threshold)
}

pub fn filter_images_by_classes(
    pairs: &[(String, SegmentationMask)],
    classes: &[&str],
    threshold: f64,
) -> Result<FilterOutcome, SegfilterError> {
    if !(threshold > 0.0 && threshold <= 1.0) {
        return Err(SegfilterError::BadThreshold(threshold));
    }
    let mut outcome = FilterOutcome {
        retained: Vec::new(),
        rejected: Vec::new(),
        fractions: Vec::new(),
    };
    for (id, mask) in pairs {
        let fraction = coverage_fraction(mask, classes)?;
        outcome.fractions.push((id.clone(), fraction));
        if fraction < threshold {
            outcome.retained.push(id.clone());
        } else {
            outcome.rejected.push(id.clone());
        }
    }
    Ok(outcome)
}

/// Alternate rule for class sets that must dominate the frame (e.g. keep
/// images that are mostly buildings): retain when coverage exceeds
/// `threshold`.
pub fn filter_images_min_coverage(
    pairs: &[(String, SegmentationMask)],
    classes: &[&str],
    threshold: f64,
) -> Result<FilterOutcome, SegfilterError> {
    if !(threshold > 0.0 && threshold <= 1.0) {
        return Err(SegfilterError::BadThreshold(threshold));
    }
    let mut outcome = FilterOutcome {
        retained: Vec::new(),
        rejected: Vec::new(),
        fractions: Vec::new(),
    };
    for (id, mask) in pairs {
        let fraction = coverage_fraction(mask, classes)?;
        outcome.fractions.push((id.clone(), fraction));
        if fraction > threshold {
            outcome.retained.push(id.clone());
        } else {
            outcome.rejected.push(id.clone());
        }
    }
    Ok(outcome)
}
