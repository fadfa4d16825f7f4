//! Panorama construction from overlapping frames.
//!
//! Pairwise correspondences come from ratio-test SIFT matching; a RANSAC
//! homography aligns each consecutive pair, the chain is composed to the
//! middle frame's reference, frames are inverse-warped with bilinear
//! sampling and feathered blending, and warp voids are cropped away.

mod crop;
mod homography;
mod ransac;
mod warp;

pub use crop::{crop_black_edges, find_crop_rect, CropRect, MAX_UNDEFINED_NUMER, MAX_UNDEFINED_DENOM};
pub use homography::{estimate_homography_dlt, Correspondence, Homography};
pub use ransac::ransac_homography;
pub use warp::{check_overlap, warp_and_blend, Canvas, ColorImage, MaskedImage, OverlapReport};

use thiserror::Error;

use crate::features::{extract_sift, Descriptor, Keypoint, SiftConfig, SiftError};
use crate::matching::{build_index, good_matches, IndexMode};

pub const DEFAULT_RANSAC_ITERATIONS: usize = 2000;
pub const DEFAULT_INLIER_THRESHOLD_PX: f64 = 3.0;
pub const DEFAULT_SEED: u64 = 42;
/// Consecutive frames should overlap at least this much.
pub const MIN_OVERLAP_FRACTION: f64 = 0.30;

#[derive(Debug, Error)]
pub enum StitchError {
    #[error("degenerate correspondence configuration: {0}")]
    DegenerateConfiguration(String),
    #[error("no RANSAC consensus (best inlier count below 4)")]
    NoConsensus,
    #[error("pair {pair_index}/{pair_index_next} failed: {source}")]
    PairFailed {
        pair_index: usize,
        pair_index_next: usize,
        #[source]
        source: Box<StitchError>,
    },
    #[error("stitching needs at least 2 frames, got {0}")]
    TooFewFrames(usize),
    #[error("panorama is entirely undefined, nothing to crop")]
    FullyBlack,
    #[error("composed canvas {0}x{1} is implausibly large")]
    CanvasTooLarge(usize, usize),
    #[error(transparent)]
    Sift(#[from] SiftError),
}

/// Stitching parameters; defaults give reproducible output.
#[derive(Debug, Clone)]
pub struct StitchConfig {
    pub ransac_iterations: usize,
    pub inlier_threshold_px: f64,
    pub seed: u64,
    pub min_overlap: f64,
    pub sift: SiftConfig,
}

impl Default for StitchConfig {
    fn default() -> Self {
        StitchConfig {
            ransac_iterations: DEFAULT_RANSAC_ITERATIONS,
            inlier_threshold_px: DEFAULT_INLIER_THRESHOLD_PX,
            seed: DEFAULT_SEED,
            min_overlap: MIN_OVERLAP_FRACTION,
            sift: SiftConfig::default(),
        }
    }
}

/// Outcome of stitching: the cropped panorama plus per-pair overlap
/// fractions and low-overlap warnings.
#[derive(Debug)]
pub struct StitchOutcome {
    pub panorama: MaskedImage,
    pub pair_overlaps: Vec<f64>,
    /// Pair indexes whose overlap fell below the configured minimum.
    pub low_overlap_pairs: Vec<usize>,
}

/// SIFT features of one frame, in the form the matcher consumes.
fn frame_features(
    frame: &ColorImage,
    sift: &SiftConfig,
) -> Result<(Vec<Keypoint>, Vec<Descriptor>), StitchError> {
    let gray = frame.to_gray();
    let features = extract_sift(&gray, sift)?;
    let mut keypoints = Vec::with_capacity(features.len());
    let mut descriptors = Vec::with_capacity(features.len());
    for (kp, desc) in features {
        keypoints.push(kp);
        descriptors.push(desc);
    }
    Ok((keypoints, descriptors))
}

/// Ratio-test correspondences mapping `src` frame points to `dst` frame
/// points.
pub(crate) fn pairwise_correspondences(
    src: (&[Keypoint], &[Descriptor]),
    dst: (&[Keypoint], &[Descriptor]),
) -> Result<Vec<Correspondence>, StitchError> {
    if dst.1.len() < 2 || src.1.is_empty() {
        return Err(StitchError::DegenerateConfiguration(
            "not enough features to match".into(),
        ));
    }
    let index = build_index(dst.1, IndexMode::Exact)
        .map_err(|e| StitchError::DegenerateConfiguration(e.to_string()))?;
    let matches = good_matches(src.1, &index);
    Ok(matches
        .iter()
        .map(|m| {
            let s = src.0[m.query_index];
            let d = dst.0[m.target_id];
            (
                nalgebra::Point2::new(s.x as f64, s.y as f64),
                nalgebra::Point2::new(d.x as f64, d.y as f64),
            )
        })
        .collect())
}

/// Stitch an ordered frame sequence into a cropped panorama.
///
/// Pairwise homographies map each frame into its predecessor; the chain is
/// composed to the middle frame. A failing pair aborts with its index.
/// Blending runs center-outward so gain normalization anchors to the
/// reference frame's exposure.
pub fn stitch_sequence(frames: &[ColorImage], cfg: &StitchConfig) -> Result<StitchOutcome, StitchError> {
    if frames.len() < 2 {
        return Err(StitchError::TooFewFrames(frames.len()));
    }
    let features: Vec<(Vec<Keypoint>, Vec<Descriptor>)> = frames
        .iter()
        .map(|f| frame_features(f, &cfg.sift))
        .collect::<Result<_, _>>()?;

    // H[i] maps frame i+1 coordinates into frame i
    let mut pair_homographies = Vec::with_capacity(frames.len() - 1);
    let mut pair_overlaps = Vec::with_capacity(frames.len() - 1);
    let mut low_overlap_pairs = Vec::new();
    for i in 0..frames.len() - 1 {
        let fail = |source: StitchError| StitchError::PairFailed {
            pair_index: i,
            pair_index_next: i + 1,
            source: Box::new(source),
        };
        let correspondences = pairwise_correspondences(
            (&features[i + 1].0, &features[i + 1].1),
            (&features[i].0, &features[i].1),
        )
        .map_err(&fail)?;
        let (h, _) = ransac_homography(
            &correspondences,
            cfg.ransac_iterations,
            cfg.inlier_threshold_px,
            cfg.seed,
        )
        .map_err(&fail)?;
        let overlap = warp::quad_overlap_fraction(
            &h,
            frames[i + 1].width(),
            frames[i + 1].height(),
            frames[i].width(),
            frames[i].height(),
        );
        if overlap < cfg.min_overlap {
            low_overlap_pairs.push(i);
        }
        pair_overlaps.push(overlap);
        pair_homographies.push(h);
    }

    // compose everything into the middle frame's coordinates
    let reference = frames.len() / 2;
    let mut to_reference: Vec<Homography> = vec![Homography::identity(); frames.len()];
    for j in reference + 1..frames.len() {
        to_reference[j] = to_reference[j - 1].compose(&pair_homographies[j - 1]);
    }
    for j in (0..reference).rev() {
        let inverse = pair_homographies[j]
            .inverse()
            .map_err(|_| StitchError::DegenerateConfiguration("pair homography not invertible".into()))?;
        to_reference[j] = to_reference[j + 1].compose(&inverse);
    }

    // canvas bounds from all warped frame corners
    let mut min_x = f64::INFINITY;
    let mut min_y = f64::INFINITY;
    let mut max_x = f64::NEG_INFINITY;
    let mut max_y = f64::NEG_INFINITY;
    for (frame, m) in frames.iter().zip(&to_reference) {
        for (cx, cy) in frame.corners() {
            let (x, y) = m.apply(cx, cy);
            min_x = min_x.min(x);
            min_y = min_y.min(y);
            max_x = max_x.max(x);
            max_y = max_y.max(y);
        }
    }
    let offset = (min_x.floor(), min_y.floor());
    let width = (max_x - offset.0).ceil() as usize + 1;
    let height = (max_y - offset.1).ceil() as usize + 1;
    if width.saturating_mul(height) > 64_000_000 {
        return Err(StitchError::CanvasTooLarge(width, height));
    }

    let mut canvas = Canvas::new(width, height, offset);
    let mut order: Vec<usize> = (0..frames.len()).collect();
    order.sort_by_key(|&i| (i.abs_diff(reference), i));
    for i in order {
        warp_and_blend(&mut canvas, &frames[i], &to_reference[i]);
    }
    let panorama = crop_black_edges(&canvas.resolve())?;
    Ok(StitchOutcome {
        panorama,
        pair_overlaps,
        low_overlap_pairs,
    })
}
