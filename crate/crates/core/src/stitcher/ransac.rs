//! RANSAC homography fitting.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use super::homography::{estimate_homography_dlt, Correspondence, Homography};
use super::StitchError;

/// Robust homography fit.
///
/// Samples 4-point minimal sets for `iterations` rounds, keeps the largest
/// consensus (forward reprojection error below `inlier_threshold_px`), then
/// refits on the winning inliers. Deterministic for a fixed `seed`; the
/// returned mask is re-evaluated under the refit model.
pub fn ransac_homography(
    correspondences: &[Correspondence],
    iterations: usize,
    inlier_threshold_px: f64,
    seed: u64,
) -> Result<(Homography, Vec<bool>), StitchError> {
    let n = correspondences.len();
    if n < 4 {
        return Err(StitchError::NoConsensus);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<(usize, Homography)> = None;
    for _ in 0..iterations.max(1) {
        let sample = rand::seq::index::sample(&mut rng, n, 4);
        let minimal: Vec<Correspondence> =
            sample.iter().map(|i| correspondences[i]).collect();
        let Ok(model) = estimate_homography_dlt(&minimal) else {
            continue;
        };
        let count = correspondences
            .iter()
            .filter(|pair| model.reprojection_error(pair) < inlier_threshold_px)
            .count();
        if best.as_ref().map(|(c, _)| count > *c).unwrap_or(true) {
            best = Some((count, model));
        }
    }
    let Some((count, model)) = best else {
        return Err(StitchError::NoConsensus);
    };
    if count < 4 {
        return Err(StitchError::NoConsensus);
    }

    let consensus: Vec<Correspondence> = correspondences
        .iter()
        .filter(|pair| model.reprojection_error(pair) < inlier_threshold_px)
        .copied()
        .collect();
    let refit = estimate_homography_dlt(&consensus).unwrap_or(model);
    let mask: Vec<bool> = correspondences
        .iter()
        .map(|pair| refit.reprojection_error(pair) < inlier_threshold_px)
        .collect();
    if mask.iter().filter(|&&m| m).count() < 4 {
        return Err(StitchError::NoConsensus);
    }
    Ok((refit, mask))
}
