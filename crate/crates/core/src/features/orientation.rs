//! Gradient-orientation assignment.

use super::{Keypoint, ScaleSpace};

const HISTOGRAM_BINS: usize = 36;
/// Gaussian weighting sigma as a multiple of the keypoint scale.
const ORIENTATION_SIGMA_FACTOR: f32 = 1.5;
/// Collection radius = 3 * weighting sigma.
const RADIUS_FACTOR: f32 = 3.0;
/// Secondary peaks at or above this fraction of the maximum also emit.
const PEAK_RATIO: f32 = 0.8;

/// Compute dominant gradient orientations for a refined keypoint.
///
/// A 36-bin histogram of gradient angles, Gaussian-weighted around the
/// keypoint (sigma `1.5 * scale`), is smoothed once; every local maximum
/// within 80% of the global maximum yields one keypoint, its angle sharpened
/// by parabolic interpolation of the three surrounding bins.
pub fn assign_orientation(kp: &Keypoint, space: &ScaleSpace) -> Vec<Keypoint> {
    let octave = &space.octaves[kp.octave];
    let image = &octave.gaussians[kp.layer.min(octave.gaussians.len() - 1)];
    let octave_scale = (1u32 << kp.octave) as f32;
    let x = kp.x / octave_scale;
    let y = kp.y / octave_scale;
    let sigma_octave = kp.scale / octave_scale;

    let sigma_w = ORIENTATION_SIGMA_FACTOR * sigma_octave;
    let radius = (RADIUS_FACTOR * sigma_w).round().max(1.0) as i64;
    let (w, h) = (image.width() as i64, image.height() as i64);
    let cx = x.round() as i64;
    let cy = y.round() as i64;

    let mut hist = [0.0f32; HISTOGRAM_BINS];
    for dy in -radius..=radius {
        let py = cy + dy;
        if py < 1 || py >= h - 1 {
            continue;
        }
        for dx in -radius..=radius {
            let px = cx + dx;
            if px < 1 || px >= w - 1 {
                continue;
            }
            let (px, py) = (px as usize, py as usize);
            let gx = 0.5 * (image.get(px + 1, py) - image.get(px - 1, py));
            let gy = 0.5 * (image.get(px, py + 1) - image.get(px, py - 1));
            let magnitude = (gx * gx + gy * gy).sqrt();
            if magnitude == 0.0 {
                continue;
            }
            let weight =
                (-((dx * dx + dy * dy) as f32) / (2.0 * sigma_w * sigma_w)).exp() * magnitude;
            let angle = gy.atan2(gx).to_degrees().rem_euclid(360.0);
            // linear split between the two nearest bins keeps sub-bin
            // accuracy through the parabolic peak fit
            let position = angle / 360.0 * HISTOGRAM_BINS as f32;
            let low = position.floor();
            let frac = position - low;
            let low = low as usize % HISTOGRAM_BINS;
            hist[low] += weight * (1.0 - frac);
            hist[(low + 1) % HISTOGRAM_BINS] += weight * frac;
        }
    }

    let smoothed = smooth_histogram(&hist);
    let max = smoothed.iter().cloned().fold(0.0f32, f32::max);
    if max <= 0.0 {
        return Vec::new();
    }
    let threshold = PEAK_RATIO * max;

    let mut out = Vec::new();
    for k in 0..HISTOGRAM_BINS {
        let left = smoothed[(k + HISTOGRAM_BINS - 1) % HISTOGRAM_BINS];
        let right = smoothed[(k + 1) % HISTOGRAM_BINS];
        let center = smoothed[k];
        // `>=` on the right resolves exact two-bin plateaus to one peak
        if center > left && center >= right && center >= threshold {
            // parabolic peak interpolation
            let denom = left - 2.0 * center + right;
            let delta = if denom.abs() > 1e-12 {
                0.5 * (left - right) / denom
            } else {
                0.0
            };
            let bin = (k as f32 + delta).rem_euclid(HISTOGRAM_BINS as f32);
            let orientation = (bin * 360.0 / HISTOGRAM_BINS as f32).rem_euclid(360.0);
            out.push(Keypoint {
                orientation,
                ..*kp
            });
        }
    }
    out
}

/// One pass of the circular [1, 4, 6, 4, 1] / 16 kernel.
fn smooth_histogram(hist: &[f32; HISTOGRAM_BINS]) -> [f32; HISTOGRAM_BINS] {
    let n = HISTOGRAM_BINS;
    let mut out = [0.0f32; HISTOGRAM_BINS];
    for i in 0..n {
        out[i] = (hist[(i + n - 2) % n] + hist[(i + 2) % n]) * (1.0 / 16.0)
            + (hist[(i + n - 1) % n] + hist[(i + 1) % n]) * (4.0 / 16.0)
            + hist[i] * (6.0 / 16.0);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::{build_scale_space, detect_extrema, refine_keypoint, GrayImage, SiftConfig};

    /// A ramp whose gradient points along `angle_deg` (y down convention).
    fn ramp_image(n: usize, angle_deg: f32) -> GrayImage {
        let (dx, dy) = (
            angle_deg.to_radians().cos(),
            angle_deg.to_radians().sin(),
        );
        let mut data = vec![0.0f32; n * n];
        for y in 0..n {
            for x in 0..n {
                let t = (x as f32 * dx + y as f32 * dy) / (2.0 * n as f32) + 0.5;
                data[y * n + x] = t.clamp(0.0, 1.0);
            }
        }
        GrayImage::new(n, n, data).unwrap()
    }

    #[test]
    fn ramp_orientation_matches_gradient_direction() {
        let cfg = SiftConfig::default();
        for angle in [0.0f32, 45.0, 137.0, 250.0] {
            let img = ramp_image(64, angle);
            let space = build_scale_space(&img, &cfg).unwrap();
            // synthesize a keypoint at the ramp center; ramps have no DoG
            // extrema of their own
            let kp = Keypoint {
                x: 64.0,
                y: 64.0,
                scale: 3.2,
                orientation: 0.0,
                octave: 0,
                layer: 1,
                response: 1.0,
            };
            let oriented = assign_orientation(&kp, &space);
            assert_eq!(oriented.len(), 1, "ramp at {angle} deg emitted {oriented:?}");
            let got = oriented[0].orientation;
            let diff = (got - angle).rem_euclid(360.0).min((angle - got).rem_euclid(360.0));
            assert!(diff <= 2.0, "ramp {angle}: orientation {got}");
        }
    }

    #[test]
    fn rotating_the_image_rotates_orientations() {
        let cfg = SiftConfig::default();
        let n = 64usize;
        // asymmetric texture: two blobs of different sign
        let mut data = vec![0.5f32; n * n];
        for y in 0..n {
            for x in 0..n {
                let d1 = ((x as f32 - 24.0).powi(2) + (y as f32 - 32.0).powi(2)) / 18.0;
                let d2 = ((x as f32 - 44.0).powi(2) + (y as f32 - 30.0).powi(2)) / 8.0;
                data[y * n + x] = (0.5 + 0.45 * (-d1).exp() - 0.4 * (-d2).exp()).clamp(0.0, 1.0);
            }
        }
        let img = GrayImage::new(n, n, data.clone()).unwrap();
        // rotate 90 degrees counterclockwise in image coords:
        // (x, y) -> (y, n-1-x)
        let mut rotated = vec![0.0f32; n * n];
        for y in 0..n {
            for x in 0..n {
                rotated[(n - 1 - x) * n + y] = data[y * n + x];
            }
        }
        let rot_img = GrayImage::new(n, n, rotated).unwrap();

        let orientations = |img: &GrayImage| -> Vec<f32> {
            let space = build_scale_space(img, &cfg).unwrap();
            detect_extrema(&space, &cfg)
                .iter()
                .filter_map(|c| refine_keypoint(c, &space, &cfg))
                .flat_map(|kp| assign_orientation(&kp, &space))
                .map(|kp| kp.orientation)
                .collect()
        };
        let base = orientations(&img);
        let rotated = orientations(&rot_img);
        assert!(!base.is_empty() && !rotated.is_empty());

        // the rotation maps gradients theta -> theta - 90 (mod 360); every
        // base orientation should have a counterpart within 3 degrees
        let mut matched = 0usize;
        for &b in &base {
            let target = (b - 90.0).rem_euclid(360.0);
            if rotated.iter().any(|&r| {
                let d = (r - target).rem_euclid(360.0);
                d.min(360.0 - d) <= 3.0
            }) {
                matched += 1;
            }
        }
        assert!(
            matched * 2 >= base.len(),
            "only {matched}/{} orientations found rotated partners",
            base.len()
        );
    }

    #[test]
    fn radially_symmetric_blob_emits_per_tie_rule() {
        let cfg = SiftConfig::default();
        let n = 64usize;
        let mut data = vec![0.0f32; n * n];
        for y in 0..n {
            for x in 0..n {
                let d = ((x as f32 - 32.0).powi(2) + (y as f32 - 32.0).powi(2)) / 18.0;
                data[y * n + x] = 0.9 * (-d).exp();
            }
        }
        let img = GrayImage::new(n, n, data).unwrap();
        let space = build_scale_space(&img, &cfg).unwrap();
        let refined: Vec<Keypoint> = detect_extrema(&space, &cfg)
            .iter()
            .filter_map(|c| refine_keypoint(c, &space, &cfg))
            .collect();
        assert!(!refined.is_empty());
        for kp in &refined {
            let oriented = assign_orientation(kp, &space);
            // near-perfect radial symmetry: every surviving peak must clear
            // 80% of the max, and peaks must be strict local maxima, so the
            // emitted count can be anything from 0 (plateau, no strict max)
            // to a handful; all must be distinct bins
            let mut seen = std::collections::BTreeSet::new();
            for o in &oriented {
                assert!(seen.insert((o.orientation * 10.0) as i64), "duplicate orientation");
            }
        }
    }
}
