//! 4x4x8 gradient-histogram descriptor.

use super::{normalize_descriptor, Descriptor, Keypoint, ScaleSpace, SiftConfig, DESCRIPTOR_LEN};

/// Histogram cell width as a multiple of the keypoint scale.
const DESCRIPTOR_SCALE_FACTOR: f32 = 3.0;

/// Compute the descriptor of an oriented keypoint.
///
/// Gradients inside a rotated window around the keypoint are binned into a
/// `grid x grid` spatial layout with `bins` orientation bins per cell using
/// trilinear interpolation; angles are measured relative to the keypoint
/// orientation. The vector is normalized, clamped at 0.2 and renormalized.
pub fn compute_descriptor(kp: &Keypoint, space: &ScaleSpace, cfg: &SiftConfig) -> Descriptor {
    let d = cfg.descriptor_grid;
    let n = cfg.descriptor_bins;
    let octave = &space.octaves[kp.octave];
    let image = &octave.gaussians[kp.layer.min(octave.gaussians.len() - 1)];
    let octave_scale = (1u32 << kp.octave) as f32;
    let x = kp.x / octave_scale;
    let y = kp.y / octave_scale;
    let sigma_octave = kp.scale / octave_scale;

    let hist_width = DESCRIPTOR_SCALE_FACTOR * sigma_octave;
    let radius = (hist_width * std::f32::consts::SQRT_2 * (d as f32 + 1.0) * 0.5).round() as i64;
    let (w, h) = (image.width() as i64, image.height() as i64);
    // cap the window at the image diagonal
    let radius = radius.min(((w * w + h * h) as f64).sqrt() as i64);

    let angle = -kp.orientation.to_radians();
    let (cos_t, sin_t) = (angle.cos(), angle.sin());
    let bins_per_rad = n as f32 / std::f32::consts::TAU;
    let exp_scale = -2.0 / (d as f32 * d as f32);

    let cx = x.round() as i64;
    let cy = y.round() as i64;
    // (d+2)^2 cells x (n+2) bins scratch space simplifies wraparound
    let mut hist = vec![0.0f32; (d + 2) * (d + 2) * (n + 2)];

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
            // rotate the offset into the keypoint frame, in cell units
            let fx = px as f32 - x;
            let fy = py as f32 - y;
            let rot_x = (cos_t * fx - sin_t * fy) / hist_width;
            let rot_y = (sin_t * fx + cos_t * fy) / hist_width;
            let rbin = rot_y + d as f32 / 2.0 - 0.5;
            let cbin = rot_x + d as f32 / 2.0 - 0.5;
            if !(-1.0 < rbin && rbin < d as f32 && -1.0 < cbin && cbin < d as f32) {
                continue;
            }
            let (px, py) = (px as usize, py as usize);
            let gx = 0.5 * (image.get(px + 1, py) - image.get(px - 1, py));
            let gy = 0.5 * (image.get(px, py + 1) - image.get(px, py - 1));
            let magnitude = (gx * gx + gy * gy).sqrt();
            if magnitude == 0.0 {
                continue;
            }
            let weight = ((rot_x * rot_x + rot_y * rot_y) * exp_scale).exp() * magnitude;
            let theta = gy.atan2(gx) - kp.orientation.to_radians();
            let obin = theta.rem_euclid(std::f32::consts::TAU) * bins_per_rad;

            trilinear_accumulate(&mut hist, d, n, rbin, cbin, obin, weight);
        }
    }

    // fold the wrapped orientation bins and flatten the interior cells
    let mut values = [0.0f32; DESCRIPTOR_LEN];
    for row in 0..d {
        for col in 0..d {
            let cell = ((row + 1) * (d + 2) + (col + 1)) * (n + 2);
            // bin n wraps to 0, bin n+1 wraps to 1
            let mut cell_bins = vec![0.0f32; n];
            for b in 0..n + 2 {
                cell_bins[b % n] += hist[cell + b];
            }
            for (b, &v) in cell_bins.iter().enumerate() {
                values[(row * d + col) * n + b] = v;
            }
        }
    }
    normalize_descriptor(&mut values);
    Descriptor::from_raw_values(values)
}

/// Distribute `weight` over the 8 neighbors of a fractional (row, col,
/// orientation) histogram coordinate.
fn trilinear_accumulate(
    hist: &mut [f32],
    d: usize,
    n: usize,
    rbin: f32,
    cbin: f32,
    obin: f32,
    weight: f32,
) {
    let r0 = rbin.floor();
    let c0 = cbin.floor();
    let o0 = obin.floor();
    let dr = rbin - r0;
    let dc = cbin - c0;
    let dob = obin - o0;
    // shift into the padded grid: interior rows/cols start at 1
    let r0 = r0 as i64 + 1;
    let c0 = c0 as i64 + 1;
    let o0 = o0 as i64;
    let stride_row = ((d + 2) * (n + 2)) as i64;
    let stride_col = (n + 2) as i64;
    for (ri, rw) in [(r0, 1.0 - dr), (r0 + 1, dr)] {
        if ri < 0 || ri as usize >= d + 2 {
            continue;
        }
        for (ci, cw) in [(c0, 1.0 - dc), (c0 + 1, dc)] {
            if ci < 0 || ci as usize >= d + 2 {
                continue;
            }
            for (oi, ow) in [(o0, 1.0 - dob), (o0 + 1, dob)] {
                let oi = oi.rem_euclid(n as i64 + 2).min(n as i64 + 1);
                let index = ri * stride_row + ci * stride_col + oi;
                hist[index as usize] += weight * rw * cw * ow;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::GrayImage;

    fn textured_image(n: usize, seed: u64) -> GrayImage {
        // smooth random blob field: deterministic, gradient-rich
        let mut state = seed;
        let mut rand = move || {
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            ((state >> 33) as f64 / (1u64 << 31) as f64) as f32
        };
        let blobs: Vec<(f32, f32, f32, f32)> = (0..14)
            .map(|_| {
                (
                    rand() * n as f32,
                    rand() * n as f32,
                    2.0 + rand() * 6.0,
                    0.6 * rand() - 0.3,
                )
            })
            .collect();
        let mut data = vec![0.5f32; n * n];
        for y in 0..n {
            for x in 0..n {
                let mut v = 0.5;
                for &(bx, by, bs, ba) in &blobs {
                    let d2 = (x as f32 - bx).powi(2) + (y as f32 - by).powi(2);
                    v += ba * (-d2 / (2.0 * bs * bs)).exp();
                }
                data[y * n + x] = v.clamp(0.0, 1.0);
            }
        }
        GrayImage::new(n, n, data).unwrap()
    }

    fn extract_with_keypoints(img: &GrayImage) -> Vec<(Keypoint, Descriptor)> {
        crate::features::extract_sift(img, &SiftConfig::default()).unwrap()
    }

    #[test]
    fn descriptors_have_unit_norm_and_dimension() {
        let img = textured_image(96, 4);
        let descriptors = extract_with_keypoints(&img);
        assert!(!descriptors.is_empty());
        for (_, d) in &descriptors {
            assert_eq!(d.values().len(), DESCRIPTOR_LEN);
            assert!((d.l2_norm() - 1.0).abs() < 1e-4);
            assert!(d.values().iter().all(|&v| v >= 0.0));
        }
    }

    #[test]
    fn rotated_patch_descriptor_stays_close() {
        let n = 96usize;
        let img = textured_image(n, 9);
        // exact 90-degree rotation (x, y) -> (y, n-1-x)
        let mut rotated = vec![0.0f32; n * n];
        for y in 0..n {
            for x in 0..n {
                rotated[(n - 1 - x) * n + y] = img.data()[y * n + x];
            }
        }
        let rot = GrayImage::new(n, n, rotated).unwrap();

        let base = extract_with_keypoints(&img);
        let rotated = extract_with_keypoints(&rot);
        assert!(!base.is_empty() && !rotated.is_empty());

        // pair keypoints through the known geometric map; a keypoint can
        // carry several orientation peaks, so compare against the best
        // descriptor among spatially co-located candidates
        let mut paired = 0usize;
        let mut close = 0usize;
        for (kp, desc) in &base {
            let tx = kp.y;
            let ty = (n - 1) as f32 - kp.x;
            let best = rotated
                .iter()
                .filter(|(rkp, _)| {
                    (rkp.x - tx).abs() < 1.5
                        && (rkp.y - ty).abs() < 1.5
                        && (rkp.scale - kp.scale).abs() < 0.5 * kp.scale
                })
                .map(|(_, rdesc)| desc.euclidean_distance(rdesc))
                .min_by(f32::total_cmp);
            let Some(distance) = best else { continue };
            paired += 1;
            if distance < 0.35 {
                close += 1;
            }
        }
        assert!(paired >= 4, "too few geometric pairs: {paired}");
        assert!(
            close * 10 >= paired * 8,
            "only {close}/{paired} rotated descriptors within 0.35"
        );
    }

    #[test]
    fn unrelated_patches_are_farther_than_matched_pairs() {
        let img_a = textured_image(96, 21);
        let img_b = textured_image(96, 22);
        let a = extract_with_keypoints(&img_a);
        let b = extract_with_keypoints(&img_b);
        assert!(a.len() >= 3 && b.len() >= 3);

        // matched pair distance proxy: same image re-extracted is identical,
        // so compare against a mildly noisy copy instead
        let noisy: Vec<f32> = img_a
            .data()
            .iter()
            .enumerate()
            .map(|(i, &v)| {
                let jitter = ((i * 2654435761) % 1000) as f32 / 1000.0 - 0.5;
                (v + 0.02 * jitter).clamp(0.0, 1.0)
            })
            .collect();
        let noisy = GrayImage::new(96, 96, noisy).unwrap();
        let a_noisy = extract_with_keypoints(&noisy);

        let mut matched_distances = Vec::new();
        for (kp, desc) in &a {
            if let Some((_, nd)) = a_noisy
                .iter()
                .filter(|(nkp, _)| (nkp.x - kp.x).abs() < 1.0 && (nkp.y - kp.y).abs() < 1.0)
                .min_by(|(x, _), (y, _)| {
                    let dx = (x.x - kp.x).hypot(x.y - kp.y);
                    let dy = (y.x - kp.x).hypot(y.y - kp.y);
                    dx.total_cmp(&dy)
                })
            {
                matched_distances.push(desc.euclidean_distance(nd));
            }
        }
        assert!(!matched_distances.is_empty());
        let matched_mean: f32 =
            matched_distances.iter().sum::<f32>() / matched_distances.len() as f32;

        // unrelated cross-image distances
        let mut separated = 0usize;
        let mut trials = 0usize;
        for (_, da) in a.iter().take(20) {
            for (_, db) in b.iter().take(20) {
                trials += 1;
                if da.euclidean_distance(db) > matched_mean {
                    separated += 1;
                }
            }
        }
        assert!(
            separated * 100 >= trials * 95,
            "only {separated}/{trials} unrelated pairs exceed matched mean {matched_mean}"
        );
    }
}
