//! DoG extremum detection and subpixel refinement.

use nalgebra::{Matrix3, Vector3};

use super::{GrayImage, Keypoint, ScaleSpace, SiftConfig};

/// Pixels this close to an image border are never candidates.
const IMAGE_BORDER: usize = 5;
/// Maximum quadratic-fit relocations before a candidate is dropped.
const MAX_INTERP_STEPS: usize = 5;

/// An unrefined scale-space extremum.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RawCandidate {
    pub octave: usize,
    /// DoG layer index, `1..=scales_per_octave`.
    pub layer: usize,
    pub x: usize,
    pub y: usize,
}

/// Scan all DoG levels for strict 26-neighborhood extrema above the
/// preliminary contrast threshold `0.5 * contrast_threshold / scales`.
pub fn detect_extrema(space: &ScaleSpace, cfg: &SiftConfig) -> Vec<RawCandidate> {
    let prelim = 0.5 * cfg.contrast_threshold / cfg.scales_per_octave as f32;
    let mut out = Vec::new();
    for (octave_index, octave) in space.octaves.iter().enumerate() {
        for layer in 1..=space.scales_per_octave {
            let below = &octave.dogs[layer - 1];
            let level = &octave.dogs[layer];
            let above = &octave.dogs[layer + 1];
            let (w, h) = (level.width(), level.height());
            if w <= 2 * IMAGE_BORDER || h <= 2 * IMAGE_BORDER {
                continue;
            }
            for y in IMAGE_BORDER..h - IMAGE_BORDER {
                for x in IMAGE_BORDER..w - IMAGE_BORDER {
                    let v = level.get(x, y);
                    if v.abs() <= prelim {
                        continue;
                    }
                    if is_strict_extremum(v, below, level, above, x, y) {
                        out.push(RawCandidate {
                            octave: octave_index,
                            layer,
                            x,
                            y,
                        });
                    }
                }
            }
        }
    }
    out
}

fn is_strict_extremum(
    v: f32,
    below: &GrayImage,
    level: &GrayImage,
    above: &GrayImage,
    x: usize,
    y: usize,
) -> bool {
    let mut is_max = true;
    let mut is_min = true;
    for img in [below, level, above] {
        for dy in -1..=1i64 {
            for dx in -1..=1i64 {
                if std::ptr::eq(img, level) && dx == 0 && dy == 0 {
                    continue;
                }
                let n = img.get((x as i64 + dx) as usize, (y as i64 + dy) as usize);
                if v <= n {
                    is_max = false;
                }
                if v >= n {
                    is_min = false;
                }
                if !is_max && !is_min {
                    return false;
                }
            }
        }
    }
    is_max || is_min
}

/// Quadratic subpixel refinement with contrast and edge rejection.
///
/// Up to [`MAX_INTERP_STEPS`] relocations of the fit; rejects candidates
/// whose interpolated contrast is below `contrast_threshold / scales` or
/// whose principal-curvature ratio exceeds `edge_threshold`.
pub fn refine_keypoint(
    candidate: &RawCandidate,
    space: &ScaleSpace,
    cfg: &SiftConfig,
) -> Option<Keypoint> {
    let octave = &space.octaves[candidate.octave];
    let dogs = &octave.dogs;
    let s = space.scales_per_octave;
    let (w, h) = (dogs[0].width(), dogs[0].height());

    let mut layer = candidate.layer;
    let mut x = candidate.x;
    let mut y = candidate.y;
    let mut offset = Vector3::zeros();
    let mut converged = false;
    for _ in 0..MAX_INTERP_STEPS {
        let (gradient, hessian) = local_quadratic(dogs, layer, x, y);
        offset = hessian.lu().solve(&(-gradient))?;
        if offset.x.abs() < 0.5 && offset.y.abs() < 0.5 && offset.z.abs() < 0.5 {
            converged = true;
            break;
        }
        x = (x as f64 + offset.x.round()) as usize;
        y = (y as f64 + offset.y.round()) as usize;
        layer = (layer as f64 + offset.z.round()) as usize;
        if !(1..=s).contains(&layer)
            || !(IMAGE_BORDER..w - IMAGE_BORDER).contains(&x)
            || !(IMAGE_BORDER..h - IMAGE_BORDER).contains(&y)
        {
            return None;
        }
    }
    if !converged {
        return None;
    }

    let (gradient, _) = local_quadratic(dogs, layer, x, y);
    let value = dogs[layer].get(x, y) as f64;
    let contrast = value + 0.5 * gradient.dot(&offset);
    if contrast.abs() * (s as f64) < cfg.contrast_threshold as f64 {
        return None;
    }

    // edge rejection on the 2x2 spatial Hessian
    let d = &dogs[layer];
    let dxx = (d.get(x + 1, y) + d.get(x - 1, y) - 2.0 * d.get(x, y)) as f64;
    let dyy = (d.get(x, y + 1) + d.get(x, y - 1) - 2.0 * d.get(x, y)) as f64;
    let dxy = 0.25
        * (d.get(x + 1, y + 1) as f64 - d.get(x - 1, y + 1) as f64 - d.get(x + 1, y - 1) as f64
            + d.get(x - 1, y - 1) as f64);
    let trace = dxx + dyy;
    let det = dxx * dyy - dxy * dxy;
    let r = cfg.edge_threshold as f64;
    if det <= 0.0 || trace * trace * r >= (r + 1.0) * (r + 1.0) * det {
        return None;
    }

    let octave_scale = (1u32 << candidate.octave) as f32;
    let refined_layer = layer as f32 + offset.z as f32;
    Some(Keypoint {
        x: (x as f32 + offset.x as f32) * octave_scale,
        y: (y as f32 + offset.y as f32) * octave_scale,
        scale: space.absolute_sigma(candidate.octave, refined_layer),
        orientation: 0.0,
        octave: candidate.octave,
        layer,
        response: contrast.abs() as f32,
    })
}

/// Gradient and Hessian of the DoG stack at `(layer, x, y)` by central
/// differences, ordered `(x, y, layer)`.
fn local_quadratic(
    dogs: &[GrayImage],
    layer: usize,
    x: usize,
    y: usize,
) -> (Vector3<f64>, Matrix3<f64>) {
    let get = |l: usize, x: usize, y: usize| dogs[l].get(x, y) as f64;
    let v = get(layer, x, y);

    let dx = 0.5 * (get(layer, x + 1, y) - get(layer, x - 1, y));
    let dy = 0.5 * (get(layer, x, y + 1) - get(layer, x, y - 1));
    let ds = 0.5 * (get(layer + 1, x, y) - get(layer - 1, x, y));

    let dxx = get(layer, x + 1, y) + get(layer, x - 1, y) - 2.0 * v;
    let dyy = get(layer, x, y + 1) + get(layer, x, y - 1) - 2.0 * v;
    let dss = get(layer + 1, x, y) + get(layer - 1, x, y) - 2.0 * v;
    let dxy = 0.25
        * (get(layer, x + 1, y + 1) - get(layer, x - 1, y + 1) - get(layer, x + 1, y - 1)
            + get(layer, x - 1, y - 1));
    let dxs = 0.25
        * (get(layer + 1, x + 1, y) - get(layer + 1, x - 1, y) - get(layer - 1, x + 1, y)
            + get(layer - 1, x - 1, y));
    let dys = 0.25
        * (get(layer + 1, x, y + 1) - get(layer + 1, x, y - 1) - get(layer - 1, x, y + 1)
            + get(layer - 1, x, y - 1));

    (
        Vector3::new(dx, dy, ds),
        Matrix3::new(dxx, dxy, dxs, dxy, dyy, dys, dxs, dys, dss),
    )
}
