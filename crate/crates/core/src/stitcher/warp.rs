//! Inverse-mapped warping, feathered blending, and overlap estimation.

use nalgebra::Point2;

use super::homography::{Correspondence, Homography};
use super::{pairwise_correspondences, ransac_homography, StitchConfig, StitchError};
use crate::features::GrayImage;
use crate::imgio::RgbImage;

/// RGB image with f32 channels in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ColorImage {
    width: usize,
    height: usize,
    data: Vec<[f32; 3]>,
}

impl ColorImage {
    pub fn new(width: usize, height: usize, data: Vec<[f32; 3]>) -> Self {
        assert_eq!(data.len(), width * height);
        Self { width, height, data }
    }

    pub fn from_rgb8(img: &RgbImage) -> Self {
        let data = img
            .data
            .chunks_exact(3)
            .map(|px| [px[0] as f32 / 255.0, px[1] as f32 / 255.0, px[2] as f32 / 255.0])
            .collect();
        Self {
            width: img.width,
            height: img.height,
            data,
        }
    }

    pub fn to_rgb8(&self) -> RgbImage {
        let mut data = Vec::with_capacity(self.data.len() * 3);
        for px in &self.data {
            for c in px {
                data.push((c * 255.0).round().clamp(0.0, 255.0) as u8);
            }
        }
        RgbImage::new(self.width, self.height, data).expect("consistent buffer")
    }

    pub fn to_gray(&self) -> GrayImage {
        let data: Vec<f32> = self
            .data
            .iter()
            .map(|px| (0.299 * px[0] + 0.587 * px[1] + 0.114 * px[2]).clamp(0.0, 1.0))
            .collect();
        GrayImage::new(self.width, self.height, data).expect("luma stays in range")
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn pixel(&self, x: usize, y: usize) -> [f32; 3] {
        self.data[y * self.width + x]
    }

    /// Corner coordinates in pixel-center convention.
    pub fn corners(&self) -> [(f64, f64); 4] {
        let w = self.width as f64 - 1.0;
        let h = self.height as f64 - 1.0;
        [(0.0, 0.0), (w, 0.0), (w, h), (0.0, h)]
    }

    fn bilinear(&self, x: f64, y: f64) -> Option<[f32; 3]> {
        if x < 0.0 || y < 0.0 || x > (self.width - 1) as f64 || y > (self.height - 1) as f64 {
            return None;
        }
        let x0 = x.floor() as usize;
        let y0 = y.floor() as usize;
        let x1 = (x0 + 1).min(self.width - 1);
        let y1 = (y0 + 1).min(self.height - 1);
        let fx = (x - x0 as f64) as f32;
        let fy = (y - y0 as f64) as f32;
        let mut out = [0.0f32; 3];
        for c in 0..3 {
            let top = self.pixel(x0, y0)[c] * (1.0 - fx) + self.pixel(x1, y0)[c] * fx;
            let bottom = self.pixel(x0, y1)[c] * (1.0 - fx) + self.pixel(x1, y1)[c] * fx;
            out[c] = top * (1.0 - fy) + bottom * fy;
        }
        Some(out)
    }
}

/// Panorama pixels plus the coverage mask distinguishing warp voids from
/// true black content.
#[derive(Debug, Clone, PartialEq)]
pub struct MaskedImage {
    pub image: ColorImage,
    /// One flag per pixel; false marks undefined (void) pixels.
    pub defined: Vec<bool>,
}

/// Accumulation canvas in panorama coordinates.
///
/// Canvas pixel `(x, y)` sits at world coordinate `(x + offset.0,
/// y + offset.1)` of the reference frame.
#[derive(Debug)]
pub struct Canvas {
    width: usize,
    height: usize,
    offset: (f64, f64),
    accum: Vec<[f64; 3]>,
    weight: Vec<f64>,
}

impl Canvas {
    pub fn new(width: usize, height: usize, offset: (f64, f64)) -> Self {
        Canvas {
            width,
            height,
            offset,
            accum: vec![[0.0; 3]; width * height],
            weight: vec![0.0; width * height],
        }
    }

    pub fn resolve(&self) -> MaskedImage {
        let mut data = Vec::with_capacity(self.accum.len());
        let mut defined = Vec::with_capacity(self.accum.len());
        for (acc, &w) in self.accum.iter().zip(&self.weight) {
            if w > 0.0 {
                data.push([
                    (acc[0] / w) as f32,
                    (acc[1] / w) as f32,
                    (acc[2] / w) as f32,
                ]);
                defined.push(true);
            } else {
                data.push([0.0; 3]);
                defined.push(false);
            }
        }
        MaskedImage {
            image: ColorImage::new(self.width, self.height, data),
            defined,
        }
    }
}

/// Warp `img` onto the canvas through `h` (image to reference coordinates).
///
/// Inverse-mapped bilinear sampling; blending weights feather linearly from
/// the image border. Before blending, per-channel gains match the incoming
/// mean to the canvas mean over the overlap region.
pub fn warp_and_blend(canvas: &mut Canvas, img: &ColorImage, h: &Homography) {
    let Ok(inverse) = h.inverse() else { return };

    // pass 1: overlap statistics for gain normalization
    let mut canvas_sum = [0.0f64; 3];
    let mut incoming_sum = [0.0f64; 3];
    let mut overlap_count = 0usize;
    for y in 0..canvas.height {
        for x in 0..canvas.width {
            let index = y * canvas.width + x;
            if canvas.weight[index] <= 0.0 {
                continue;
            }
            let (sx, sy) = inverse.apply(x as f64 + canvas.offset.0, y as f64 + canvas.offset.1);
            let Some(sample) = img.bilinear(sx, sy) else {
                continue;
            };
            let existing = &canvas.accum[index];
            let w = canvas.weight[index];
            for c in 0..3 {
                canvas_sum[c] += existing[c] / w;
                incoming_sum[c] += sample[c] as f64;
            }
            overlap_count += 1;
        }
    }
    let mut gain = [1.0f64; 3];
    if overlap_count >= 16 {
        for c in 0..3 {
            if incoming_sum[c] > 1e-9 {
                gain[c] = (canvas_sum[c] / incoming_sum[c]).clamp(0.5, 2.0);
            }
        }
    }

    // pass 2: accumulate with feather weights
    let (w_img, h_img) = (img.width as f64, img.height as f64);
    for y in 0..canvas.height {
        for x in 0..canvas.width {
            let (sx, sy) = inverse.apply(x as f64 + canvas.offset.0, y as f64 + canvas.offset.1);
            let Some(sample) = img.bilinear(sx, sy) else {
                continue;
            };
            // distance to the nearest border, in pixels, plus a floor so
            // border pixels still contribute
            let feather = (sx + 1.0)
                .min(w_img - sx)
                .min(sy + 1.0)
                .min(h_img - sy)
                .max(0.05);
            let index = y * canvas.width + x;
            for c in 0..3 {
                canvas.accum[index][c] += feather * gain[c] * sample[c] as f64;
            }
            canvas.weight[index] += feather;
        }
    }
}

/// Overlap between two images, estimated through their pairwise homography.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OverlapReport {
    /// Fraction of image B's area covered by warped image A.
    pub fraction: f64,
    /// Set when the fraction falls below the configured minimum.
    pub low: bool,
}

/// Estimate how much of `img_b` is covered by `img_a` warped through the
/// homography fitted from their SIFT correspondences.
pub fn check_overlap(
    img_a: &ColorImage,
    img_b: &ColorImage,
    cfg: &StitchConfig,
) -> Result<OverlapReport, StitchError> {
    let features_a = super::frame_features(img_a, &cfg.sift)?;
    let features_b = super::frame_features(img_b, &cfg.sift)?;
    let correspondences: Vec<Correspondence> = pairwise_correspondences(
        (&features_a.0, &features_a.1),
        (&features_b.0, &features_b.1),
    )?;
    let (h, _) = ransac_homography(
        &correspondences,
        cfg.ransac_iterations,
        cfg.inlier_threshold_px,
        cfg.seed,
    )?;
    let fraction = quad_overlap_fraction(&h, img_a.width(), img_a.height(), img_b.width(), img_b.height());
    Ok(OverlapReport {
        fraction,
        low: fraction < cfg.min_overlap,
    })
}

/// Area fraction of the `(wb, hb)` rectangle covered by the `(wa, ha)`
/// rectangle warped through `h`.
pub(crate) fn quad_overlap_fraction(
    h: &Homography,
    wa: usize,
    ha: usize,
    wb: usize,
    hb: usize,
) -> f64 {
    let quad: Vec<Point2<f64>> = [
        (0.0, 0.0),
        (wa as f64 - 1.0, 0.0),
        (wa as f64 - 1.0, ha as f64 - 1.0),
        (0.0, ha as f64 - 1.0),
    ]
    .iter()
    .map(|&(x, y)| {
        let (u, v) = h.apply(x, y);
        Point2::new(u, v)
    })
    .collect();
    let clipped = clip_to_rect(&quad, wb as f64 - 1.0, hb as f64 - 1.0);
    let area_b = (wb as f64 - 1.0) * (hb as f64 - 1.0);
    (polygon_area(&clipped) / area_b).clamp(0.0, 1.0)
}

/// Sutherland-Hodgman clip of a convex polygon against `[0,w] x [0,h]`.
fn clip_to_rect(polygon: &[Point2<f64>], w: f64, h: f64) -> Vec<Point2<f64>> {
    // inside tests for the four half-planes
    let planes: [Box<dyn Fn(&Point2<f64>) -> f64>; 4] = [
        Box::new(move |p| p.x),
        Box::new(move |p| w - p.x),
        Box::new(move |p| p.y),
        Box::new(move |p| h - p.y),
    ];
    let mut current: Vec<Point2<f64>> = polygon.to_vec();
    for plane in &planes {
        if current.is_empty() {
            break;
        }
        let mut next = Vec::with_capacity(current.len() + 2);
        for i in 0..current.len() {
            let a = current[i];
            let b = current[(i + 1) % current.len()];
            let da = plane(&a);
            let db = plane(&b);
            if da >= 0.0 {
                next.push(a);
            }
            if (da >= 0.0) != (db >= 0.0) {
                let t = da / (da - db);
                next.push(Point2::new(a.x + t * (b.x - a.x), a.y + t * (b.y - a.y)));
            }
        }
        current = next;
    }
    current
}

fn polygon_area(polygon: &[Point2<f64>]) -> f64 {
    if polygon.len() < 3 {
        return 0.0;
    }
    let mut sum = 0.0;
    for i in 0..polygon.len() {
        let a = polygon[i];
        let b = polygon[(i + 1) % polygon.len()];
        sum += a.x * b.y - b.x * a.y;
    }
    sum.abs() / 2.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::Matrix3;

    fn gradient_image(w: usize, h: usize) -> ColorImage {
        let mut data = Vec::with_capacity(w * h);
        for y in 0..h {
            for x in 0..w {
                data.push([
                    x as f32 / w as f32,
                    y as f32 / h as f32,
                    ((x + y) % 17) as f32 / 17.0,
                ]);
            }
        }
        ColorImage::new(w, h, data)
    }

    fn constant_image(w: usize, h: usize, v: f32) -> ColorImage {
        ColorImage::new(w, h, vec![[v; 3]; w * h])
    }

    #[test]
    fn identity_warp_reproduces_source() {
        let img = gradient_image(40, 30);
        let mut canvas = Canvas::new(40, 30, (0.0, 0.0));
        warp_and_blend(&mut canvas, &img, &Homography::identity());
        let out = canvas.resolve();
        for y in 0..30 {
            for x in 0..40 {
                assert!(out.defined[y * 40 + x]);
                let a = out.image.pixel(x, y);
                let b = img.pixel(x, y);
                for c in 0..3 {
                    assert!((a[c] - b[c]).abs() < 1e-5, "mismatch at {x},{y}");
                }
            }
        }
    }

    #[test]
    fn translated_constant_image_stays_constant() {
        let img = constant_image(30, 30, 0.6);
        let shift = Homography::new(Matrix3::new(
            1.0, 0.0, 12.0, //
            0.0, 1.0, 5.0, //
            0.0, 0.0, 1.0,
        ))
        .unwrap();
        let mut canvas = Canvas::new(60, 45, (0.0, 0.0));
        warp_and_blend(&mut canvas, &img, &Homography::identity());
        warp_and_blend(&mut canvas, &img, &shift);
        let out = canvas.resolve();
        for (pixel, &defined) in out.image.data.iter().zip(&out.defined) {
            if defined {
                for c in 0..3 {
                    assert!((pixel[c] - 0.6).abs() < 1e-4);
                }
            }
        }
    }

    #[test]
    fn warp_round_trip_stays_within_bilinear_tolerance() {
        let img = gradient_image(48, 48);
        let h = Homography::new(Matrix3::new(
            0.98, 0.04, 3.0, //
            -0.03, 1.01, -2.0, //
            1.0e-5, -2.0e-5, 1.0,
        ))
        .unwrap();

        // warp forward onto a generous canvas
        let mut canvas = Canvas::new(80, 80, (-10.0, -10.0));
        warp_and_blend(&mut canvas, &img, &h);
        let warped = canvas.resolve();

        // warp back with the inverse
        let mut back_canvas = Canvas::new(48, 48, (0.0, 0.0));
        let back_h = h.inverse().unwrap().compose(&Homography::new(Matrix3::new(
            1.0, 0.0, -10.0,
            0.0, 1.0, -10.0,
            0.0, 0.0, 1.0,
        )).unwrap());
        warp_and_blend(&mut back_canvas, &warped.image, &back_h);
        let round = back_canvas.resolve();

        // compare interior pixels only
        let mut max_err = 0.0f32;
        for y in 6..42 {
            for x in 6..42 {
                if !round.defined[y * 48 + x] {
                    continue;
                }
                let a = round.image.pixel(x, y);
                let b = img.pixel(x, y);
                for c in 0..2 {
                    // blue channel is high-frequency by construction; check
                    // the smooth channels against the bilinear bound
                    max_err = max_err.max((a[c] - b[c]).abs());
                }
            }
        }
        assert!(
            max_err <= 2.0 / 255.0,
            "round-trip error {max_err} above bilinear tolerance"
        );
    }

    #[test]
    fn overlap_fraction_of_pure_shift_matches_geometry() {
        // identical-size images, horizontal shift of 40%: overlap 60%
        let w = 100usize;
        let shift = Homography::new(Matrix3::new(
            1.0, 0.0, 0.4 * (w as f64 - 1.0), //
            0.0, 1.0, 0.0, //
            0.0, 0.0, 1.0,
        ))
        .unwrap();
        let fraction = quad_overlap_fraction(&shift, w, 80, w, 80);
        assert!((fraction - 0.6).abs() < 0.05, "overlap {fraction}");
        let identity = quad_overlap_fraction(&Homography::identity(), w, 80, w, 80);
        assert!((identity - 1.0).abs() < 0.02);
    }

    #[test]
    fn polygon_clipping_basics() {
        let square: Vec<Point2<f64>> = vec![
            Point2::new(-5.0, -5.0),
            Point2::new(5.0, -5.0),
            Point2::new(5.0, 5.0),
            Point2::new(-5.0, 5.0),
        ];
        let clipped = clip_to_rect(&square, 10.0, 10.0);
        assert!((polygon_area(&clipped) - 25.0).abs() < 1e-9);
        let outside: Vec<Point2<f64>> = vec![
            Point2::new(-20.0, -20.0),
            Point2::new(-10.5, -20.0),
            Point2::new(-10.5, -10.5),
            Point2::new(-20.0, -10.5),
        ];
        assert_eq!(polygon_area(&clip_to_rect(&outside, 10.0, 10.0)), 0.0);
    }
}
