//! SIFT keypoint detection and 128-d descriptor extraction.
//!
//! The pipeline is the classic one: a Gaussian scale-space pyramid with
//! difference-of-Gaussians levels, 26-neighborhood extremum detection,
//! quadratic subpixel refinement with contrast and edge rejection, gradient
//! orientation assignment, and a 4x4x8 trilinearly interpolated descriptor
//! that is normalized, clamped at 0.2 and renormalized.

mod descriptor;
mod detect;
mod orientation;
mod scale_space;

pub use descriptor::compute_descriptor;
pub use detect::{detect_extrema, refine_keypoint, RawCandidate};
pub use orientation::assign_orientation;
pub use scale_space::{build_scale_space, ScaleSpace};

use thiserror::Error;

use crate::imgio::GrayImageU8;

pub const DESCRIPTOR_LEN: usize = 128;

#[derive(Debug, Error)]
pub enum SiftError {
    #[error("image {width}x{height} is below the {min} pixel minimum side")]
    ImageTooSmall {
        width: usize,
        height: usize,
        min: usize,
    },
    #[error("invalid image buffer: {0}")]
    BadImage(String),
    #[error("invalid configuration: {0}")]
    BadConfig(String),
}

/// Row-major luminance image with values in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    data: Vec<f32>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, data: Vec<f32>) -> Result<Self, SiftError> {
        if data.len() != width * height {
            return Err(SiftError::BadImage(format!(
                "buffer holds {} values, expected {}x{}",
                data.len(),
                width,
                height
            )));
        }
        if data.iter().any(|v| !(0.0..=1.0).contains(v)) {
            return Err(SiftError::BadImage("luminance outside [0, 1]".into()));
        }
        Ok(Self { width, height, data })
    }

    /// Construct without the range scan, for internal pipeline stages whose
    /// arithmetic can legitimately leave [0, 1] (blur ringing, DoG values).
    pub(crate) fn from_raw(width: usize, height: usize, data: Vec<f32>) -> Self {
        debug_assert_eq!(data.len(), width * height);
        Self { width, height, data }
    }

    pub fn from_luma_u8(img: &GrayImageU8) -> Self {
        let data = img.data.iter().map(|&v| v as f32 / 255.0).collect();
        Self {
            width: img.width,
            height: img.height,
            data,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f32 {
        self.data[y * self.width + x]
    }
}

/// A refined scale-space keypoint.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Keypoint {
    /// Subpixel position in input-image coordinates.
    pub x: f32,
    pub y: f32,
    /// Blur sigma in input pixels.
    pub scale: f32,
    /// Degrees in `[0, 360)`, gradient convention with y pointing down.
    pub orientation: f32,
    pub octave: usize,
    pub layer: usize,
    /// Interpolated DoG contrast magnitude.
    pub response: f32,
}

/// 128-component descriptor: non-negative, unit L2 norm after the
/// clamp-and-renormalize step.
#[derive(Debug, Clone, PartialEq)]
pub struct Descriptor {
    values: [f32; DESCRIPTOR_LEN],
}

impl Descriptor {
    /// Wrap stored components verbatim. Archive loading uses this so float
    /// payloads round-trip losslessly and quantized payloads stay within
    /// quantization distance of the saved vector; the caller vouches that
    /// the source satisfied the invariants.
    pub fn from_raw_values(values: [f32; DESCRIPTOR_LEN]) -> Self {
        Self { values }
    }

    /// Build from arbitrary non-negative components, applying
    /// normalize/clamp/renormalize so the invariants hold.
    pub fn from_components(values: [f32; DESCRIPTOR_LEN]) -> Self {
        let mut values = values;
        normalize_descriptor(&mut values);
        Self { values }
    }

    pub fn values(&self) -> &[f32; DESCRIPTOR_LEN] {
        &self.values
    }

    pub fn euclidean_distance(&self, other: &Descriptor) -> f32 {
        let mut sum = 0.0f32;
        for (a, b) in self.values.iter().zip(&other.values) {
            let d = a - b;
            sum += d * d;
        }
        sum.sqrt()
    }

    pub fn l2_norm(&self) -> f32 {
        self.values.iter().map(|v| v * v).sum::<f32>().sqrt()
    }
}

/// Normalize, clamp each component at 0.2, renormalize.
pub(crate) fn normalize_descriptor(values: &mut [f32; DESCRIPTOR_LEN]) {
    let norm = values.iter().map(|&v| (v as f64) * (v as f64)).sum::<f64>().sqrt();
    let inv = 1.0 / norm.max(1e-12);
    for v in values.iter_mut() {
        *v = ((*v as f64 * inv).min(0.2)) as f32;
    }
    let norm = values.iter().map(|&v| (v as f64) * (v as f64)).sum::<f64>().sqrt();
    let inv = 1.0 / norm.max(1e-12);
    for v in values.iter_mut() {
        *v = (*v as f64 * inv) as f32;
    }
}

/// SIFT parameters; [`SiftConfig::default`] gives the canonical settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SiftConfig {
    /// `None` derives the octave count from the image size.
    pub octaves: Option<usize>,
    pub scales_per_octave: usize,
    /// Base blur of octave 0 level 0, in (possibly upsampled) base pixels.
    pub sigma0: f32,
    pub contrast_threshold: f32,
    /// Principal-curvature ratio bound for edge rejection.
    pub edge_threshold: f32,
    /// Double the image before building the pyramid.
    pub upsample: bool,
    /// Blur assumed already present in the input, in input pixels.
    pub assumed_blur: f32,
    /// Descriptor spatial grid (4 gives the standard 4x4).
    pub descriptor_grid: usize,
    /// Orientation bins per grid cell (8 is standard).
    pub descriptor_bins: usize,
}

impl Default for SiftConfig {
    fn default() -> Self {
        SiftConfig {
            octaves: None,
            scales_per_octave: 3,
            sigma0: 1.6,
            contrast_threshold: 0.04,
            edge_threshold: 10.0,
            upsample: true,
            assumed_blur: 0.5,
            descriptor_grid: 4,
            descriptor_bins: 8,
        }
    }
}

impl SiftConfig {
    pub fn validate(&self) -> Result<(), SiftError> {
        if self.scales_per_octave < 3 {
            return Err(SiftError::BadConfig(
                "scales_per_octave must be at least 3".into(),
            ));
        }
        if !(self.contrast_threshold > 0.0) || !(self.edge_threshold > 0.0) {
            return Err(SiftError::BadConfig("thresholds must be positive".into()));
        }
        if !(self.sigma0 > 0.0) {
            return Err(SiftError::BadConfig("sigma0 must be positive".into()));
        }
        if self.descriptor_grid * self.descriptor_grid * self.descriptor_bins != DESCRIPTOR_LEN {
            return Err(SiftError::BadConfig(format!(
                "descriptor layout {}x{}x{} does not produce {} components",
                self.descriptor_grid, self.descriptor_grid, self.descriptor_bins, DESCRIPTOR_LEN
            )));
        }
        Ok(())
    }
}

pub const MIN_IMAGE_SIDE: usize = 16;

/// Run the full pipeline on one image.
///
/// Deterministic: identical input and configuration produce identical
/// output, keypoints ordered by (octave, layer, y, x, orientation).
pub fn extract_sift(
    img: &GrayImage,
    cfg: &SiftConfig,
) -> Result<Vec<(Keypoint, Descriptor)>, SiftError> {
    cfg.validate()?;
    if img.width().min(img.height()) < MIN_IMAGE_SIDE {
        return Err(SiftError::ImageTooSmall {
            width: img.width(),
            height: img.height(),
            min: MIN_IMAGE_SIDE,
        });
    }
    let space = build_scale_space(img, cfg)?;
    let mut out = Vec::new();
    for candidate in detect_extrema(&space, cfg) {
        let Some(keypoint) = refine_keypoint(&candidate, &space, cfg) else {
            continue;
        };
        for oriented in assign_orientation(&keypoint, &space) {
            let mapped = space.to_input_coords(&oriented);
            if mapped.x < 0.0
                || mapped.y < 0.0
                || mapped.x >= img.width() as f32
                || mapped.y >= img.height() as f32
            {
                continue;
            }
            let descriptor = compute_descriptor(&oriented, &space, cfg);
            out.push((mapped, descriptor));
        }
    }
    out.sort_by(|(a, _), (b, _)| {
        (a.octave, a.layer, a.y.to_bits(), a.x.to_bits(), a.orientation.to_bits()).cmp(&(
            b.octave,
            b.layer,
            b.y.to_bits(),
            b.x.to_bits(),
            b.orientation.to_bits(),
        ))
    });
    // adjacent raw extrema can converge to one refined point
    out.dedup_by(|(a, _), (b, _)| {
        a.x == b.x && a.y == b.y && a.scale == b.scale && a.orientation == b.orientation
    });
    Ok(out)
}
