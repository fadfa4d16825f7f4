//! Gaussian and difference-of-Gaussians pyramids.

use super::{GrayImage, Keypoint, SiftConfig, SiftError, MIN_IMAGE_SIDE};

/// One octave: `scales_per_octave + 3` Gaussian levels and their adjacent
/// differences.
pub struct Octave {
    pub gaussians: Vec<GrayImage>,
    pub dogs: Vec<GrayImage>,
}

/// The full pyramid plus the geometry needed to map between pyramid and
/// input coordinates.
pub struct ScaleSpace {
    pub octaves: Vec<Octave>,
    pub scales_per_octave: usize,
    /// Base blur at octave 0 level 0, in base pixels.
    pub sigma0: f32,
    /// 2 when the base image is the doubled input, else 1.
    pub upsample_factor: usize,
}

impl ScaleSpace {
    /// Blur sigma of a (possibly fractional) layer, in octave pixels.
    pub fn sigma_at(&self, layer: f32) -> f32 {
        self.sigma0 * (2.0f32).powf(layer / self.scales_per_octave as f32)
    }

    /// Blur sigma in base-image pixels.
    pub fn absolute_sigma(&self, octave: usize, layer: f32) -> f32 {
        self.sigma_at(layer) * (1 << octave) as f32
    }

    /// Convert a keypoint from base-image to input-image coordinates.
    pub fn to_input_coords(&self, kp: &Keypoint) -> Keypoint {
        let f = self.upsample_factor as f32;
        Keypoint {
            x: kp.x / f,
            y: kp.y / f,
            scale: kp.scale / f,
            ..*kp
        }
    }
}

/// Build the scale space.
///
/// Each octave holds `scales_per_octave + 3` Gaussian levels in geometric
/// sigma progression; DoG levels are adjacent differences; octave `o` is
/// downsampled by `2^o` from the base. The base image is the input doubled
/// (bilinear) when `cfg.upsample` is set, pre-blurred from the assumed input
/// blur up to `sigma0`.
pub fn build_scale_space(img: &GrayImage, cfg: &SiftConfig) -> Result<ScaleSpace, SiftError> {
    cfg.validate()?;
    if img.width().min(img.height()) < MIN_IMAGE_SIDE {
        return Err(SiftError::ImageTooSmall {
            width: img.width(),
            height: img.height(),
            min: MIN_IMAGE_SIDE,
        });
    }
    let (base, input_blur) = if cfg.upsample {
        (upsample_2x(img), cfg.assumed_blur * 2.0)
    } else {
        (img.clone(), cfg.assumed_blur)
    };
    let initial_sigma = (cfg.sigma0 * cfg.sigma0 - input_blur * input_blur).max(0.0).sqrt();
    let seed = if initial_sigma > 1e-4 {
        gaussian_blur(&base, initial_sigma)
    } else {
        base
    };

    let min_side = seed.width().min(seed.height());
    let auto_octaves = ((min_side as f32).log2().floor() as usize).saturating_sub(2).max(1);
    let octave_count = cfg.octaves.unwrap_or(auto_octaves).clamp(1, auto_octaves.max(1));

    let s = cfg.scales_per_octave;
    // incremental blur to go from level i-1 to level i, in octave pixels
    let k = (2.0f32).powf(1.0 / s as f32);
    let increments: Vec<f32> = (1..s + 3)
        .map(|i| {
            let prev = cfg.sigma0 * k.powi(i as i32 - 1);
            prev * (k * k - 1.0).sqrt()
        })
        .collect();

    let mut octaves = Vec::with_capacity(octave_count);
    let mut current = seed;
    for _ in 0..octave_count {
        let mut gaussians = Vec::with_capacity(s + 3);
        gaussians.push(current);
        for &inc in &increments {
            gaussians.push(gaussian_blur(gaussians.last().unwrap(), inc));
        }
        let dogs = gaussians
            .windows(2)
            .map(|pair| subtract(&pair[1], &pair[0]))
            .collect();
        // level s has exactly twice the octave's base blur; halving it seeds
        // the next octave
        current = downsample_2x(&gaussians[s]);
        octaves.push(Octave { gaussians, dogs });
        if current.width() < 8 || current.height() < 8 {
            break;
        }
    }

    Ok(ScaleSpace {
        octaves,
        scales_per_octave: s,
        sigma0: cfg.sigma0,
        upsample_factor: if cfg.upsample { 2 } else { 1 },
    })
}

fn subtract(a: &GrayImage, b: &GrayImage) -> GrayImage {
    let data = a
        .data()
        .iter()
        .zip(b.data())
        .map(|(x, y)| x - y)
        .collect();
    GrayImage::from_raw(a.width(), a.height(), data)
}

/// Separable Gaussian blur, reflect-101 borders, f64 accumulation.
pub(crate) fn gaussian_blur(img: &GrayImage, sigma: f32) -> GrayImage {
    if sigma <= 0.0 {
        return img.clone();
    }
    let radius = (4.0 * sigma).ceil().max(1.0) as usize;
    let kernel = gaussian_kernel(sigma as f64, radius);
    let (w, h) = (img.width(), img.height());

    // horizontal pass
    let mut tmp = vec![0.0f32; w * h];
    for y in 0..h {
        let row = &img.data()[y * w..(y + 1) * w];
        for x in 0..w {
            let mut acc = 0.0f64;
            for (i, &weight) in kernel.iter().enumerate() {
                let offset = i as isize - radius as isize;
                let sx = reflect_101(x as isize + offset, w);
                acc += weight * row[sx] as f64;
            }
            tmp[y * w + x] = acc as f32;
        }
    }
    // vertical pass
    let mut out = vec![0.0f32; w * h];
    for y in 0..h {
        for x in 0..w {
            let mut acc = 0.0f64;
            for (i, &weight) in kernel.iter().enumerate() {
                let offset = i as isize - radius as isize;
                let sy = reflect_101(y as isize + offset, h);
                acc += weight * tmp[sy * w + x] as f64;
            }
            out[y * w + x] = acc as f32;
        }
    }
    GrayImage::from_raw(w, h, out)
}

fn gaussian_kernel(sigma: f64, radius: usize) -> Vec<f64> {
    let mut kernel: Vec<f64> = (0..=2 * radius)
        .map(|i| {
            let d = i as f64 - radius as f64;
            (-d * d / (2.0 * sigma * sigma)).exp()
        })
        .collect();
    let sum: f64 = kernel.iter().sum();
    for k in kernel.iter_mut() {
        *k /= sum;
    }
    kernel
}

#[inline]
fn reflect_101(i: isize, len: usize) -> usize {
    let len = len as isize;
    let mut i = i;
    // mirror without repeating the border pixel
    while i < 0 || i >= len {
        if i < 0 {
            i = -i;
        }
        if i >= len {
            i = 2 * (len - 1) - i;
        }
    }
    i as usize
}

/// Bilinear 2x upsample.
pub(crate) fn upsample_2x(img: &GrayImage) -> GrayImage {
    let (w, h) = (img.width(), img.height());
    let (nw, nh) = (w * 2, h * 2);
    let mut out = vec![0.0f32; nw * nh];
    for y in 0..nh {
        let sy = y as f32 / 2.0;
        let y0 = sy.floor() as usize;
        let y1 = (y0 + 1).min(h - 1);
        let fy = sy - y0 as f32;
        for x in 0..nw {
            let sx = x as f32 / 2.0;
            let x0 = sx.floor() as usize;
            let x1 = (x0 + 1).min(w - 1);
            let fx = sx - x0 as f32;
            let top = img.get(x0, y0) * (1.0 - fx) + img.get(x1, y0) * fx;
            let bottom = img.get(x0, y1) * (1.0 - fx) + img.get(x1, y1) * fx;
            out[y * nw + x] = top * (1.0 - fy) + bottom * fy;
        }
    }
    GrayImage::from_raw(nw, nh, out)
}

/// Every-other-pixel decimation.
pub(crate) fn downsample_2x(img: &GrayImage) -> GrayImage {
    let (w, h) = (img.width(), img.height());
    let (nw, nh) = ((w / 2).max(1), (h / 2).max(1));
    let mut out = vec![0.0f32; nw * nh];
    for y in 0..nh {
        for x in 0..nw {
            out[y * nw + x] = img.get((x * 2).min(w - 1), (y * 2).min(h - 1));
        }
    }
    GrayImage::from_raw(nw, nh, out)
}
