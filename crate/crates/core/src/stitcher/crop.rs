//! Black-edge cropping over the coverage mask.
//!
//! "Black" means undefined: warp voids tracked by the mask, never dark
//! scene content. The crop keeps the largest axis-aligned rectangle whose
//! row and column slices each contain strictly less than 2% undefined
//! pixels, computed with integer arithmetic (`50 * undefined < length`) so
//! the boundary is exact.

use super::warp::{ColorImage, MaskedImage};
use super::StitchError;

/// Undefined-fraction bound as the exact rational 1/50 (2%).
pub const MAX_UNDEFINED_NUMER: u64 = 1;
pub const MAX_UNDEFINED_DENOM: u64 = 50;

/// Inclusive crop window.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CropRect {
    pub x0: usize,
    pub y0: usize,
    pub x1: usize,
    pub y1: usize,
}

impl CropRect {
    pub fn width(&self) -> usize {
        self.x1 - self.x0 + 1
    }

    pub fn height(&self) -> usize {
        self.y1 - self.y0 + 1
    }

    pub fn area(&self) -> usize {
        self.width() * self.height()
    }

    /// Candidate ordering: larger area wins, ties prefer smaller `y0`, then
    /// smaller `x0`, then smaller `y1`.
    fn beats(&self, other: &CropRect) -> bool {
        self.area()
            .cmp(&other.area())
            .then(other.y0.cmp(&self.y0))
            .then(other.x0.cmp(&self.x0))
            .then(other.y1.cmp(&self.y1))
            .is_gt()
    }
}

#[inline]
fn slice_ok(undefined: u64, len: u64) -> bool {
    MAX_UNDEFINED_DENOM * undefined < MAX_UNDEFINED_NUMER * len
}

/// Largest valid crop rectangle of a coverage mask, or `None` when not even
/// a single defined pixel exists.
pub fn find_crop_rect(defined: &[bool], width: usize, height: usize) -> Option<CropRect> {
    assert_eq!(defined.len(), width * height);
    if width == 0 || height == 0 {
        return None;
    }
    // prefix sums of undefined counts per row and per column
    let mut row_prefix = vec![0u32; height * (width + 1)];
    for y in 0..height {
        for x in 0..width {
            row_prefix[y * (width + 1) + x + 1] =
                row_prefix[y * (width + 1) + x] + u32::from(!defined[y * width + x]);
        }
    }
    let row_undef = |y: usize, x0: usize, x1: usize| -> u64 {
        (row_prefix[y * (width + 1) + x1 + 1] - row_prefix[y * (width + 1) + x0]) as u64
    };

    let mut best: Option<CropRect> = None;
    let mut col_undef = vec![0u32; width];
    for y0 in 0..height {
        col_undef.fill(0);
        for y1 in y0..height {
            for x in 0..width {
                col_undef[x] += u32::from(!defined[y1 * width + x]);
            }
            let rect_height = (y1 - y0 + 1) as u64;
            if let Some(b) = &best {
                if rect_height as usize * width < b.area() {
                    continue;
                }
            }
            // maximal runs of columns that qualify at this height
            let mut run_start: Option<usize> = None;
            for x in 0..=width {
                let good = x < width && slice_ok(col_undef[x] as u64, rect_height);
                match (good, run_start) {
                    (true, None) => run_start = Some(x),
                    (false, Some(start)) => {
                        scan_run(
                            start,
                            x - 1,
                            y0,
                            y1,
                            &row_undef,
                            &mut best,
                        );
                        run_start = None;
                    }
                    _ => {}
                }
            }
        }
    }
    best
}

/// Try every sub-interval of a good-column run, widest first, keeping the
/// first (leftmost) width that satisfies all row constraints.
fn scan_run(
    start: usize,
    end: usize,
    y0: usize,
    y1: usize,
    row_undef: &dyn Fn(usize, usize, usize) -> u64,
    best: &mut Option<CropRect>,
) {
    let run_len = end - start + 1;
    let height = y1 - y0 + 1;
    for rect_width in (1..=run_len).rev() {
        if let Some(b) = best {
            if rect_width * height < b.area() {
                return;
            }
        }
        for x0 in start..=end + 1 - rect_width {
            let x1 = x0 + rect_width - 1;
            let rows_ok =
                (y0..=y1).all(|y| slice_ok(row_undef(y, x0, x1), rect_width as u64));
            if !rows_ok {
                continue;
            }
            let candidate = CropRect { x0, y0, x1, y1 };
            if best.as_ref().map(|b| candidate.beats(b)).unwrap_or(true) {
                *best = Some(candidate);
            }
            break; // leftmost placement found for this width
        }
    }
}

/// Crop warp voids from a panorama.
pub fn crop_black_edges(pano: &MaskedImage) -> Result<MaskedImage, StitchError> {
    let (w, h) = (pano.image.width(), pano.image.height());
    let rect = find_crop_rect(&pano.defined, w, h).ok_or(StitchError::FullyBlack)?;
    let mut data = Vec::with_capacity(rect.area());
    let mut defined = Vec::with_capacity(rect.area());
    for y in rect.y0..=rect.y1 {
        for x in rect.x0..=rect.x1 {
            data.push(pano.image.pixel(x, y));
            defined.push(pano.defined[y * w + x]);
        }
    }
    Ok(MaskedImage {
        image: ColorImage::new(rect.width(), rect.height(), data),
        defined,
    })
}
