//! Codec-free image I/O: binary PGM (P5) and PPM (P6), 8-bit maxval 255.

use std::io::Write;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum ImageIoError {
    #[error("not a supported netpbm image: {0}")]
    BadHeader(String),
    #[error("truncated pixel data: expected {expected} bytes, found {found}")]
    Truncated { expected: usize, found: usize },
    #[error("unsupported maxval {0}, only 255 is accepted")]
    UnsupportedMaxval(u32),
    #[error("image dimensions {0}x{1} are invalid")]
    BadDimensions(usize, usize),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// 8-bit RGB image, interleaved row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct RgbImage {
    pub width: usize,
    pub height: usize,
    /// `3 * width * height` bytes, RGB interleaved.
    pub data: Vec<u8>,
}

/// 8-bit grayscale image, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct GrayImageU8 {
    pub width: usize,
    pub height: usize,
    pub data: Vec<u8>,
}

impl RgbImage {
    pub fn new(width: usize, height: usize, data: Vec<u8>) -> Result<Self, ImageIoError> {
        if width == 0 || height == 0 {
            return Err(ImageIoError::BadDimensions(width, height));
        }
        if data.len() != 3 * width * height {
            return Err(ImageIoError::Truncated {
                expected: 3 * width * height,
                found: data.len(),
            });
        }
        Ok(Self { width, height, data })
    }

    pub fn pixel(&self, x: usize, y: usize) -> [u8; 3] {
        let i = 3 * (y * self.width + x);
        [self.data[i], self.data[i + 1], self.data[i + 2]]
    }
}

impl GrayImageU8 {
    pub fn new(width: usize, height: usize, data: Vec<u8>) -> Result<Self, ImageIoError> {
        if width == 0 || height == 0 {
            return Err(ImageIoError::BadDimensions(width, height));
        }
        if data.len() != width * height {
            return Err(ImageIoError::Truncated {
                expected: width * height,
                found: data.len(),
            });
        }
        Ok(Self { width, height, data })
    }
}

/// Either flavor of netpbm image this crate reads.
#[derive(Debug, Clone, PartialEq)]
pub enum NetpbmImage {
    Gray(GrayImageU8),
    Rgb(RgbImage),
}

impl NetpbmImage {
    pub fn dimensions(&self) -> (usize, usize) {
        match self {
            NetpbmImage::Gray(g) => (g.width, g.height),
            NetpbmImage::Rgb(c) => (c.width, c.height),
        }
    }

    /// Luminance bytes: grayscale passes through, color converts with the
    /// 0.299/0.587/0.114 weights.
    pub fn to_luma(&self) -> GrayImageU8 {
        match self {
            NetpbmImage::Gray(g) => g.clone(),
            NetpbmImage::Rgb(c) => {
                let data = c
                    .data
                    .chunks_exact(3)
                    .map(|px| {
                        let y = 0.299 * px[0] as f32 + 0.587 * px[1] as f32 + 0.114 * px[2] as f32;
                        y.round().clamp(0.0, 255.0) as u8
                    })
                    .collect();
                GrayImageU8 {
                    width: c.width,
                    height: c.height,
                    data,
                }
            }
        }
    }
}

/// Parse a binary PGM (P5) or PPM (P6) image.
pub fn read_netpbm(bytes: &[u8]) -> Result<NetpbmImage, ImageIoError> {
    let mut cursor = 0usize;
    let magic = take_token(bytes, &mut cursor)
        .ok_or_else(|| ImageIoError::BadHeader("missing magic".into()))?;
    let channels = match magic {
        b"P5" => 1usize,
        b"P6" => 3usize,
        other => {
            return Err(ImageIoError::BadHeader(format!(
                "magic {:?}",
                String::from_utf8_lossy(other)
            )))
        }
    };
    let width = parse_number(bytes, &mut cursor)?;
    let height = parse_number(bytes, &mut cursor)?;
    let maxval = parse_number(bytes, &mut cursor)?;
    if maxval != 255 {
        return Err(ImageIoError::UnsupportedMaxval(maxval as u32));
    }
    // exactly one whitespace byte separates the header from pixel data
    cursor += 1;
    let expected = width * height * channels;
    let found = bytes.len().saturating_sub(cursor);
    if found < expected {
        return Err(ImageIoError::Truncated { expected, found });
    }
    let data = bytes[cursor..cursor + expected].to_vec();
    if channels == 1 {
        Ok(NetpbmImage::Gray(GrayImageU8::new(width, height, data)?))
    } else {
        Ok(NetpbmImage::Rgb(RgbImage::new(width, height, data)?))
    }
}

fn take_token<'a>(bytes: &'a [u8], cursor: &mut usize) -> Option<&'a [u8]> {
    skip_whitespace_and_comments(bytes, cursor);
    let start = *cursor;
    while *cursor < bytes.len() && !bytes[*cursor].is_ascii_whitespace() {
        *cursor += 1;
    }
    (start != *cursor).then(|| &bytes[start..*cursor])
}

fn skip_whitespace_and_comments(bytes: &[u8], cursor: &mut usize) {
    loop {
        while *cursor < bytes.len() && bytes[*cursor].is_ascii_whitespace() {
            *cursor += 1;
        }
        if *cursor < bytes.len() && bytes[*cursor] == b'#' {
            while *cursor < bytes.len() && bytes[*cursor] != b'\n' {
                *cursor += 1;
            }
        } else {
            return;
        }
    }
}

fn parse_number(bytes: &[u8], cursor: &mut usize) -> Result<usize, ImageIoError> {
    let token = take_token(bytes, cursor)
        .ok_or_else(|| ImageIoError::BadHeader("missing header field".into()))?;
    std::str::from_utf8(token)
        .ok()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| {
            ImageIoError::BadHeader(format!("bad number {:?}", String::from_utf8_lossy(token)))
        })
}

pub fn write_pgm(img: &GrayImageU8) -> Vec<u8> {
    let mut out = Vec::with_capacity(img.data.len() + 32);
    write!(out, "P5\n{} {}\n255\n", img.width, img.height).unwrap();
    out.extend_from_slice(&img.data);
    out
}

pub fn write_ppm(img: &RgbImage) -> Vec<u8> {
    let mut out = Vec::with_capacity(img.data.len() + 32);
    write!(out, "P6\n{} {}\n255\n", img.width, img.height).unwrap();
    out.extend_from_slice(&img.data);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pgm_round_trip() {
        let img = GrayImageU8::new(3, 2, vec![0, 64, 128, 192, 255, 10]).unwrap();
        let bytes = write_pgm(&img);
        match read_netpbm(&bytes).unwrap() {
            NetpbmImage::Gray(g) => assert_eq!(g, img),
            _ => panic!("expected grayscale"),
        }
    }

    #[test]
    fn ppm_round_trip_and_luma() {
        let img = RgbImage::new(2, 1, vec![255, 0, 0, 0, 255, 0]).unwrap();
        let bytes = write_ppm(&img);
        let read = read_netpbm(&bytes).unwrap();
        assert_eq!(read, NetpbmImage::Rgb(img));
        let luma = read.to_luma();
        assert_eq!(luma.data, vec![76, 150]); // 0.299*255, 0.587*255 rounded
    }

    #[test]
    fn comments_in_header_are_skipped() {
        let bytes = b"P5\n# written by hand\n2 2\n255\n\x00\x01\x02\x03";
        match read_netpbm(bytes).unwrap() {
            NetpbmImage::Gray(g) => {
                assert_eq!((g.width, g.height), (2, 2));
                assert_eq!(g.data, vec![0, 1, 2, 3]);
            }
            _ => panic!("expected grayscale"),
        }
    }

    #[test]
    fn errors_are_specific() {
        assert!(matches!(
            read_netpbm(b"P4\n1 1\n255\n\x00"),
            Err(ImageIoError::BadHeader(_))
        ));
        assert!(matches!(
            read_netpbm(b"P5\n2 2\n255\n\x00"),
            Err(ImageIoError::Truncated { .. })
        ));
        assert!(matches!(
            read_netpbm(b"P5\n2 2\n65535\n\x00"),
            Err(ImageIoError::UnsupportedMaxval(65535))
        ));
    }
}
