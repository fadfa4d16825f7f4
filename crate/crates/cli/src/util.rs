//! Shared CLI plumbing: error classes, file access, image listing.

use std::fmt;
use std::path::{Path, PathBuf};

use wayfinder_core::features::GrayImage;
use wayfinder_core::imgio::{read_netpbm, NetpbmImage};
use wayfinder_core::stitcher::ColorImage;

/// Failures split by exit code: usage errors exit 2, domain errors exit 1.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Domain(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Domain(m) => f.write_str(m),
        }
    }
}

pub fn usage(message: impl Into<String>) -> CliError {
    CliError::Usage(message.into())
}

pub fn domain(message: impl Into<String>) -> CliError {
    CliError::Domain(message.into())
}

/// Read a required input file; a missing path is a usage error, any other
/// I/O problem a domain error.
pub fn read_input(path: &Path) -> Result<Vec<u8>, CliError> {
    std::fs::read(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => usage(format!("input file not found: {}", path.display())),
        _ => domain(format!("cannot read {}: {e}", path.display())),
    })
}

pub fn write_output(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    std::fs::write(path, bytes)
        .map_err(|e| domain(format!("cannot write {}: {e}", path.display())))
}

/// Netpbm files in a directory, lexicographic by file name.
pub fn list_images(dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    let entries = std::fs::read_dir(dir).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => usage(format!("directory not found: {}", dir.display())),
        _ => domain(format!("cannot list {}: {e}", dir.display())),
    })?;
    let mut files: Vec<PathBuf> = entries
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|path| {
            matches!(
                path.extension().and_then(|e| e.to_str()),
                Some("pgm") | Some("ppm")
            )
        })
        .collect();
    files.sort();
    Ok(files)
}

pub fn read_image(path: &Path) -> Result<NetpbmImage, CliError> {
    let bytes = read_input(path)?;
    read_netpbm(&bytes).map_err(|e| domain(format!("{}: {e}", path.display())))
}

pub fn read_gray_image(path: &Path) -> Result<GrayImage, CliError> {
    Ok(GrayImage::from_luma_u8(&read_image(path)?.to_luma()))
}

pub fn read_color_image(path: &Path) -> Result<ColorImage, CliError> {
    match read_image(path)? {
        NetpbmImage::Rgb(rgb) => Ok(ColorImage::from_rgb8(&rgb)),
        NetpbmImage::Gray(gray) => {
            let rgb_data: Vec<u8> = gray.data.iter().flat_map(|&v| [v, v, v]).collect();
            let rgb = wayfinder_core::imgio::RgbImage::new(gray.width, gray.height, rgb_data)
                .map_err(|e| domain(e.to_string()))?;
            Ok(ColorImage::from_rgb8(&rgb))
        }
    }
}

/// Glob-lite matching with `*` (any run) and `?` (any one character).
pub fn wildcard_match(pattern: &str, name: &str) -> bool {
    let p: Vec<char> = pattern.chars().collect();
    let n: Vec<char> = name.chars().collect();
    let (mut pi, mut ni) = (0usize, 0usize);
    let mut star: Option<(usize, usize)> = None;
    while ni < n.len() {
        if pi < p.len() && (p[pi] == '?' || p[pi] == n[ni]) {
            pi += 1;
            ni += 1;
        } else if pi < p.len() && p[pi] == '*' {
            star = Some((pi, ni));
            pi += 1;
        } else if let Some((sp, sn)) = star {
            pi = sp + 1;
            ni = sn + 1;
            star = Some((sp, sn + 1));
        } else {
            return false;
        }
    }
    while pi < p.len() && p[pi] == '*' {
        pi += 1;
    }
    pi == p.len()
}
