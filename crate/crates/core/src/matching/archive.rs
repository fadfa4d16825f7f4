//! Place-database archive (`WFDB`).
//!
//! Little-endian throughout. Layout:
//!
//! ```text
//! "WFDB"  u16 version  u32 place_count
//! per place:
//!   u16 id_len + id bytes          (UTF-8)
//!   u16 name_len + name bytes     (UTF-8)
//!   f64 lat  f64 lon
//!   u32 keypoint_count
//!   per keypoint:
//!     f32 x  f32 y  f32 scale  f32 orientation
//!     u8 mode   mode 0: 128 x f32   mode 1: 128 x u8 (value * 512)
//! ```

use std::io::{Cursor, Read, Write};

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};
use thiserror::Error;

use super::{IndexMode, MatchingError, PlaceDatabase, PlaceRecord};
use crate::features::{Descriptor, Keypoint, DESCRIPTOR_LEN};
use crate::geomath::GeoCoordinate;

pub const WFDB_MAGIC: &[u8; 4] = b"WFDB";
pub const WFDB_VERSION: u16 = 1;

/// Quantization step of the byte descriptor form.
const QUANT_SCALE: f32 = 512.0;

#[derive(Debug, Error)]
pub enum ArchiveError {
    #[error("bad magic: not a WFDB archive")]
    BadMagic,
    #[error("unsupported WFDB version {0}")]
    VersionMismatch(u16),
    #[error("truncated archive")]
    TruncatedArchive,
    #[error("malformed archive record: {0}")]
    Malformed(String),
    #[error(transparent)]
    Database(#[from] MatchingError),
}

impl From<std::io::Error> for ArchiveError {
    fn from(_: std::io::Error) -> Self {
        ArchiveError::TruncatedArchive
    }
}

/// Descriptor payload encoding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DescriptorMode {
    /// Lossless 128 x f32.
    #[default]
    Float,
    /// 128 x u8, each component `round(v * 512)` saturated at 255; decodes
    /// within 1/512 per component for in-range descriptors.
    Quantized,
}

impl DescriptorMode {
    fn byte(self) -> u8 {
        match self {
            DescriptorMode::Float => 0,
            DescriptorMode::Quantized => 1,
        }
    }
}

pub fn save_archive(db: &PlaceDatabase, mode: DescriptorMode) -> Vec<u8> {
    let mut out = Vec::new();
    out.write_all(WFDB_MAGIC).unwrap();
    out.write_u16::<LittleEndian>(WFDB_VERSION).unwrap();
    out.write_u32::<LittleEndian>(db.records().len() as u32).unwrap();
    for record in db.records() {
        write_string(&mut out, &record.place_id);
        write_string(&mut out, &record.name);
        out.write_f64::<LittleEndian>(record.location.lat()).unwrap();
        out.write_f64::<LittleEndian>(record.location.lon()).unwrap();
        out.write_u32::<LittleEndian>(record.keypoints.len() as u32).unwrap();
        for (kp, desc) in record.keypoints.iter().zip(&record.descriptors) {
            out.write_f32::<LittleEndian>(kp.x).unwrap();
            out.write_f32::<LittleEndian>(kp.y).unwrap();
            out.write_f32::<LittleEndian>(kp.scale).unwrap();
            out.write_f32::<LittleEndian>(kp.orientation).unwrap();
            out.write_u8(mode.byte()).unwrap();
            match mode {
                DescriptorMode::Float => {
                    for &v in desc.values() {
                        out.write_f32::<LittleEndian>(v).unwrap();
                    }
                }
                DescriptorMode::Quantized => {
                    for &v in desc.values() {
                        out.write_u8((v * QUANT_SCALE).round().clamp(0.0, 255.0) as u8).unwrap();
                    }
                }
            }
        }
    }
    out
}

/// Load an archive; indexes are rebuilt with the requested mode.
pub fn load_archive(bytes: &[u8], index_mode: IndexMode) -> Result<PlaceDatabase, ArchiveError> {
    let mut r = Cursor::new(bytes);
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic).map_err(|_| ArchiveError::BadMagic)?;
    if &magic != WFDB_MAGIC {
        return Err(ArchiveError::BadMagic);
    }
    let version = r.read_u16::<LittleEndian>()?;
    if version != WFDB_VERSION {
        return Err(ArchiveError::VersionMismatch(version));
    }
    let place_count = r.read_u32::<LittleEndian>()?;
    let mut records = Vec::with_capacity(place_count as usize);
    for _ in 0..place_count {
        let place_id = read_string(&mut r)?;
        let name = read_string(&mut r)?;
        let lat = r.read_f64::<LittleEndian>()?;
        let lon = r.read_f64::<LittleEndian>()?;
        let location = GeoCoordinate::new(lat, lon)
            .map_err(|e| ArchiveError::Malformed(format!("place {place_id:?}: {e}")))?;
        let keypoint_count = r.read_u32::<LittleEndian>()?;
        let mut keypoints = Vec::with_capacity(keypoint_count as usize);
        let mut descriptors = Vec::with_capacity(keypoint_count as usize);
        for _ in 0..keypoint_count {
            let x = r.read_f32::<LittleEndian>()?;
            let y = r.read_f32::<LittleEndian>()?;
            let scale = r.read_f32::<LittleEndian>()?;
            let orientation = r.read_f32::<LittleEndian>()?;
            keypoints.push(Keypoint {
                x,
                y,
                scale,
                orientation,
                octave: 0,
                layer: 0,
                response: 0.0,
            });
            let mode = r.read_u8()?;
            let mut values = [0.0f32; DESCRIPTOR_LEN];
            match mode {
                0 => {
                    for v in values.iter_mut() {
                        *v = r.read_f32::<LittleEndian>()?;
                    }
                }
                1 => {
                    let mut raw = [0u8; DESCRIPTOR_LEN];
                    r.read_exact(&mut raw)?;
                    for (v, &b) in values.iter_mut().zip(&raw) {
                        *v = b as f32 / QUANT_SCALE;
                    }
                }
                other => {
                    return Err(ArchiveError::Malformed(format!(
                        "unknown descriptor mode {other}"
                    )))
                }
            }
            descriptors.push(Descriptor::from_raw_values(values));
        }
        records.push(PlaceRecord {
            place_id,
            name,
            location,
            keypoints,
            descriptors,
        });
    }
    Ok(PlaceDatabase::new(records, index_mode)?)
}

fn write_string(out: &mut Vec<u8>, s: &str) {
    let bytes = s.as_bytes();
    out.write_u16::<LittleEndian>(bytes.len() as u16).unwrap();
    out.write_all(bytes).unwrap();
}

fn read_string(r: &mut Cursor<&[u8]>) -> Result<String, ArchiveError> {
    let len = r.read_u16::<LittleEndian>()? as usize;
    let mut bytes = vec![0u8; len];
    r.read_exact(&mut bytes)?;
    String::from_utf8(bytes).map_err(|_| ArchiveError::Malformed("string not UTF-8".into()))
}
