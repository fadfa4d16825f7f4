//! Binary map serialization (`WFMP`).
//!
//! Little-endian framing, same conventions as the place-descriptor archive:
//! magic, `u16` version, then length-prefixed node and edge tables.
//! Adjacency is not stored; it is rebuilt deterministically on load.

use std::io::{Cursor, Read, Write};

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};
use thiserror::Error;

use super::{EdgeId, IntersectionNode, JunctionType, NodeId, RoadNetwork, RoadSegment};
use crate::geomath::GeoCoordinate;

pub const WFMP_MAGIC: &[u8; 4] = b"WFMP";
pub const WFMP_VERSION: u16 = 1;

#[derive(Debug, Error)]
pub enum MapFormatError {
    #[error("bad magic: not a WFMP map file")]
    BadMagic,
    #[error("unsupported WFMP version {0}")]
    VersionMismatch(u16),
    #[error("truncated map stream")]
    Truncated,
    #[error("malformed map record: {0}")]
    Malformed(String),
}

impl From<std::io::Error> for MapFormatError {
    fn from(_: std::io::Error) -> Self {
        MapFormatError::Truncated
    }
}

pub fn save_network(net: &RoadNetwork) -> Vec<u8> {
    let mut out = Vec::new();
    out.write_all(WFMP_MAGIC).unwrap();
    out.write_u16::<LittleEndian>(WFMP_VERSION).unwrap();

    out.write_u32::<LittleEndian>(net.nodes.len() as u32).unwrap();
    for node in net.nodes.values() {
        out.write_u64::<LittleEndian>(node.id.0).unwrap();
        out.write_f64::<LittleEndian>(node.position.lat()).unwrap();
        out.write_f64::<LittleEndian>(node.position.lon()).unwrap();
        out.write_u8(node.junction_type.code()).unwrap();
        out.write_u16::<LittleEndian>(node.incident_edges.len() as u16).unwrap();
        for (edge, bearing) in node.incident_edges.iter().zip(&node.approach_bearings) {
            out.write_u64::<LittleEndian>(edge.0).unwrap();
            out.write_f64::<LittleEndian>(*bearing).unwrap();
        }
    }

    out.write_u32::<LittleEndian>(net.edges.len() as u32).unwrap();
    for edge in net.edges.values() {
        out.write_u64::<LittleEndian>(edge.id.0).unwrap();
        out.write_u64::<LittleEndian>(edge.endpoints.0 .0).unwrap();
        out.write_u64::<LittleEndian>(edge.endpoints.1 .0).unwrap();
        let class = edge.road_class.as_bytes();
        out.write_u16::<LittleEndian>(class.len() as u16).unwrap();
        out.write_all(class).unwrap();
        out.write_f64::<LittleEndian>(edge.length).unwrap();
        out.write_u32::<LittleEndian>(edge.polyline.len() as u32).unwrap();
        for point in &edge.polyline {
            out.write_f64::<LittleEndian>(point.lat()).unwrap();
            out.write_f64::<LittleEndian>(point.lon()).unwrap();
        }
    }
    out
}

pub fn load_network(bytes: &[u8]) -> Result<RoadNetwork, MapFormatError> {
    let mut r = Cursor::new(bytes);
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic).map_err(|_| MapFormatError::BadMagic)?;
    if &magic != WFMP_MAGIC {
        return Err(MapFormatError::BadMagic);
    }
    let version = r.read_u16::<LittleEndian>()?;
    if version != WFMP_VERSION {
        return Err(MapFormatError::VersionMismatch(version));
    }

    let mut net = RoadNetwork::default();
    let node_count = r.read_u32::<LittleEndian>()?;
    for _ in 0..node_count {
        let id = NodeId(r.read_u64::<LittleEndian>()?);
        let lat = r.read_f64::<LittleEndian>()?;
        let lon = r.read_f64::<LittleEndian>()?;
        let position = GeoCoordinate::new(lat, lon)
            .map_err(|e| MapFormatError::Malformed(format!("node {id}: {e}")))?;
        let type_code = r.read_u8()?;
        let junction_type = JunctionType::from_code(type_code)
            .ok_or_else(|| MapFormatError::Malformed(format!("junction type code {type_code}")))?;
        let incident_count = r.read_u16::<LittleEndian>()?;
        let mut incident_edges = Vec::with_capacity(incident_count as usize);
        let mut approach_bearings = Vec::with_capacity(incident_count as usize);
        for _ in 0..incident_count {
            incident_edges.push(EdgeId(r.read_u64::<LittleEndian>()?));
            approach_bearings.push(r.read_f64::<LittleEndian>()?);
        }
        net.nodes.insert(
            id,
            IntersectionNode {
                id,
                position,
                incident_edges,
                junction_type,
                approach_bearings,
            },
        );
    }

    let edge_count = r.read_u32::<LittleEndian>()?;
    for _ in 0..edge_count {
        let id = EdgeId(r.read_u64::<LittleEndian>()?);
        let a = NodeId(r.read_u64::<LittleEndian>()?);
        let b = NodeId(r.read_u64::<LittleEndian>()?);
        let class_len = r.read_u16::<LittleEndian>()? as usize;
        let mut class_bytes = vec![0u8; class_len];
        r.read_exact(&mut class_bytes)?;
        let road_class = String::from_utf8(class_bytes)
            .map_err(|_| MapFormatError::Malformed("road class not UTF-8".into()))?;
        let length = r.read_f64::<LittleEndian>()?;
        let point_count = r.read_u32::<LittleEndian>()? as usize;
        if point_count < 2 {
            return Err(MapFormatError::Malformed(format!(
                "edge {id} has {point_count} points"
            )));
        }
        let mut polyline = Vec::with_capacity(point_count);
        for _ in 0..point_count {
            let lat = r.read_f64::<LittleEndian>()?;
            let lon = r.read_f64::<LittleEndian>()?;
            polyline.push(
                GeoCoordinate::new(lat, lon)
                    .map_err(|e| MapFormatError::Malformed(format!("edge {id}: {e}")))?,
            );
        }
        if !net.nodes.contains_key(&a) || !net.nodes.contains_key(&b) {
            return Err(MapFormatError::Malformed(format!(
                "edge {id} references a missing node"
            )));
        }
        net.edges.insert(
            id,
            RoadSegment {
                id,
                endpoints: (a, b),
                polyline,
                length,
                road_class,
            },
        );
    }

    net.rebuild_adjacency();
    Ok(net)
}
