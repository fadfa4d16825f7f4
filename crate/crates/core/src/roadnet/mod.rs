//! Road-network graph construction from GeoJSON line strings.
//!
//! Intersections become nodes and road segments become edges. Each node
//! carries the bearings of its incident edges and a junction type derived
//! from them (see [`classify_junction`]); small cycles and tagged circles are
//! retyped as roundabouts by [`detect_roundabouts`].

mod binary;
mod classify;
mod export;
mod graph;
mod parse;
mod roundabout;
#[cfg(test)]
pub(crate) mod testutil;
mod validate;

pub use binary::{load_network, save_network, MapFormatError, WFMP_MAGIC, WFMP_VERSION};
pub use classify::{classify_junction, classify_junction_with_tolerance, DEFAULT_COLLINEAR_TOL_DEG};
pub use export::export_annotated_geojson;
pub use graph::{build_graph, build_graph_with_stats, BuildStats, DEFAULT_SNAP_TOLERANCE_M};
pub use parse::{parse_geojson_roads, ParsedRoads};
pub use roundabout::{detect_roundabouts, DEFAULT_MAX_ROUNDABOUT_PERIMETER_M};
pub use validate::{validate_graph, ValidationReport};

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::geomath::GeoCoordinate;

#[derive(Debug, Error)]
pub enum RoadnetError {
    #[error("malformed GeoJSON document: {0}")]
    MalformedDocument(String),
}

/// Node identifier, unique within one [`RoadNetwork`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, serde::Serialize, serde::Deserialize)]
pub struct NodeId(pub u64);

/// Edge identifier, unique within one [`RoadNetwork`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, serde::Serialize, serde::Deserialize)]
pub struct EdgeId(pub u64);

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "n{}", self.0)
    }
}

impl fmt::Display for EdgeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "e{}", self.0)
    }
}

/// One road line string as parsed from GeoJSON, before graph construction.
#[derive(Debug, Clone, PartialEq)]
pub struct RoadFeature {
    pub id: String,
    /// At least two points; consecutive points are distinct.
    pub geometry: Vec<GeoCoordinate>,
    /// Road classification tag (`highway` value, or `roundabout` for tagged
    /// roundabout ways).
    pub road_class: String,
    pub name: Option<String>,
}

/// Junction taxonomy of a network node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum JunctionType {
    /// Three-way with one near-collinear pair: a through road plus a branch.
    T,
    /// Four-way formed by two near-collinear crossing pairs.
    X,
    /// Three-way without a collinear pair.
    Y,
    /// Member of a small closed cycle or a tagged roundabout circle.
    Roundabout,
    /// Four-or-more-way that is not an X.
    Crossroad,
    /// Degree-1 node.
    Endpoint,
    /// Degree-2 node retained from a split line string.
    PassThrough,
}

impl JunctionType {
    /// Stable lowercase name used in exported GeoJSON properties.
    pub fn name(self) -> &'static str {
        match self {
            JunctionType::T => "t-junction",
            JunctionType::X => "x-junction",
            JunctionType::Y => "y-junction",
            JunctionType::Roundabout => "roundabout",
            JunctionType::Crossroad => "crossroad",
            JunctionType::Endpoint => "endpoint",
            JunctionType::PassThrough => "pass-through",
        }
    }

    /// Marker color used in annotated exports.
    pub fn color(self) -> &'static str {
        match self {
            JunctionType::X => "red",
            JunctionType::Y => "yellow",
            JunctionType::T => "blue",
            JunctionType::Roundabout => "purple",
            JunctionType::Crossroad => "green",
            JunctionType::Endpoint | JunctionType::PassThrough => "gray",
        }
    }

    /// Whether this type may appear in an observed junction sequence.
    pub fn is_matchable(self) -> bool {
        !matches!(self, JunctionType::Endpoint | JunctionType::PassThrough)
    }

    pub(crate) fn code(self) -> u8 {
        match self {
            JunctionType::T => 0,
            JunctionType::X => 1,
            JunctionType::Y => 2,
            JunctionType::Roundabout => 3,
            JunctionType::Crossroad => 4,
            JunctionType::Endpoint => 5,
            JunctionType::PassThrough => 6,
        }
    }

    pub(crate) fn from_code(code: u8) -> Option<Self> {
        Some(match code {
            0 => JunctionType::T,
            1 => JunctionType::X,
            2 => JunctionType::Y,
            3 => JunctionType::Roundabout,
            4 => JunctionType::Crossroad,
            5 => JunctionType::Endpoint,
            6 => JunctionType::PassThrough,
            _ => return None,
        })
    }
}

impl fmt::Display for JunctionType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A classified intersection of the road network.
#[derive(Debug, Clone, PartialEq)]
pub struct IntersectionNode {
    pub id: NodeId,
    pub position: GeoCoordinate,
    /// One entry per incidence; a self-loop edge appears twice.
    pub incident_edges: Vec<EdgeId>,
    pub junction_type: JunctionType,
    /// Bearing toward each incident edge, aligned with `incident_edges`.
    pub approach_bearings: Vec<f64>,
}

impl IntersectionNode {
    pub fn degree(&self) -> usize {
        self.incident_edges.len()
    }
}

/// A road segment connecting exactly two nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct RoadSegment {
    pub id: EdgeId,
    pub endpoints: (NodeId, NodeId),
    pub polyline: Vec<GeoCoordinate>,
    /// Sum of haversine distances over the polyline, meters.
    pub length: f64,
    pub road_class: String,
}

/// Immutable intersection graph.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RoadNetwork {
    pub nodes: BTreeMap<NodeId, IntersectionNode>,
    pub edges: BTreeMap<EdgeId, RoadSegment>,
    /// Per node, `(neighbor, edge)` pairs sorted ascending; symmetric. A
    /// self-loop contributes a single `(self, edge)` entry.
    pub adjacency: BTreeMap<NodeId, Vec<(NodeId, EdgeId)>>,
}

impl RoadNetwork {
    pub fn node(&self, id: NodeId) -> Option<&IntersectionNode> {
        self.nodes.get(&id)
    }

    pub fn edge(&self, id: EdgeId) -> Option<&RoadSegment> {
        self.edges.get(&id)
    }

    pub fn neighbors(&self, id: NodeId) -> &[(NodeId, EdgeId)] {
        self.adjacency.get(&id).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Histogram of junction types, ordered by type.
    pub fn type_histogram(&self) -> BTreeMap<JunctionType, usize> {
        let mut hist = BTreeMap::new();
        for node in self.nodes.values() {
            *hist.entry(node.junction_type).or_insert(0) += 1;
        }
        hist
    }

    /// Rebuild the sorted adjacency lists from the edge table.
    pub(crate) fn rebuild_adjacency(&mut self) {
        let mut adjacency: BTreeMap<NodeId, Vec<(NodeId, EdgeId)>> =
            self.nodes.keys().map(|&id| (id, Vec::new())).collect();
        for edge in self.edges.values() {
            let (a, b) = edge.endpoints;
            adjacency.entry(a).or_default().push((b, edge.id));
            if a != b {
                adjacency.entry(b).or_default().push((a, edge.id));
            }
        }
        for list in adjacency.values_mut() {
            list.sort_unstable();
        }
        self.adjacency = adjacency;
    }
}
