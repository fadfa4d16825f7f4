//! Junction-sequence matching over the road network.
//!
//! Given a start coordinate and an observed sequence of junction types, the
//! matcher locates nearby intersections of the first type and depth-first
//! searches the graph for node paths realizing the whole sequence. Search is
//! deterministic: start candidates order by distance then id, and neighbors
//! expand in ascending `(node id, edge id)` order, so the first complete
//! path is the lexicographically smallest one.

use thiserror::Error;

use crate::geojson;
use crate::geomath::{haversine_distance, GeoCoordinate};
use crate::roadnet::{EdgeId, JunctionType, NodeId, RoadNetwork};

pub const DEFAULT_RADIUS_M: f64 = 500.0;
pub const DEFAULT_MAX_CANDIDATES: usize = 25;

#[derive(Debug, Error, PartialEq)]
pub enum MatchError {
    #[error("no intersection of the requested type within the search radius")]
    NoCandidates,
    #[error("junction sequence must not be empty")]
    EmptySequence,
    #[error("unknown sequence token {0:?} (expected T, X, Y, R or C)")]
    UnknownToken(String),
    #[error("junction type {0} cannot appear in an observed sequence")]
    NonMatchable(JunctionType),
}

/// An observed, ordered sequence of junction types along a route.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JunctionSequence {
    items: Vec<JunctionType>,
}

impl JunctionSequence {
    /// Sequences are non-empty and contain matchable types only
    /// (T, X, Y, roundabout, crossroad).
    pub fn new(items: Vec<JunctionType>) -> Result<Self, MatchError> {
        if items.is_empty() {
            return Err(MatchError::EmptySequence);
        }
        if let Some(&bad) = items.iter().find(|t| !t.is_matchable()) {
            return Err(MatchError::NonMatchable(bad));
        }
        Ok(Self { items })
    }

    /// Parse the comma-separated text form, e.g. `"T,X,Y"`. Tokens are
    /// case-insensitive: T, X, Y, R (roundabout), C (crossroad).
    pub fn parse_text(text: &str) -> Result<Self, MatchError> {
        let mut items = Vec::new();
        for raw in text.split(',') {
            let token = raw.trim();
            let item = match token.to_ascii_uppercase().as_str() {
                "T" => JunctionType::T,
                "X" => JunctionType::X,
                "Y" => JunctionType::Y,
                "R" => JunctionType::Roundabout,
                "C" => JunctionType::Crossroad,
                _ => return Err(MatchError::UnknownToken(token.to_owned())),
            };
            items.push(item);
        }
        Self::new(items)
    }

    pub fn items(&self) -> &[JunctionType] {
        &self.items
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }
}

/// Search parameters around one query.
#[derive(Debug, Clone, Copy)]
pub struct MatchConfig {
    pub start: GeoCoordinate,
    /// Start-candidate search radius, meters.
    pub radius: f64,
    pub max_candidates: usize,
    pub max_results: usize,
    /// When false (default) paths are simple; enabling this permits loops,
    /// e.g. circling a roundabout.
    pub allow_node_revisit: bool,
}

impl MatchConfig {
    pub fn new(start: GeoCoordinate) -> Self {
        MatchConfig {
            start,
            radius: DEFAULT_RADIUS_M,
            max_candidates: DEFAULT_MAX_CANDIDATES,
            max_results: 1,
            allow_node_revisit: false,
        }
    }

    pub fn with_radius(mut self, radius: f64) -> Self {
        self.radius = radius;
        self
    }

    pub fn with_max_results(mut self, max_results: usize) -> Self {
        self.max_results = max_results;
        self
    }
}

/// A node path realizing a junction sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct PathCandidate {
    /// One node per sequence item, consecutive nodes adjacent.
    pub nodes: Vec<NodeId>,
    /// Edges traversed between consecutive nodes (`nodes.len() - 1`).
    pub edges: Vec<EdgeId>,
    /// Sum of traversed edge lengths, meters.
    pub total_length: f64,
    /// Haversine distance from the query start to the first node, meters.
    pub start_distance: f64,
}

/// Nodes of the first sequence type within the radius, nearest first, ties
/// by ascending node id, truncated to `max_candidates`.
pub fn find_start_candidates(
    net: &RoadNetwork,
    cfg: &MatchConfig,
    first_type: JunctionType,
) -> Result<Vec<NodeId>, MatchError> {
    let mut candidates: Vec<(f64, NodeId)> = net
        .nodes
        .values()
        .filter(|node| node.junction_type == first_type)
        .map(|node| (haversine_distance(cfg.start, node.position), node.id))
        .filter(|&(distance, _)| distance <= cfg.radius)
        .collect();
    candidates.sort_by(|a, b| a.partial_cmp(b).expect("distances are finite"));
    candidates.truncate(cfg.max_candidates);
    if candidates.is_empty() {
        return Err(MatchError::NoCandidates);
    }
    Ok(candidates.into_iter().map(|(_, id)| id).collect())
}

/// Depth-first search for the first path from `start_node` matching `seq`.
///
/// At depth `k` a neighbor is expanded only if its junction type equals
/// `seq.items()[k]`; when `allow_node_revisit` is false, nodes already on
/// the partial path are excluded. Expansion order is ascending
/// `(node id, edge id)`, so the result is deterministic.
pub fn find_path(
    net: &RoadNetwork,
    start_node: NodeId,
    seq: &JunctionSequence,
    cfg: &MatchConfig,
) -> Option<PathCandidate> {
    let start = net.node(start_node)?;
    if start.junction_type != seq.items()[0] {
        return None;
    }
    let mut nodes = vec![start_node];
    let mut edges = Vec::new();
    if !dfs_extend(net, seq.items(), cfg.allow_node_revisit, &mut nodes, &mut edges) {
        return None;
    }
    Some(candidate_from_walk(net, cfg, nodes, edges))
}

fn dfs_extend(
    net: &RoadNetwork,
    wanted: &[JunctionType],
    allow_revisit: bool,
    nodes: &mut Vec<NodeId>,
    edges: &mut Vec<EdgeId>,
) -> bool {
    let depth = nodes.len();
    if depth == wanted.len() {
        return true;
    }
    let here = *nodes.last().expect("walk starts non-empty");
    // adjacency lists are pre-sorted by (neighbor, edge)
    for &(next, edge) in net.neighbors(here) {
        if !allow_revisit && nodes.contains(&next) {
            continue;
        }
        let Some(node) = net.node(next) else { continue };
        if node.junction_type != wanted[depth] {
            continue;
        }
        nodes.push(next);
        edges.push(edge);
        if dfs_extend(net, wanted, allow_revisit, nodes, edges) {
            return true;
        }
        nodes.pop();
        edges.pop();
    }
    false
}

fn candidate_from_walk(
    net: &RoadNetwork,
    cfg: &MatchConfig,
    nodes: Vec<NodeId>,
    edges: Vec<EdgeId>,
) -> PathCandidate {
    let total_length = edges
        .iter()
        .map(|e| net.edge(*e).map(|edge| edge.length).unwrap_or(0.0))
        .sum();
    let start_distance = net
        .node(nodes[0])
        .map(|n| haversine_distance(cfg.start, n.position))
        .unwrap_or(f64::INFINITY);
    PathCandidate {
        nodes,
        edges,
        total_length,
        start_distance,
    }
}

/// Match a sequence against the network.
///
/// Start candidates are tried nearest-first, each contributing at most one
/// path, until `max_results` paths are collected. Results order by
/// `(start_distance, total_length)`. With `max_results == 1` this stops at
/// the first start node admitting a completion.
pub fn match_sequence(
    net: &RoadNetwork,
    seq: &JunctionSequence,
    cfg: &MatchConfig,
) -> Result<Vec<PathCandidate>, MatchError> {
    let starts = find_start_candidates(net, cfg, seq.items()[0])?;
    let mut results = Vec::new();
    for start in starts {
        if results.len() >= cfg.max_results {
            break;
        }
        if let Some(candidate) = find_path(net, start, seq, cfg) {
            results.push(candidate);
        }
    }
    results.sort_by(|a, b| {
        (a.start_distance, a.total_length)
            .partial_cmp(&(b.start_distance, b.total_length))
            .expect("lengths are finite")
    });
    Ok(results)
}

/// Re-check a previously found candidate against the (possibly updated)
/// network, repairing the suffix after the first mismatch.
///
/// If every node still carries its expected type the candidate is returned
/// unchanged. On the first mismatch at position `k > 0`, a fresh DFS from
/// node `k-1` searches for an alternative completion of `seq[k..]`; the
/// repaired path keeps the valid prefix. A mismatch at position 0 leaves no
/// anchor to repair from, so the result is `None`.
pub fn validate_and_correct(
    net: &RoadNetwork,
    candidate: &PathCandidate,
    seq: &JunctionSequence,
    cfg: &MatchConfig,
) -> Option<PathCandidate> {
    let wanted = seq.items();
    if candidate.nodes.len() != wanted.len() {
        return None;
    }
    let mismatch = candidate.nodes.iter().zip(wanted).position(|(id, &t)| {
        net.node(*id).map(|n| n.junction_type) != Some(t)
    });
    let Some(k) = mismatch else {
        return Some(candidate.clone());
    };
    if k == 0 {
        return None;
    }
    let mut nodes = candidate.nodes[..k].to_vec();
    let mut edges = candidate.edges[..k - 1].to_vec();
    if !dfs_extend(net, wanted, cfg.allow_node_revisit, &mut nodes, &mut edges) {
        return None;
    }
    Some(candidate_from_walk(net, cfg, nodes, edges))
}

/// Export a matched path as GeoJSON: ordered purple Points (properties
/// `sequence_index`, `junction_type`) plus a LineString per traversed edge.
pub fn export_path_geojson(net: &RoadNetwork, candidate: &PathCandidate) -> Vec<u8> {
    let mut features = Vec::new();
    for (index, id) in candidate.nodes.iter().enumerate() {
        let Some(node) = net.node(*id) else { continue };
        let mut props = serde_json::Map::new();
        props.insert("sequence_index".into(), serde_json::Value::from(index as u64));
        props.insert("node_id".into(), serde_json::Value::from(id.0));
        props.insert(
            "junction_type".into(),
            serde_json::Value::from(node.junction_type.name()),
        );
        props.insert("color".into(), serde_json::Value::from("purple"));
        features.push(geojson::point_feature(node.position, props));
    }
    for edge_id in &candidate.edges {
        let Some(edge) = net.edge(*edge_id) else { continue };
        let mut props = serde_json::Map::new();
        props.insert("edge_id".into(), serde_json::Value::from(edge_id.0));
        features.push(geojson::linestring_feature(&edge.polyline, props));
    }
    geojson::to_bytes(&geojson::feature_collection(features))
}
