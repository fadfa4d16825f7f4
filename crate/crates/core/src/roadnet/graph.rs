//! Graph construction: snap shared coordinates, split line strings at
//! interior intersections, derive approach bearings and junction types.

use std::collections::{BTreeMap, HashMap};

use super::classify::classify_junction;
use super::{EdgeId, IntersectionNode, NodeId, RoadFeature, RoadNetwork, RoadSegment};
use crate::geomath::{haversine_distance, initial_bearing, GeoCoordinate};

/// OSM-derived data shares exact coordinates; the tolerance only absorbs
/// float noise from other producers.
pub const DEFAULT_SNAP_TOLERANCE_M: f64 = 0.5;

/// Distance along an edge at which the approach bearing is probed, to avoid
/// degenerate near-node vertices on curvy segments.
const APPROACH_PROBE_M: f64 = 5.0;

#[derive(Debug, Default, Clone, Copy)]
pub struct BuildStats {
    /// Segments dropped because splitting left them with no length.
    pub dropped_zero_length: usize,
}

/// Build the intersection graph from parsed road features.
///
/// Nodes are created at line-string endpoints and at any coordinate shared
/// (within `snap_tolerance` meters) by two or more features, or appearing
/// at least twice overall. Line strings are split at interior nodes so that
/// every edge connects exactly two nodes. Degree-2 nodes are retained and
/// typed [`JunctionType::PassThrough`](super::JunctionType::PassThrough).
pub fn build_graph(features: &[RoadFeature], snap_tolerance: f64) -> RoadNetwork {
    build_graph_with_stats(features, snap_tolerance).0
}

pub fn build_graph_with_stats(
    features: &[RoadFeature],
    snap_tolerance: f64,
) -> (RoadNetwork, BuildStats) {
    let mut snapper = Snapper::new(snap_tolerance);
    let mut occurrences: Vec<u32> = Vec::new();
    let mut is_endpoint: Vec<bool> = Vec::new();

    // Pass 1: cluster every vertex, count occurrences, flag endpoints.
    let clustered: Vec<Vec<usize>> = features
        .iter()
        .map(|feature| {
            let clusters: Vec<usize> = feature
                .geometry
                .iter()
                .map(|&coordinate| {
                    let cluster = snapper.assign(coordinate);
                    if cluster == occurrences.len() {
                        occurrences.push(0);
                        is_endpoint.push(false);
                    }
                    occurrences[cluster] += 1;
                    cluster
                })
                .collect();
            if let (Some(&first), Some(&last)) = (clusters.first(), clusters.last()) {
                is_endpoint[first] = true;
                is_endpoint[last] = true;
            }
            clusters
        })
        .collect();

    // Pass 2: clusters that become nodes, ids in first-appearance order.
    let mut node_of_cluster: Vec<Option<NodeId>> = vec![None; occurrences.len()];
    let mut next_node = 0u64;
    for cluster in 0..occurrences.len() {
        if is_endpoint[cluster] || occurrences[cluster] >= 2 {
            node_of_cluster[cluster] = Some(NodeId(next_node));
            next_node += 1;
        }
    }

    // Pass 3: split each feature at interior nodes.
    let mut stats = BuildStats::default();
    let mut edges: BTreeMap<EdgeId, RoadSegment> = BTreeMap::new();
    let mut next_edge = 0u64;
    for (feature, clusters) in features.iter().zip(&clustered) {
        let mut start_node: Option<NodeId> = None;
        let mut polyline: Vec<GeoCoordinate> = Vec::new();
        for (vertex, &cluster) in feature.geometry.iter().zip(clusters) {
            // node vertices are rewritten to the cluster representative so
            // edge polylines and node positions coincide
            let node = node_of_cluster[cluster];
            let point = match node {
                Some(_) => snapper.centers[cluster],
                None => *vertex,
            };
            if polyline.last() != Some(&point) {
                polyline.push(point);
            }
            let Some(node_id) = node else { continue };
            match start_node {
                None => start_node = Some(node_id),
                Some(from) => {
                    if let Some(segment) = make_segment(
                        EdgeId(next_edge),
                        from,
                        node_id,
                        std::mem::take(&mut polyline),
                        &feature.road_class,
                    ) {
                        edges.insert(segment.id, segment);
                        next_edge += 1;
                    } else {
                        stats.dropped_zero_length += 1;
                    }
                    polyline = vec![point];
                    start_node = Some(node_id);
                }
            }
        }
    }

    // Pass 4: nodes, incidences and approach bearings.
    let mut nodes: BTreeMap<NodeId, IntersectionNode> = node_of_cluster
        .iter()
        .enumerate()
        .filter_map(|(cluster, node)| {
            node.map(|id| {
                (
                    id,
                    IntersectionNode {
                        id,
                        position: snapper.centers[cluster],
                        incident_edges: Vec::new(),
                        junction_type: super::JunctionType::Endpoint,
                        approach_bearings: Vec::new(),
                    },
                )
            })
        })
        .collect();
    for segment in edges.values() {
        let (a, b) = segment.endpoints;
        let forward = approach_bearing(&segment.polyline);
        let mut reversed = segment.polyline.clone();
        reversed.reverse();
        let backward = approach_bearing(&reversed);
        let node_a = nodes.get_mut(&a).expect("endpoint node exists");
        node_a.incident_edges.push(segment.id);
        node_a.approach_bearings.push(forward);
        let node_b = nodes.get_mut(&b).expect("endpoint node exists");
        node_b.incident_edges.push(segment.id);
        node_b.approach_bearings.push(backward);
    }
    for node in nodes.values_mut() {
        node.junction_type = classify_junction(&node.approach_bearings);
    }

    let mut network = RoadNetwork {
        nodes,
        edges,
        adjacency: BTreeMap::new(),
    };
    network.rebuild_adjacency();
    (network, stats)
}

fn make_segment(
    id: EdgeId,
    from: NodeId,
    to: NodeId,
    polyline: Vec<GeoCoordinate>,
    road_class: &str,
) -> Option<RoadSegment> {
    if polyline.len() < 2 {
        return None;
    }
    let length = polyline_length(&polyline);
    if length <= 0.0 {
        return None;
    }
    Some(RoadSegment {
        id,
        endpoints: (from, to),
        polyline,
        length,
        road_class: road_class.to_owned(),
    })
}

pub(crate) fn polyline_length(polyline: &[GeoCoordinate]) -> f64 {
    polyline
        .windows(2)
        .map(|pair| haversine_distance(pair[0], pair[1]))
        .sum()
}

/// Bearing from the polyline start toward the first vertex at least
/// [`APPROACH_PROBE_M`] along it (the far end on shorter edges).
fn approach_bearing(polyline: &[GeoCoordinate]) -> f64 {
    let origin = polyline[0];
    let mut travelled = 0.0;
    let mut probe = *polyline.last().expect("polyline non-empty");
    for pair in polyline.windows(2) {
        travelled += haversine_distance(pair[0], pair[1]);
        if travelled >= APPROACH_PROBE_M {
            probe = pair[1];
            break;
        }
    }
    if probe == origin {
        // zero-length edges never reach here; fall back to any distinct vertex
        probe = match polyline.iter().find(|&&p| p != origin) {
            Some(&p) => p,
            None => return 0.0,
        };
    }
    initial_bearing(origin, probe).unwrap_or(0.0)
}

/// First-come coordinate clustering with a haversine tolerance.
///
/// Buckets live in a local equirectangular projection purely to find
/// candidates; membership is always decided by true haversine distance to
/// the cluster representative.
struct Snapper {
    tolerance: f64,
    centers: Vec<GeoCoordinate>,
    exact: HashMap<(u64, u64), usize>,
    buckets: HashMap<(i64, i64), Vec<usize>>,
    meters_per_lon_degree: Option<f64>,
}

const METERS_PER_LAT_DEGREE: f64 = 111_320.0;

impl Snapper {
    fn new(tolerance: f64) -> Self {
        Snapper {
            tolerance: tolerance.max(0.0),
            centers: Vec::new(),
            exact: HashMap::new(),
            buckets: HashMap::new(),
            meters_per_lon_degree: None,
        }
    }

    /// Return the cluster id for `coordinate`, allocating a new cluster
    /// (id == current cluster count) when nothing lies within tolerance.
    fn assign(&mut self, coordinate: GeoCoordinate) -> usize {
        if self.tolerance == 0.0 {
            let key = (coordinate.lat().to_bits(), coordinate.lon().to_bits());
            if let Some(&cluster) = self.exact.get(&key) {
                return cluster;
            }
            let cluster = self.centers.len();
            self.centers.push(coordinate);
            self.exact.insert(key, cluster);
            return cluster;
        }

        let scale = *self
            .meters_per_lon_degree
            .get_or_insert_with(|| METERS_PER_LAT_DEGREE * coordinate.lat().to_radians().cos().max(0.01));
        let cell = 2.0 * self.tolerance;
        let cx = (coordinate.lon() * scale / cell).floor() as i64;
        let cy = (coordinate.lat() * METERS_PER_LAT_DEGREE / cell).floor() as i64;
        for dx in -1..=1 {
            for dy in -1..=1 {
                let Some(candidates) = self.buckets.get(&(cx + dx, cy + dy)) else {
                    continue;
                };
                for &cluster in candidates {
                    if haversine_distance(self.centers[cluster], coordinate) <= self.tolerance {
                        return cluster;
                    }
                }
            }
        }
        let cluster = self.centers.len();
        self.centers.push(coordinate);
        self.buckets.entry((cx, cy)).or_default().push(cluster);
        cluster
    }
}
