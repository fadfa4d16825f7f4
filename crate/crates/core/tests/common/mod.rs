//! Shared helpers for integration tests.

#![allow(dead_code)]

use wayfinder_core::features::GrayImage;
use wayfinder_core::stitcher::ColorImage;

/// Deterministic LCG in [0, 1).
pub struct Lcg(pub u64);

impl Lcg {
    pub fn next_f32(&mut self) -> f32 {
        self.0 = self
            .0
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        ((self.0 >> 33) as f64 / (1u64 << 31) as f64) as f32
    }

    pub fn next_usize(&mut self, bound: usize) -> usize {
        self.0 = self
            .0
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        ((self.0 >> 33) as usize) % bound.max(1)
    }
}

/// Bilinear value noise on a lattice of the given cell size.
fn value_noise(width: usize, height: usize, cell: usize, seed: u64) -> Vec<f32> {
    let gw = width / cell + 2;
    let gh = height / cell + 2;
    let mut rng = Lcg(seed);
    let grid: Vec<f32> = (0..gw * gh).map(|_| rng.next_f32()).collect();
    let mut out = vec![0.0f32; width * height];
    for y in 0..height {
        for x in 0..width {
            let fx = x as f32 / cell as f32;
            let fy = y as f32 / cell as f32;
            let x0 = fx.floor() as usize;
            let y0 = fy.floor() as usize;
            let tx = fx - x0 as f32;
            let ty = fy - y0 as f32;
            let g = |i: usize, j: usize| grid[j * gw + i];
            let top = g(x0, y0) * (1.0 - tx) + g(x0 + 1, y0) * tx;
            let bottom = g(x0, y0 + 1) * (1.0 - tx) + g(x0 + 1, y0 + 1) * tx;
            out[y * width + x] = top * (1.0 - ty) + bottom * ty;
        }
    }
    out
}

/// Multi-octave value noise: dense in corners and blobs at several scales,
/// which is what the feature pipeline needs from a synthetic scene.
pub fn noise_texture(width: usize, height: usize, seed: u64) -> Vec<f32> {
    let a = value_noise(width, height, 6, seed);
    let b = value_noise(width, height, 14, seed ^ 0xABCD);
    let c = value_noise(width, height, 30, seed ^ 0x1234);
    a.iter()
        .zip(&b)
        .zip(&c)
        .map(|((&a, &b), &c)| (0.45 * a + 0.35 * b + 0.2 * c).clamp(0.0, 1.0))
        .collect()
}

pub fn gray_texture(width: usize, height: usize, seed: u64) -> GrayImage {
    GrayImage::new(width, height, noise_texture(width, height, seed)).unwrap()
}

/// Grayscale texture lifted to color with mild channel offsets.
pub fn color_texture(width: usize, height: usize, seed: u64) -> ColorImage {
    let luma = noise_texture(width, height, seed);
    let data: Vec<[f32; 3]> = luma
        .iter()
        .map(|&v| {
            [
                v,
                (v * 0.9 + 0.05).clamp(0.0, 1.0),
                (v * 1.1 - 0.02).clamp(0.0, 1.0),
            ]
        })
        .collect();
    ColorImage::new(width, height, data)
}

/// Rectangular crop of a color image.
pub fn crop_color(img: &ColorImage, x0: usize, y0: usize, w: usize, h: usize) -> ColorImage {
    let mut data = Vec::with_capacity(w * h);
    for y in y0..y0 + h {
        for x in x0..x0 + w {
            data.push(img.pixel(x, y));
        }
    }
    ColorImage::new(w, h, data)
}

/// Minimal structural GeoJSON validator, independent of the exporters.
///
/// Checks RFC 7946 shape: FeatureCollection/features, per-feature type and
/// geometry, known geometry types, numeric finite positions with longitude
/// in [-180, 180] and latitude in [-90, 90].
pub fn validate_geojson(bytes: &[u8]) -> Result<(), String> {
    let doc: serde_json::Value =
        serde_json::from_slice(bytes).map_err(|e| format!("not JSON: {e}"))?;
    let obj = doc.as_object().ok_or("root is not an object")?;
    if obj.get("type").and_then(|t| t.as_str()) != Some("FeatureCollection") {
        return Err("root type is not FeatureCollection".into());
    }
    let features = obj
        .get("features")
        .and_then(|f| f.as_array())
        .ok_or("features missing or not an array")?;
    for (i, feature) in features.iter().enumerate() {
        let fo = feature
            .as_object()
            .ok_or_else(|| format!("feature {i} is not an object"))?;
        if fo.get("type").and_then(|t| t.as_str()) != Some("Feature") {
            return Err(format!("feature {i} type is not Feature"));
        }
        if !fo.contains_key("properties") {
            return Err(format!("feature {i} lacks properties"));
        }
        let geometry = fo
            .get("geometry")
            .and_then(|g| g.as_object())
            .ok_or_else(|| format!("feature {i} lacks geometry"))?;
        let gtype = geometry
            .get("type")
            .and_then(|t| t.as_str())
            .ok_or_else(|| format!("feature {i} geometry lacks type"))?;
        let coords = geometry
            .get("coordinates")
            .ok_or_else(|| format!("feature {i} lacks coordinates"))?;
        match gtype {
            "Point" => {
                validate_position(coords).map_err(|e| format!("feature {i}: {e}"))?;
            }
            "LineString" => {
                let positions = coords
                    .as_array()
                    .ok_or_else(|| format!("feature {i}: coordinates not an array"))?;
                if positions.len() < 2 {
                    return Err(format!("feature {i}: LineString with < 2 positions"));
                }
                for p in positions {
                    validate_position(p).map_err(|e| format!("feature {i}: {e}"))?;
                }
            }
            other => return Err(format!("feature {i}: unsupported geometry {other}")),
        }
    }
    Ok(())
}

fn validate_position(value: &serde_json::Value) -> Result<(), String> {
    let pos = value.as_array().ok_or("position is not an array")?;
    if pos.len() < 2 {
        return Err("position has fewer than 2 numbers".into());
    }
    let lon = pos[0].as_f64().ok_or("longitude not a number")?;
    let lat = pos[1].as_f64().ok_or("latitude not a number")?;
    if !lon.is_finite() || !(-180.0..=180.0).contains(&lon) {
        return Err(format!("longitude {lon} out of range"));
    }
    if !lat.is_finite() || !(-90.0..=90.0).contains(&lat) {
        return Err(format!("latitude {lat} out of range"));
    }
    Ok(())
}

// ───────────────────────── seqmatch oracle harness ──────────────────────────

use std::collections::BTreeMap;

use wayfinder_core::geomath::{haversine_distance, GeoCoordinate};
use wayfinder_core::roadnet::{EdgeId, IntersectionNode, JunctionType, NodeId, RoadNetwork, RoadSegment};
use wayfinder_core::seqmatch::MatchConfig;

/// Build a random connected-ish labeled graph with up to `max_nodes` nodes.
/// Types are drawn from the matchable palette; geometry is synthetic but
/// consistent (positions near a city-block scale, polylines of 2 points).
pub fn random_labeled_graph(rng: &mut Lcg, max_nodes: usize) -> RoadNetwork {
    let n = 2 + rng.next_usize(max_nodes.saturating_sub(1).max(1));
    let palette = [
        JunctionType::T,
        JunctionType::X,
        JunctionType::Y,
        JunctionType::Roundabout,
        JunctionType::Crossroad,
    ];
    let mut nodes = BTreeMap::new();
    let mut positions = Vec::with_capacity(n);
    for i in 0..n {
        let lat = 0.001 * rng.next_f32() as f64 * 10.0;
        let lon = 0.001 * rng.next_f32() as f64 * 10.0;
        let position = GeoCoordinate::new(lat, lon).unwrap();
        positions.push(position);
        // bias toward a small palette so sequences actually match
        let t = if rng.next_usize(10) < 7 {
            palette[rng.next_usize(3)]
        } else {
            palette[rng.next_usize(palette.len())]
        };
        nodes.insert(
            NodeId(i as u64),
            IntersectionNode {
                id: NodeId(i as u64),
                position,
                incident_edges: Vec::new(),
                junction_type: t,
                approach_bearings: Vec::new(),
            },
        );
    }

    let mut edges = BTreeMap::new();
    let edge_target = n + rng.next_usize(n.max(1));
    let mut next_edge = 0u64;
    // a spanning chain keeps most of the graph reachable
    for i in 1..n {
        add_edge(&mut edges, &mut next_edge, i - 1, i, &positions);
    }
    for _ in 0..edge_target {
        let a = rng.next_usize(n);
        let b = rng.next_usize(n);
        if a == b {
            continue;
        }
        add_edge(&mut edges, &mut next_edge, a, b, &positions);
    }

    let mut adjacency: BTreeMap<NodeId, Vec<(NodeId, EdgeId)>> =
        nodes.keys().map(|&id| (id, Vec::new())).collect();
    for edge in edges.values() {
        let (a, b) = edge.endpoints;
        adjacency.get_mut(&a).unwrap().push((b, edge.id));
        if a != b {
            adjacency.get_mut(&b).unwrap().push((a, edge.id));
        }
    }
    for (id, list) in adjacency.iter_mut() {
        list.sort_unstable();
        let incident: Vec<EdgeId> = list.iter().map(|&(_, e)| e).collect();
        nodes.get_mut(id).unwrap().incident_edges = incident;
    }
    RoadNetwork {
        nodes,
        edges,
        adjacency,
    }
}

fn add_edge(
    edges: &mut BTreeMap<EdgeId, RoadSegment>,
    next_edge: &mut u64,
    a: usize,
    b: usize,
    positions: &[GeoCoordinate],
) {
    let id = EdgeId(*next_edge);
    *next_edge += 1;
    let pa = positions[a];
    let pb = positions[b];
    edges.insert(
        id,
        RoadSegment {
            id,
            endpoints: (NodeId(a as u64), NodeId(b as u64)),
            polyline: vec![pa, pb],
            length: haversine_distance(pa, pb).max(1.0),
            road_class: "residential".into(),
        },
    );
}

/// A type-consistent walk: node ids plus traversed edge ids.
pub type Walk = (Vec<NodeId>, Vec<EdgeId>);

/// Exhaustively enumerate every type-consistent walk realizing `wanted`,
/// independent of the search implementation (plain recursive expansion over
/// the raw edge table, unordered).
pub fn enumerate_walks(
    net: &RoadNetwork,
    wanted: &[JunctionType],
    allow_revisit: bool,
) -> Vec<Walk> {
    let mut out = Vec::new();
    for node in net.nodes.values() {
        if node.junction_type == wanted[0] {
            let mut nodes = vec![node.id];
            let mut edges = Vec::new();
            extend_walks(net, wanted, allow_revisit, &mut nodes, &mut edges, &mut out);
        }
    }
    out
}

fn extend_walks(
    net: &RoadNetwork,
    wanted: &[JunctionType],
    allow_revisit: bool,
    nodes: &mut Vec<NodeId>,
    edges: &mut Vec<EdgeId>,
    out: &mut Vec<Walk>,
) {
    if nodes.len() == wanted.len() {
        out.push((nodes.clone(), edges.clone()));
        return;
    }
    let here = *nodes.last().unwrap();
    let depth = nodes.len();
    // raw edge-table iteration, not the adjacency lists the matcher uses
    for edge in net.edges.values() {
        let (a, b) = edge.endpoints;
        let next = if a == here {
            b
        } else if b == here {
            a
        } else {
            continue;
        };
        if !allow_revisit && nodes.contains(&next) {
            continue;
        }
        if net.nodes[&next].junction_type != wanted[depth] {
            continue;
        }
        nodes.push(next);
        edges.push(edge.id);
        extend_walks(net, wanted, allow_revisit, nodes, edges, out);
        nodes.pop();
        edges.pop();
    }
}

/// Lexicographic key the deterministic DFS minimizes: the interleaved
/// `(node, edge)` choice sequence.
pub fn walk_key(walk: &Walk) -> Vec<(NodeId, EdgeId)> {
    walk.0[1..]
        .iter()
        .copied()
        .zip(walk.1.iter().copied())
        .collect()
}

/// The walk the deterministic first-path DFS must return per start node:
/// the minimal one under [`walk_key`].
pub fn expected_first_walks(walks: &[Walk]) -> BTreeMap<NodeId, Walk> {
    let mut best: BTreeMap<NodeId, Walk> = BTreeMap::new();
    for walk in walks {
        let start = walk.0[0];
        match best.get(&start) {
            Some(current) if walk_key(current) <= walk_key(walk) => {}
            _ => {
                best.insert(start, walk.clone());
            }
        }
    }
    best
}

/// Start nodes ordered the way `find_start_candidates` must order them.
pub fn expected_start_order(
    net: &RoadNetwork,
    cfg: &MatchConfig,
    first: JunctionType,
) -> Vec<NodeId> {
    let mut starts: Vec<(u64, NodeId)> = net
        .nodes
        .values()
        .filter(|node| node.junction_type == first)
        .map(|node| {
            (
                haversine_distance(cfg.start, node.position).to_bits(),
                node.id,
            )
        })
        .filter(|&(bits, _)| f64::from_bits(bits) <= cfg.radius)
        .collect();
    starts.sort_unstable();
    starts.into_iter().map(|(_, id)| id).collect()
}
