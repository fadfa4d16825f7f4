//! Exported documents validate against an independent GeoJSON checker.

mod common;

use common::validate_geojson;
use wayfinder_core::geomath::GeoCoordinate;
use wayfinder_core::roadnet::{
    build_graph, detect_roundabouts, export_annotated_geojson, parse_geojson_roads, RoadFeature,
};
use wayfinder_core::seqmatch::{export_path_geojson, match_sequence, JunctionSequence, MatchConfig};

fn feature(id: &str, points: &[(f64, f64)]) -> RoadFeature {
    RoadFeature {
        id: id.into(),
        geometry: points
            .iter()
            .map(|&(lat, lon)| GeoCoordinate::new(lat, lon).unwrap())
            .collect(),
        road_class: "residential".into(),
        name: None,
    }
}

fn sample_network() -> wayfinder_core::RoadNetwork {
    let features = vec![
        feature("main", &[(0.0, 0.0), (0.0, 0.01), (0.0, 0.02), (0.0, 0.03)]),
        feature("t", &[(0.0, 0.01), (0.01, 0.01)]),
        feature("x", &[(0.01, 0.02), (0.0, 0.02), (-0.01, 0.02)]),
        feature("y1", &[(0.0, 0.03), (0.01, 0.0364)]),
        feature("y2", &[(0.0, 0.03), (-0.01, 0.0364)]),
    ];
    detect_roundabouts(build_graph(&features, 0.5), 120.0)
}

#[test]
fn annotated_export_passes_independent_validation() {
    let net = sample_network();
    let out = export_annotated_geojson(&net);
    validate_geojson(&out).unwrap();
}

#[test]
fn annotated_export_round_trips_through_the_parser() {
    let net = sample_network();
    let out = export_annotated_geojson(&net);
    // the road parser consumes the LineString features and skips Points
    let parsed = parse_geojson_roads(&out).unwrap();
    assert_eq!(parsed.features.len(), net.edges.len());
    assert_eq!(parsed.skipped_non_road, net.nodes.len());
    // rebuilding from the exported edges reproduces the graph shape
    let rebuilt = build_graph(&parsed.features, 0.5);
    assert_eq!(rebuilt.nodes.len(), net.nodes.len());
    assert_eq!(rebuilt.edges.len(), net.edges.len());
    let mut a: Vec<_> = net.nodes.values().map(|n| n.junction_type).collect();
    let mut b: Vec<_> = rebuilt.nodes.values().map(|n| n.junction_type).collect();
    a.sort();
    b.sort();
    assert_eq!(a, b);
}

#[test]
fn path_export_passes_independent_validation_and_keeps_order() {
    let net = sample_network();
    let seq = JunctionSequence::parse_text("T,X,Y").unwrap();
    let cfg = MatchConfig::new(GeoCoordinate::new(0.0, 0.01).unwrap()).with_radius(500.0);
    let path = match_sequence(&net, &seq, &cfg).unwrap().remove(0);
    let out = export_path_geojson(&net, &path);
    validate_geojson(&out).unwrap();

    let doc: serde_json::Value = serde_json::from_slice(&out).unwrap();
    let indices: Vec<u64> = doc["features"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|f| f["geometry"]["type"] == "Point")
        .map(|f| f["properties"]["sequence_index"].as_u64().unwrap())
        .collect();
    assert_eq!(indices, vec![0, 1, 2]);
}
