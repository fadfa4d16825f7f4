//! Annotated GeoJSON emission for a built network.

use serde_json::{Map, Value};

use super::RoadNetwork;
use crate::geojson;

/// Export the network as a FeatureCollection: one Point per node carrying
/// `junction_type`, `degree` and a legend `color`, plus one LineString per
/// edge. Features are ordered by id, so output is byte-stable.
pub fn export_annotated_geojson(net: &RoadNetwork) -> Vec<u8> {
    let mut features = Vec::with_capacity(net.nodes.len() + net.edges.len());
    for node in net.nodes.values() {
        let mut props = Map::new();
        props.insert("node_id".into(), Value::from(node.id.0));
        props.insert("junction_type".into(), Value::from(node.junction_type.name()));
        props.insert("degree".into(), Value::from(node.degree() as u64));
        props.insert("color".into(), Value::from(node.junction_type.color()));
        features.push(geojson::point_feature(node.position, props));
    }
    for edge in net.edges.values() {
        let mut props = Map::new();
        props.insert("edge_id".into(), Value::from(edge.id.0));
        props.insert("road_class".into(), Value::from(edge.road_class.clone()));
        props.insert("length_m".into(), Value::from(edge.length));
        features.push(geojson::linestring_feature(&edge.polyline, props));
    }
    geojson::to_bytes(&geojson::feature_collection(features))
}
