//! Small builders for RFC 7946 output documents.
//!
//! Coordinates in GeoJSON are ordered `[lon, lat]`; every builder here takes
//! [`GeoCoordinate`] values and performs the swap in one place.

use serde_json::{json, Map, Value};

use crate::geomath::GeoCoordinate;

pub(crate) fn position(c: GeoCoordinate) -> Value {
    json!([c.lon(), c.lat()])
}

pub(crate) fn point_feature(c: GeoCoordinate, properties: Map<String, Value>) -> Value {
    json!({
        "type": "Feature",
        "geometry": { "type": "Point", "coordinates": position(c) },
        "properties": Value::Object(properties),
    })
}

pub(crate) fn linestring_feature(coords: &[GeoCoordinate], properties: Map<String, Value>) -> Value {
    let positions: Vec<Value> = coords.iter().map(|&c| position(c)).collect();
    json!({
        "type": "Feature",
        "geometry": { "type": "LineString", "coordinates": positions },
        "properties": Value::Object(properties),
    })
}

pub(crate) fn feature_collection(features: Vec<Value>) -> Value {
    json!({ "type": "FeatureCollection", "features": features })
}

/// Serialize with a trailing newline; all exported documents share this.
pub(crate) fn to_bytes(doc: &Value) -> Vec<u8> {
    let mut out = serde_json::to_vec_pretty(doc).expect("geojson value serializes");
    out.push(b'\n');
    out
}
