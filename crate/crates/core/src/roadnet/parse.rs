//! GeoJSON road ingestion.

use serde_json::Value;

use super::{RoadFeature, RoadnetError};
use crate::geomath::GeoCoordinate;

/// Result of parsing a road document: the usable line-string features plus
/// counts of everything that was skipped.
#[derive(Debug, Default)]
pub struct ParsedRoads {
    pub features: Vec<RoadFeature>,
    /// Features whose geometry is not a (Multi)LineString.
    pub skipped_non_road: usize,
    /// Line strings dropped for having fewer than 2 distinct points or
    /// malformed positions.
    pub skipped_invalid: usize,
}

/// Parse a GeoJSON `FeatureCollection` into road features.
///
/// `MultiLineString` geometries are split into one feature per part.
/// GeoJSON stores positions as `[lon, lat]`; they are swapped into
/// [`GeoCoordinate`] here. Bad individual features are skipped and counted,
/// only a document-level problem is fatal.
pub fn parse_geojson_roads(document: &[u8]) -> Result<ParsedRoads, RoadnetError> {
    let doc: Value = serde_json::from_slice(document)
        .map_err(|e| RoadnetError::MalformedDocument(e.to_string()))?;
    if doc.get("type").and_then(Value::as_str) != Some("FeatureCollection") {
        return Err(RoadnetError::MalformedDocument(
            "root object is not a FeatureCollection".into(),
        ));
    }
    let features = doc
        .get("features")
        .and_then(Value::as_array)
        .ok_or_else(|| RoadnetError::MalformedDocument("missing features array".into()))?;

    let mut out = ParsedRoads::default();
    for (index, feature) in features.iter().enumerate() {
        let id = feature_id(feature, index);
        let props = feature.get("properties");
        let road_class = road_class(props);
        let name = props
            .and_then(|p| p.get("name"))
            .and_then(Value::as_str)
            .map(str::to_owned);
        let Some(geometry) = feature.get("geometry").filter(|g| g.is_object()) else {
            out.skipped_non_road += 1;
            continue;
        };
        match geometry.get("type").and_then(Value::as_str) {
            Some("LineString") => {
                let coords = geometry.get("coordinates").and_then(Value::as_array);
                push_line(&mut out, coords, id, &road_class, &name);
            }
            Some("MultiLineString") => {
                match geometry.get("coordinates").and_then(Value::as_array) {
                    Some(parts) => {
                        for (part_index, part) in parts.iter().enumerate() {
                            let part_id = format!("{id}#part{part_index}");
                            push_line(&mut out, part.as_array(), part_id, &road_class, &name);
                        }
                    }
                    None => out.skipped_invalid += 1,
                }
            }
            _ => out.skipped_non_road += 1,
        }
    }
    Ok(out)
}

fn feature_id(feature: &Value, index: usize) -> String {
    let explicit = feature.get("id").or_else(|| {
        feature
            .get("properties")
            .and_then(|p| p.get("id").or_else(|| p.get("@id")))
    });
    match explicit {
        Some(Value::String(s)) => s.clone(),
        Some(Value::Number(n)) => n.to_string(),
        _ => format!("feature-{index}"),
    }
}

fn road_class(props: Option<&Value>) -> String {
    let get = |key: &str| props.and_then(|p| p.get(key)).and_then(Value::as_str);
    if get("junction") == Some("roundabout") {
        return "roundabout".into();
    }
    get("highway")
        .or_else(|| get("road_class"))
        .unwrap_or("unclassified")
        .to_owned()
}

fn push_line(
    out: &mut ParsedRoads,
    coords: Option<&Vec<Value>>,
    id: String,
    road_class: &str,
    name: &Option<String>,
) {
    let Some(coords) = coords else {
        out.skipped_invalid += 1;
        return;
    };
    let mut geometry: Vec<GeoCoordinate> = Vec::with_capacity(coords.len());
    for position in coords {
        let Some(coordinate) = parse_position(position) else {
            out.skipped_invalid += 1;
            return;
        };
        // drop consecutive duplicates
        if geometry.last() != Some(&coordinate) {
            geometry.push(coordinate);
        }
    }
    if geometry.len() < 2 {
        out.skipped_invalid += 1;
        return;
    }
    out.features.push(RoadFeature {
        id,
        geometry,
        road_class: road_class.to_owned(),
        name: name.clone(),
    });
}

fn parse_position(position: &Value) -> Option<GeoCoordinate> {
    let parts = position.as_array()?;
    if parts.len() < 2 {
        return None;
    }
    let lon = parts[0].as_f64()?;
    let lat = parts[1].as_f64()?;
    GeoCoordinate::new(lat, lon).ok()
}
