//! Shared fixtures for roadnet and seqmatch tests.

use super::RoadFeature;
use crate::geomath::GeoCoordinate;

pub(crate) fn coord(lat: f64, lon: f64) -> GeoCoordinate {
    GeoCoordinate::new(lat, lon).unwrap()
}

pub(crate) fn feature(id: &str, points: &[(f64, f64)]) -> RoadFeature {
    RoadFeature {
        id: id.into(),
        geometry: points.iter().map(|&(lat, lon)| coord(lat, lon)).collect(),
        road_class: "residential".into(),
        name: None,
    }
}

/// `h` horizontal and `v` vertical lines sharing a vertex at every crossing,
/// 0.001 degrees apart.
pub(crate) fn grid_features(h: usize, v: usize) -> Vec<RoadFeature> {
    let d = 0.001;
    let mut features = Vec::new();
    for i in 1..=h {
        let lat = i as f64 * d;
        let points: Vec<(f64, f64)> = (0..=v + 1).map(|j| (lat, j as f64 * d)).collect();
        features.push(feature(&format!("h{i}"), &points));
    }
    for j in 1..=v {
        let lon = j as f64 * d;
        let points: Vec<(f64, f64)> = (0..=h + 1).map(|i| (i as f64 * d, lon)).collect();
        features.push(feature(&format!("v{j}"), &points));
    }
    features
}

/// Two line strings crossing at one shared coordinate.
pub(crate) fn plus_sign_features() -> Vec<RoadFeature> {
    vec![
        feature("h", &[(0.0, -0.001), (0.0, 0.0), (0.0, 0.001)]),
        feature("v", &[(-0.001, 0.0), (0.0, 0.0), (0.001, 0.0)]),
    ]
}
