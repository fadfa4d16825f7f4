//! Geodesic primitives on a spherical Earth.
//!
//! All distances use the haversine formula on a sphere of radius
//! [`EARTH_RADIUS_M`]. Angles cross the API boundary in degrees; radians are
//! internal only.

use thiserror::Error;

/// Mean Earth radius in meters.
pub const EARTH_RADIUS_M: f64 = 6_371_000.0;

#[derive(Debug, Error, PartialEq)]
pub enum GeoError {
    #[error("latitude {0} outside [-90, 90]")]
    InvalidLatitude(f64),
    #[error("coordinate component is not finite")]
    NotFinite,
    #[error("bearing is undefined for coincident points")]
    CoincidentPoints,
}

/// A WGS84 latitude/longitude pair in degrees.
///
/// Latitude is restricted to `[-90, 90]`; longitude is normalized into
/// `(-180, 180]` on construction.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct GeoCoordinate {
    lat: f64,
    lon: f64,
}

impl GeoCoordinate {
    pub fn new(lat: f64, lon: f64) -> Result<Self, GeoError> {
        if !lat.is_finite() || !lon.is_finite() {
            return Err(GeoError::NotFinite);
        }
        if !(-90.0..=90.0).contains(&lat) {
            return Err(GeoError::InvalidLatitude(lat));
        }
        Ok(Self {
            lat,
            lon: normalize_lon(lon),
        })
    }

    pub fn lat(&self) -> f64 {
        self.lat
    }

    pub fn lon(&self) -> f64 {
        self.lon
    }
}

/// Normalize a longitude in degrees into `(-180, 180]`.
///
/// In-range values pass through bit-exact; shifting by 180 and back would
/// otherwise perturb them by a rounding step.
fn normalize_lon(lon: f64) -> f64 {
    if lon > -180.0 && lon <= 180.0 {
        return lon;
    }
    let mut l = (lon + 180.0).rem_euclid(360.0);
    if l == 0.0 {
        l = 360.0; // rem_euclid maps 180 and -180 to 0; keep +180
    }
    l - 180.0
}

/// Great-circle distance in meters between two coordinates.
///
/// Exactly symmetric in its arguments: the formula only consumes
/// `|lat1 - lat2|`, `|lon1 - lon2|` and the commutative product of the
/// cosines.
pub fn haversine_distance(a: GeoCoordinate, b: GeoCoordinate) -> f64 {
    let dlat = (a.lat - b.lat).abs().to_radians();
    let dlon = (a.lon - b.lon).abs().to_radians();
    let half_dlat = (dlat / 2.0).sin();
    let half_dlon = (dlon / 2.0).sin();
    let h = half_dlat * half_dlat
        + a.lat.to_radians().cos() * b.lat.to_radians().cos() * half_dlon * half_dlon;
    2.0 * EARTH_RADIUS_M * h.sqrt().min(1.0).asin()
}

/// Forward azimuth from `from` toward `to`, clockwise from north, in
/// degrees `[0, 360)`.
pub fn initial_bearing(from: GeoCoordinate, to: GeoCoordinate) -> Result<f64, GeoError> {
    if from == to {
        return Err(GeoError::CoincidentPoints);
    }
    let lat1 = from.lat.to_radians();
    let lat2 = to.lat.to_radians();
    let dlon = (to.lon - from.lon).to_radians();
    let y = dlon.sin() * lat2.cos();
    let x = lat1.cos() * lat2.sin() - lat1.sin() * lat2.cos() * dlon.cos();
    Ok(y.atan2(x).to_degrees().rem_euclid(360.0))
}

/// Smallest angular separation between two bearings, in degrees `[0, 180]`.
pub fn angle_between_bearings(b1: f64, b2: f64) -> f64 {
    let d = (b1 - b2).rem_euclid(360.0);
    d.min(360.0 - d)
}
