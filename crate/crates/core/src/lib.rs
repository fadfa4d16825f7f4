//! Offline visual geo-localization toolkit.
//!
//! Two independent localization routes share this crate:
//!
//! 1. **Place recognition** — SIFT keypoints and descriptors ([`features`]),
//!    stitched panoramic place databases ([`stitcher`], [`matching`]) and a
//!    ratio-test voting scheme that picks the best-matching place for a set
//!    of query photos.
//! 2. **Junction-sequence map matching** — a road-network graph built from
//!    GeoJSON line strings ([`roadnet`]) and a depth-first matcher that
//!    locates an observed sequence of junction types on that graph
//!    ([`seqmatch`]).
//!
//! Supporting modules: geodesic primitives ([`geomath`]), segmentation-mask
//! coverage filtering ([`segfilter`]), classifier evaluation arithmetic
//! ([`clseval`]) and codec-free PGM/PPM image I/O ([`imgio`]).

pub mod clseval;
pub mod features;
pub mod geomath;
pub mod imgio;
pub mod matching;
pub mod roadnet;
pub mod segfilter;
pub mod seqmatch;
pub mod stitcher;

pub(crate) mod geojson;

pub use geomath::GeoCoordinate;
pub use roadnet::{JunctionType, RoadNetwork};
pub use seqmatch::{JunctionSequence, MatchConfig, PathCandidate};
