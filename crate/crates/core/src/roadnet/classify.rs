//! Junction typing from approach bearings.

use super::JunctionType;
use crate::geomath::angle_between_bearings;

/// A three-way node is a T when some bearing pair separates by at least
/// `180 - tol` degrees; below three or above four incidences the degree
/// decides on its own.
pub const DEFAULT_COLLINEAR_TOL_DEG: f64 = 20.0;

/// Classify a node from its approach bearings with the default collinearity
/// tolerance.
///
/// Bearings must be non-empty. Degree 1 is an endpoint, degree 2 a
/// pass-through. Degree 3 is a T when exactly one bearing pair is collinear,
/// otherwise a Y. Degree 4 is an X when the bearings split into two disjoint
/// collinear pairs, otherwise a crossroad, as is any higher degree.
/// Roundabouts are never produced here; they come from cycle evidence in
/// [`detect_roundabouts`](super::detect_roundabouts).
pub fn classify_junction(approach_bearings: &[f64]) -> JunctionType {
    classify_junction_with_tolerance(approach_bearings, DEFAULT_COLLINEAR_TOL_DEG)
}

pub fn classify_junction_with_tolerance(approach_bearings: &[f64], collinear_tol: f64) -> JunctionType {
    assert!(
        !approach_bearings.is_empty(),
        "classify_junction requires at least one bearing"
    );
    let collinear = |a: f64, b: f64| angle_between_bearings(a, b) >= 180.0 - collinear_tol;
    let b = approach_bearings;
    match b.len() {
        1 => JunctionType::Endpoint,
        2 => JunctionType::PassThrough,
        3 => {
            let pairs = [(0, 1), (0, 2), (1, 2)];
            let count = pairs
                .iter()
                .filter(|&&(i, j)| collinear(b[i], b[j]))
                .count();
            if count == 1 {
                JunctionType::T
            } else {
                JunctionType::Y
            }
        }
        4 => {
            // the three perfect matchings of four bearings
            let matchings = [[(0, 1), (2, 3)], [(0, 2), (1, 3)], [(0, 3), (1, 2)]];
            let is_x = matchings.iter().any(|pairs| {
                pairs
                    .iter()
                    .all(|&(i, j)| collinear(b[i], b[j]))
            });
            if is_x {
                JunctionType::X
            } else {
                JunctionType::Crossroad
            }
        }
        _ => JunctionType::Crossroad,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn canonical_shapes() {
        assert_eq!(classify_junction(&[0.0, 90.0, 180.0, 270.0]), JunctionType::X);
        assert_eq!(classify_junction(&[0.0, 120.0, 240.0]), JunctionType::Y);
        assert_eq!(classify_junction(&[0.0, 90.0, 180.0]), JunctionType::T);
        assert_eq!(classify_junction(&[45.0]), JunctionType::Endpoint);
        assert_eq!(classify_junction(&[10.0, 200.0]), JunctionType::PassThrough);
        assert_eq!(
            classify_junction(&[0.0, 72.0, 144.0, 216.0, 288.0]),
            JunctionType::Crossroad
        );
    }

    #[test]
    fn skewed_crossroad_is_not_an_x() {
        // no pairing yields two collinear pairs
        assert_eq!(
            classify_junction(&[0.0, 70.0, 150.0, 220.0]),
            JunctionType::Crossroad
        );
    }

    #[test]
    fn tolerance_boundary() {
        // separation exactly 160 with tol 20 counts as collinear
        assert_eq!(classify_junction(&[0.0, 90.0, 160.0]), JunctionType::T);
        assert_eq!(classify_junction(&[0.0, 90.0, 159.0]), JunctionType::Y);
        assert_eq!(
            classify_junction_with_tolerance(&[0.0, 90.0, 159.0], 21.5),
            JunctionType::T
        );
    }

    proptest! {
        #[test]
        fn invariant_under_permutation(
            mut bearings in proptest::collection::vec(0.0f64..360.0, 1..6),
            seed in 0u64..1000,
        ) {
            let base = classify_junction(&bearings);
            // deterministic shuffle driven by the seed
            let n = bearings.len();
            let mut state = seed;
            for i in (1..n).rev() {
                state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                let j = (state >> 33) as usize % (i + 1);
                bearings.swap(i, j);
            }
            prop_assert_eq!(classify_junction(&bearings), base);
        }

        #[test]
        fn invariant_under_rotation(
            bearings in proptest::collection::vec(0.0f64..360.0, 1..6),
            rotation in 0.0f64..360.0,
        ) {
            let base = classify_junction(&bearings);
            let rotated: Vec<f64> = bearings
                .iter()
                .map(|b| (b + rotation).rem_euclid(360.0))
                .collect();
            prop_assert_eq!(classify_junction(&rotated), base);
        }
    }
}
