//! Planar homography and its normalized DLT estimator.

use nalgebra::{Matrix3, Point2, SMatrix, Vector3};

use super::StitchError;

/// `(source point, target point)` pixel pair.
pub type Correspondence = (Point2<f64>, Point2<f64>);

/// 3x3 projective transform, normalized so the bottom-right element is 1.
#[derive(Debug, Clone, PartialEq)]
pub struct Homography {
    m: Matrix3<f64>,
}

impl Homography {
    /// Normalize and verify invertibility.
    pub fn new(m: Matrix3<f64>) -> Result<Self, StitchError> {
        let h22 = m[(2, 2)];
        if h22.abs() < 1e-12 {
            return Err(StitchError::DegenerateConfiguration(
                "homography cannot be normalized (h33 ~ 0)".into(),
            ));
        }
        let m = m / h22;
        if m.determinant().abs() < 1e-12 {
            return Err(StitchError::DegenerateConfiguration(
                "homography is singular".into(),
            ));
        }
        Ok(Self { m })
    }

    pub fn identity() -> Self {
        Self {
            m: Matrix3::identity(),
        }
    }

    pub fn matrix(&self) -> &Matrix3<f64> {
        &self.m
    }

    /// Apply to a point, performing the projective division.
    pub fn apply(&self, x: f64, y: f64) -> (f64, f64) {
        let v = self.m * Vector3::new(x, y, 1.0);
        (v.x / v.z, v.y / v.z)
    }

    pub fn inverse(&self) -> Result<Homography, StitchError> {
        let inv = self.m.try_inverse().ok_or_else(|| {
            StitchError::DegenerateConfiguration("homography is singular".into())
        })?;
        Homography::new(inv)
    }

    /// `self.compose(other)` applies `other` first.
    pub fn compose(&self, other: &Homography) -> Homography {
        // product of invertible matrices normalizes unless h33 vanishes,
        // which cannot happen for the near-affine chains built here
        Homography::new(self.m * other.m).expect("composition stays invertible")
    }

    /// Forward reprojection error in pixels.
    pub fn reprojection_error(&self, pair: &Correspondence) -> f64 {
        let (x, y) = self.apply(pair.0.x, pair.0.y);
        ((x - pair.1.x).powi(2) + (y - pair.1.y).powi(2)).sqrt()
    }
}

/// Least-squares homography via the normalized direct linear transform.
///
/// Needs at least 4 pairs in general position; collinear or coincident
/// configurations are rejected.
pub fn estimate_homography_dlt(pairs: &[Correspondence]) -> Result<Homography, StitchError> {
    if pairs.len() < 4 {
        return Err(StitchError::DegenerateConfiguration(format!(
            "{} correspondence pairs, need at least 4",
            pairs.len()
        )));
    }
    let src_norm = Normalizer::fit(pairs.iter().map(|p| p.0))?;
    let dst_norm = Normalizer::fit(pairs.iter().map(|p| p.1))?;

    // accumulate A^T A directly; its null space carries the solution
    let mut ata = SMatrix::<f64, 9, 9>::zeros();
    for (s, d) in pairs {
        let (x, y) = src_norm.apply(s);
        let (u, v) = dst_norm.apply(d);
        let row1 = [-x, -y, -1.0, 0.0, 0.0, 0.0, u * x, u * y, u];
        let row2 = [0.0, 0.0, 0.0, -x, -y, -1.0, v * x, v * y, v];
        for row in [row1, row2] {
            for i in 0..9 {
                for j in 0..9 {
                    ata[(i, j)] += row[i] * row[j];
                }
            }
        }
    }

    let eigen = ata.symmetric_eigen();
    let mut order: Vec<usize> = (0..9).collect();
    order.sort_by(|&a, &b| eigen.eigenvalues[a].total_cmp(&eigen.eigenvalues[b]));
    let smallest = order[0];
    let second = order[1];
    let largest = order[8];
    // a second near-zero eigenvalue means the solution is not unique
    // (collinear or repeated points)
    if eigen.eigenvalues[second].abs() <= 1e-12 * eigen.eigenvalues[largest].abs().max(1e-12) {
        return Err(StitchError::DegenerateConfiguration(
            "correspondences are rank-deficient (collinear or repeated points)".into(),
        ));
    }
    let h = eigen.eigenvectors.column(smallest);
    let normalized = Matrix3::new(h[0], h[1], h[2], h[3], h[4], h[5], h[6], h[7], h[8]);
    let denormalized = dst_norm.inverse_matrix() * normalized * src_norm.matrix();
    Homography::new(denormalized)
}

/// Hartley normalization: centroid to origin, mean distance sqrt(2).
struct Normalizer {
    scale: f64,
    cx: f64,
    cy: f64,
}

impl Normalizer {
    fn fit(points: impl Iterator<Item = Point2<f64>> + Clone) -> Result<Self, StitchError> {
        let mut n = 0usize;
        let (mut cx, mut cy) = (0.0, 0.0);
        for p in points.clone() {
            cx += p.x;
            cy += p.y;
            n += 1;
        }
        let n_f = n as f64;
        cx /= n_f;
        cy /= n_f;
        let mean_dist: f64 =
            points.map(|p| ((p.x - cx).powi(2) + (p.y - cy).powi(2)).sqrt()).sum::<f64>() / n_f;
        if mean_dist < 1e-12 {
            return Err(StitchError::DegenerateConfiguration(
                "correspondence points are coincident".into(),
            ));
        }
        Ok(Self {
            scale: std::f64::consts::SQRT_2 / mean_dist,
            cx,
            cy,
        })
    }

    fn apply(&self, p: &Point2<f64>) -> (f64, f64) {
        ((p.x - self.cx) * self.scale, (p.y - self.cy) * self.scale)
    }

    fn matrix(&self) -> Matrix3<f64> {
        Matrix3::new(
            self.scale,
            0.0,
            -self.scale * self.cx,
            0.0,
            self.scale,
            -self.scale * self.cy,
            0.0,
            0.0,
            1.0,
        )
    }

    fn inverse_matrix(&self) -> Matrix3<f64> {
        Matrix3::new(
            1.0 / self.scale,
            0.0,
            self.cx,
            0.0,
            1.0 / self.scale,
            self.cy,
            0.0,
            0.0,
            1.0,
        )
    }
}
