//! Deterministic fixtures shared by the benchmark targets.

use wayfinder_core::features::GrayImage;
use wayfinder_core::geomath::GeoCoordinate;
use wayfinder_core::roadnet::{build_graph, detect_roundabouts, RoadFeature, RoadNetwork};

pub struct Lcg(pub u64);

impl Lcg {
    pub fn next_f32(&mut self) -> f32 {
        self.0 = self
            .0
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        ((self.0 >> 33) as f64 / (1u64 << 31) as f64) as f32
    }

    pub fn next_f64(&mut self) -> f64 {
        self.next_f32() as f64
    }
}

/// Multi-octave value noise image, the same flavor the tests use.
pub fn noise_image(width: usize, height: usize, seed: u64) -> GrayImage {
    let layer = |cell: usize, seed: u64| -> Vec<f32> {
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
    };
    let a = layer(6, seed);
    let b = layer(14, seed ^ 0xABCD);
    let c = layer(30, seed ^ 0x1234);
    let data = a
        .iter()
        .zip(&b)
        .zip(&c)
        .map(|((&a, &b), &c)| (0.45 * a + 0.35 * b + 0.2 * c).clamp(0.0, 1.0))
        .collect();
    GrayImage::new(width, height, data).unwrap()
}

/// `h x v` street grid as a built road network.
pub fn grid_network(h: usize, v: usize) -> RoadNetwork {
    let d = 0.001;
    let coord = |lat: f64, lon: f64| GeoCoordinate::new(lat, lon).unwrap();
    let mut features = Vec::new();
    for i in 1..=h {
        let geometry: Vec<GeoCoordinate> =
            (0..=v + 1).map(|j| coord(i as f64 * d, j as f64 * d)).collect();
        features.push(RoadFeature {
            id: format!("h{i}"),
            geometry,
            road_class: "residential".into(),
            name: None,
        });
    }
    for j in 1..=v {
        let geometry: Vec<GeoCoordinate> =
            (0..=h + 1).map(|i| coord(i as f64 * d, j as f64 * d)).collect();
        features.push(RoadFeature {
            id: format!("v{j}"),
            geometry,
            road_class: "residential".into(),
            name: None,
        });
    }
    detect_roundabouts(build_graph(&features, 0.5), 120.0)
}
