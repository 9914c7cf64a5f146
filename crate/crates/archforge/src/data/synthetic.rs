//! Fast synthetic 2-D binary task: points uniform on the unit square, labeled
//! 1 inside either of two fixed disjoint convex polygons.

use crate::error::Result;
use crate::numerics::{Matrix, Rng};

use super::dataset::Dataset;

/// Convex quadrilateral in the lower-left region.
pub const QUAD: [(f64, f64); 4] = [(0.05, 0.10), (0.45, 0.05), (0.50, 0.40), (0.10, 0.50)];

/// Convex pentagon in the upper-right region, disjoint from the quad.
pub const PENT: [(f64, f64); 5] = [
    (0.55, 0.50),
    (0.95, 0.55),
    (0.95, 0.90),
    (0.75, 0.98),
    (0.50, 0.85),
];

/// Point-in-convex-polygon test: inside iff the point lies on the same side of
/// every edge (counter-clockwise vertex order, boundary counts as inside).
pub fn inside_convex(polygon: &[(f64, f64)], x: f64, y: f64) -> bool {
    let n = polygon.len();
    for i in 0..n {
        let (x1, y1) = polygon[i];
        let (x2, y2) = polygon[(i + 1) % n];
        let cross = (x2 - x1) * (y - y1) - (y2 - y1) * (x - x1);
        if cross < 0.0 {
            return false;
        }
    }
    true
}

/// Shoelace area of a simple polygon.
pub fn polygon_area(polygon: &[(f64, f64)]) -> f64 {
    let n = polygon.len();
    let mut twice = 0.0;
    for i in 0..n {
        let (x1, y1) = polygon[i];
        let (x2, y2) = polygon[(i + 1) % n];
        twice += x1 * y2 - x2 * y1;
    }
    twice.abs() / 2.0
}

pub fn label_point(x: f64, y: f64) -> usize {
    usize::from(inside_convex(&QUAD, x, y) || inside_convex(&PENT, x, y))
}

/// Samples `n` points uniform on `[0,1]^2` with labels from the two polygons.
pub fn synthetic_polygons(n: usize, seed: u64) -> Result<Dataset> {
    assert!(n >= 1, "need at least one point");
    let mut rng = Rng::new(seed);
    let mut coords = Vec::with_capacity(n * 2);
    let mut labels = Vec::with_capacity(n);
    for _ in 0..n {
        let x = rng.next_f64();
        let y = rng.next_f64();
        coords.push(x);
        coords.push(y);
        labels.push(label_point(x, y));
    }
    Dataset::new(Matrix::from_vec(n, 2, coords), labels, 2)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn centroid(poly: &[(f64, f64)]) -> (f64, f64) {
        let n = poly.len() as f64;
        let (sx, sy) = poly
            .iter()
            .fold((0.0, 0.0), |(ax, ay), &(x, y)| (ax + x, ay + y));
        (sx / n, sy / n)
    }

    #[test]
    fn centroids_are_inside() {
        let (x, y) = centroid(&QUAD);
        assert_eq!(label_point(x, y), 1);
        let (x, y) = centroid(&PENT);
        assert_eq!(label_point(x, y), 1);
    }

    #[test]
    fn origin_is_outside() {
        assert_eq!(label_point(0.0, 0.0), 0);
    }

    #[test]
    fn polygons_are_disjoint() {
        // Each polygon's vertices and centroid are outside the other.
        for &(x, y) in QUAD.iter() {
            assert!(!inside_convex(&PENT, x, y));
        }
        for &(x, y) in PENT.iter() {
            assert!(!inside_convex(&QUAD, x, y));
        }
    }

    #[test]
    fn class_fraction_matches_area() {
        // Monte-Carlo class-1 fraction vs exact shoelace area, 3-sigma bound.
        let n = 20_000;
        let d = synthetic_polygons(n, 42).unwrap();
        let p = polygon_area(&QUAD) + polygon_area(&PENT);
        let frac = d.labels.iter().sum::<usize>() as f64 / n as f64;
        let sigma = (p * (1.0 - p) / n as f64).sqrt();
        assert!(
            (frac - p).abs() <= 3.0 * sigma,
            "frac {frac} vs area {p} (sigma {sigma})"
        );
    }

    #[test]
    fn seed_determinism() {
        let a = synthetic_polygons(100, 7).unwrap();
        let b = synthetic_polygons(100, 7).unwrap();
        assert_eq!(a.inputs.as_slice(), b.inputs.as_slice());
        assert_eq!(a.labels, b.labels);
    }
}
