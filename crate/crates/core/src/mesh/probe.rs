// Float math is inherent only on recent toolchains.
#[allow(unused_imports)]
use num_traits::Float;

use super::{signed_area, Mesh};
use crate::{Error, Point, Result};

/// Points closer than this to the domain still count as inside.
const INSIDE_TOLERANCE_M: f64 = 1e-10;

/// A point pinned to its containing triangle.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProbeLocation {
    pub point: Point,
    pub element: usize,
    /// Nonnegative weights of the triangle's vertices, summing to one.
    pub barycentric: [f64; 3],
}

impl ProbeLocation {
    /// Linear interpolation of a nodal field at the probe.
    pub fn interpolate(&self, mesh: &Mesh, field: &[f64]) -> f64 {
        let tri = mesh.elements()[self.element];
        self.barycentric
            .iter()
            .zip(tri)
            .map(|(w, v)| w * field[v])
            .sum()
    }
}

/// Finds the triangle containing `point` and its barycentric coordinates.
///
/// Among several candidates (points on shared edges or nodes) the one whose
/// smallest coordinate is largest wins, ties going to the lowest index.
pub fn locate_probe(mesh: &Mesh, point: Point) -> Result<ProbeLocation> {
    let mut best: Option<(f64, usize, [f64; 3])> = None;
    for e in 0..mesh.element_count() {
        let [a, b, c] = mesh.element_vertices(e);
        let area = signed_area(a, b, c);
        let bary = [
            signed_area(point, b, c) / area,
            signed_area(a, point, c) / area,
            signed_area(a, b, point) / area,
        ];
        // Distance outside the edge opposite vertex k is -bary[k] * height_k.
        let edges = [(b, c), (c, a), (a, b)];
        let outside = bary
            .iter()
            .zip(edges)
            .map(|(&w, (p, q))| {
                let len = ((q[0] - p[0]).powi(2) + (q[1] - p[1]).powi(2)).sqrt();
                -w * 2.0 * area / len
            })
            .fold(f64::NEG_INFINITY, f64::max);
        if outside > INSIDE_TOLERANCE_M {
            continue;
        }
        let min = bary.iter().copied().fold(f64::INFINITY, f64::min);
        if best.map_or(true, |(m, _, _)| min > m) {
            best = Some((min, e, bary));
        }
    }
    let (_, element, mut bary) = best.ok_or_else(|| Error::PointOutsideMesh {
        x: point[0],
        y: point[1],
        distance: boundary_distance(mesh, point),
    })?;
    for w in &mut bary {
        *w = w.max(0.0);
    }
    let sum: f64 = bary.iter().sum();
    for w in &mut bary {
        *w /= sum;
    }
    Ok(ProbeLocation {
        point,
        element,
        barycentric: bary,
    })
}

fn boundary_distance(mesh: &Mesh, p: Point) -> f64 {
    mesh.geometric_boundary()
        .into_iter()
        .map(|[i, j]| {
            let (a, b) = (mesh.nodes()[i], mesh.nodes()[j]);
            let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
            let t = (((p[0] - a[0]) * dx + (p[1] - a[1]) * dy) / (dx * dx + dy * dy)).clamp(0.0, 1.0);
            ((a[0] + t * dx - p[0]).powi(2) + (a[1] + t * dy - p[1]).powi(2)).sqrt()
        })
        .fold(f64::INFINITY, f64::min)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::shapes::rectangle;

    #[test]
    fn centroid_has_equal_weights() {
        let mesh = rectangle(1.0, 1.0, 3, 3).unwrap();
        let c = mesh.element_centroid(4);
        let loc = locate_probe(&mesh, c).unwrap();
        assert_eq!(loc.element, 4);
        for w in loc.barycentric {
            assert!((w - 1.0 / 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn node_has_unit_weight() {
        let mesh = rectangle(1.0, 1.0, 2, 2).unwrap();
        let node = 4;
        let loc = locate_probe(&mesh, mesh.nodes()[node]).unwrap();
        let tri = mesh.elements()[loc.element];
        for (k, v) in tri.iter().enumerate() {
            let expected = if *v == node { 1.0 } else { 0.0 };
            assert!((loc.barycentric[k] - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn outside_point_reports_distance() {
        let mesh = rectangle(1.0, 1.0, 2, 2).unwrap();
        match locate_probe(&mesh, [1.5, 0.5]) {
            Err(Error::PointOutsideMesh { distance, .. }) => assert!((distance - 0.5).abs() < 1e-12),
            other => panic!("unexpected {other:?}"),
        }
        // Within the inside tolerance.
        assert!(locate_probe(&mesh, [1.0 + 5e-11, 0.5]).is_ok());
    }
}
