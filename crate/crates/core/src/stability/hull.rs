//! Incremental 3D convex hull.

use std::collections::HashSet;

use nalgebra::{Point3, Vector3};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HullFace {
    /// Indices into the input points, counter-clockwise seen from outside.
    pub vertices: [usize; 3],
    /// Outward unit normal.
    pub normal: Vector3<f64>,
    /// Plane offset: `normal · x = offset` on the face.
    pub offset: f64,
    pub area: f64,
}

impl HullFace {
    fn new(points: &[Point3<f64>], v: [usize; 3]) -> Self {
        let (a, b, c) = (points[v[0]], points[v[1]], points[v[2]]);
        let n = (b - a).cross(&(c - a));
        let len = n.norm();
        let normal = if len > 0.0 { n / len } else { Vector3::zeros() };
        HullFace {
            vertices: v,
            normal,
            offset: normal.dot(&a.coords),
            area: 0.5 * len,
        }
    }

    fn distance(&self, p: &Point3<f64>) -> f64 {
        self.normal.dot(&p.coords) - self.offset
    }
}

/// Triangulated convex hull of `points`. Points within a small tolerance of
/// an existing face are treated as interior, so coplanar input yields only
/// the extreme vertices.
pub fn convex_hull(points: &[Point3<f64>]) -> Result<Vec<HullFace>> {
    if points.len() < 4 {
        return Err(Error::DegenerateGeometry(format!(
            "convex hull needs at least 4 points, got {}",
            points.len()
        )));
    }
    let mut lo = points[0];
    let mut hi = points[0];
    for p in points {
        lo = lo.inf(p);
        hi = hi.sup(p);
    }
    let diag = (hi - lo).norm();
    let eps = 1e-10 * diag.max(f64::MIN_POSITIVE);

    let simplex = initial_simplex(points, eps)?;
    let interior = Point3::from(
        simplex.iter().fold(Vector3::zeros(), |acc, &i| acc + points[i].coords) / 4.0,
    );
    let [a, b, c, d] = simplex;
    let mut faces: Vec<Option<HullFace>> = Vec::new();
    for tri in [[a, b, c], [a, b, d], [a, c, d], [b, c, d]] {
        let mut f = HullFace::new(points, tri);
        if f.distance(&interior) > 0.0 {
            f = HullFace::new(points, [tri[0], tri[2], tri[1]]);
        }
        faces.push(Some(f));
    }

    for (pi, p) in points.iter().enumerate() {
        if simplex.contains(&pi) {
            continue;
        }
        let visible: Vec<usize> = faces
            .iter()
            .enumerate()
            .filter_map(|(i, f)| f.as_ref().filter(|f| f.distance(p) > eps).map(|_| i))
            .collect();
        if visible.is_empty() {
            continue;
        }
        let mut edges = HashSet::with_capacity(visible.len() * 3);
        for &fi in &visible {
            let v = faces[fi].as_ref().expect("visible face alive").vertices;
            for k in 0..3 {
                edges.insert((v[k], v[(k + 1) % 3]));
            }
        }
        let mut horizon: Vec<(usize, usize)> = Vec::new();
        for &fi in &visible {
            let v = faces[fi].as_ref().expect("visible face alive").vertices;
            for k in 0..3 {
                let e = (v[k], v[(k + 1) % 3]);
                if !edges.contains(&(e.1, e.0)) {
                    horizon.push(e);
                }
            }
        }
        for &fi in &visible {
            faces[fi] = None;
        }
        for (ea, eb) in horizon {
            faces.push(Some(HullFace::new(points, [ea, eb, pi])));
        }
    }

    Ok(faces.into_iter().flatten().filter(|f| f.area > 0.0).collect())
}

fn initial_simplex(points: &[Point3<f64>], eps: f64) -> Result<[usize; 4]> {
    let i0 = (0..points.len())
        .min_by(|&a, &b| {
            let (p, q) = (points[a], points[b]);
            p.x.total_cmp(&q.x).then(p.y.total_cmp(&q.y)).then(p.z.total_cmp(&q.z))
        })
        .expect("non-empty");
    let i1 = argmax(points.len(), |i| (points[i] - points[i0]).norm());
    let dir = (points[i1] - points[i0]).try_normalize(0.0);
    let Some(dir) = dir.filter(|_| (points[i1] - points[i0]).norm() > eps) else {
        return Err(Error::DegenerateGeometry("all points coincide".into()));
    };
    let line_dist = |i: usize| {
        let v = points[i] - points[i0];
        (v - dir * v.dot(&dir)).norm()
    };
    let i2 = argmax(points.len(), line_dist);
    if line_dist(i2) <= eps {
        return Err(Error::DegenerateGeometry("points are collinear".into()));
    }
    let n = (points[i1] - points[i0]).cross(&(points[i2] - points[i0])).normalize();
    let plane_dist = |i: usize| n.dot(&(points[i] - points[i0])).abs();
    let i3 = argmax(points.len(), plane_dist);
    if plane_dist(i3) <= eps {
        return Err(Error::DegenerateGeometry("points are coplanar".into()));
    }
    Ok([i0, i1, i2, i3])
}

fn argmax(n: usize, f: impl Fn(usize) -> f64) -> usize {
    let mut best = 0;
    let mut best_v = f64::NEG_INFINITY;
    for i in 0..n {
        let v = f(i);
        if v > best_v {
            best_v = v;
            best = i;
        }
    }
    best
}
