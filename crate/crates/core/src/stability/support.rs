use std::collections::{HashMap, VecDeque};

use nalgebra::{Point2, Point3, Vector3};
use serde::{Deserialize, Serialize};

use super::hull::{convex_hull, HullFace};
use super::mesh::{center_of_mass, CenterOfMass, Mesh};
use crate::error::Result;
use crate::geometry::Rotation;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SupportConfig {
    /// Adjacent hull facets whose normals differ by less than this (degrees)
    /// form one resting facet.
    pub merge_tolerance_deg: f64,
    /// Minimum signed distance of the projected center of mass inside the
    /// support polygon for the pose to count as stable.
    pub margin_epsilon: f64,
}

impl Default for SupportConfig {
    fn default() -> Self {
        SupportConfig {
            merge_tolerance_deg: 2.0,
            margin_epsilon: 1e-4,
        }
    }
}

/// A resting facet of the convex hull and the pose that puts it on the ground.
#[derive(Debug, Clone, PartialEq)]
pub struct SupportCandidate {
    /// Outward unit normal of the facet, in the input frame.
    pub facet_normal: Vector3<f64>,
    /// Maps `facet_normal` to `(0, 0, -1)`.
    pub rotation: Rotation,
    /// Counter-clockwise footprint on the ground plane (x, y after rotation).
    pub support_polygon: Vec<Point2<f64>>,
    pub polygon_area: f64,
    /// Signed distance of the projected center of mass to the polygon
    /// boundary; positive inside.
    pub com_margin: f64,
    /// Height of the center of mass above the ground after rotation.
    pub com_height: f64,
    pub valid: bool,
}

/// Support candidates of a mesh, using its center of mass.
pub fn support_candidates(mesh: &Mesh) -> Result<Vec<SupportCandidate>> {
    support_candidates_with(mesh, &SupportConfig::default()).map(|(c, _)| c)
}

pub fn support_candidates_with(
    mesh: &Mesh,
    cfg: &SupportConfig,
) -> Result<(Vec<SupportCandidate>, CenterOfMass)> {
    let com = center_of_mass(mesh)?;
    let used = used_vertices(mesh);
    Ok((support_candidates_for_points(&used, &com.point, cfg)?, com))
}

fn used_vertices(mesh: &Mesh) -> Vec<Point3<f64>> {
    let mut used = vec![false; mesh.vertices().len()];
    for f in mesh.faces() {
        for &i in f {
            used[i as usize] = true;
        }
    }
    mesh.vertices()
        .iter()
        .zip(used)
        .filter_map(|(p, u)| u.then_some(*p))
        .collect()
}

/// Support candidates of the hull of `points` for a body whose center of
/// mass is `com`. Sorted by descending polygon area.
pub fn support_candidates_for_points(
    points: &[Point3<f64>],
    com: &Point3<f64>,
    cfg: &SupportConfig,
) -> Result<Vec<SupportCandidate>> {
    let hull = convex_hull(points)?;
    let groups = merge_coplanar(&hull, cfg.merge_tolerance_deg.to_radians());
    let down = -Vector3::z();

    let mut out = Vec::with_capacity(groups.len());
    for group in groups {
        // The largest member rests flat; the others sit within the merge
        // tolerance above the ground.
        let normal = hull[group[0]].normal;
        let rotation = Rotation::between(&normal, &down)?;
        let mut verts: Vec<usize> = group.iter().flat_map(|&f| hull[f].vertices).collect();
        verts.sort_unstable();
        verts.dedup();
        let rotated: Vec<Point3<f64>> = verts.iter().map(|&i| rotation.apply(&points[i])).collect();
        let ground = rotated.iter().map(|p| p.z).fold(f64::INFINITY, f64::min);
        let polygon = convex_polygon(rotated.iter().map(|p| Point2::new(p.x, p.y)).collect());
        let area = polygon_area(&polygon);
        let c = rotation.apply(com);
        let com_margin = signed_margin(&polygon, &Point2::new(c.x, c.y));
        out.push(SupportCandidate {
            facet_normal: normal,
            rotation,
            support_polygon: polygon,
            polygon_area: area,
            com_margin,
            com_height: c.z - ground,
            valid: com_margin > cfg.margin_epsilon,
        });
    }
    out.sort_by(|a, b| b.polygon_area.total_cmp(&a.polygon_area));
    Ok(out)
}

/// Groups hull faces into resting facets: flood-fill across shared edges,
/// admitting faces within `tol` radians of the seed face's normal. Seeds
/// are visited by descending area and stay first in their group.
fn merge_coplanar(hull: &[HullFace], tol: f64) -> Vec<Vec<usize>> {
    let mut edge_faces: HashMap<(usize, usize), Vec<usize>> = HashMap::new();
    for (i, f) in hull.iter().enumerate() {
        for k in 0..3 {
            let (a, b) = (f.vertices[k], f.vertices[(k + 1) % 3]);
            edge_faces.entry((a.min(b), a.max(b))).or_default().push(i);
        }
    }
    let mut order: Vec<usize> = (0..hull.len()).collect();
    order.sort_by(|&a, &b| hull[b].area.total_cmp(&hull[a].area).then(a.cmp(&b)));
    let cos_tol = tol.cos();

    let mut assigned = vec![false; hull.len()];
    let mut groups = Vec::new();
    for seed in order {
        if assigned[seed] {
            continue;
        }
        assigned[seed] = true;
        let seed_n = hull[seed].normal;
        let mut group = vec![seed];
        let mut queue = VecDeque::from([seed]);
        while let Some(f) = queue.pop_front() {
            let v = hull[f].vertices;
            for k in 0..3 {
                let (a, b) = (v[k], v[(k + 1) % 3]);
                for &nb in &edge_faces[&(a.min(b), a.max(b))] {
                    if !assigned[nb] && hull[nb].normal.dot(&seed_n) >= cos_tol {
                        assigned[nb] = true;
                        group.push(nb);
                        queue.push_back(nb);
                    }
                }
            }
        }
        group[1..].sort_unstable();
        groups.push(group);
    }
    groups
}

fn cross2(o: &Point2<f64>, a: &Point2<f64>, b: &Point2<f64>) -> f64 {
    (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x)
}

/// Counter-clockwise convex hull of 2D points (monotone chain), collinear points dropped.
pub fn convex_polygon(mut pts: Vec<Point2<f64>>) -> Vec<Point2<f64>> {
    pts.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let scale = pts
        .iter()
        .map(|p| p.coords.amax())
        .fold(0.0_f64, f64::max)
        .max(1.0);
    let eps = 1e-12 * scale * scale;
    let mut hull: Vec<Point2<f64>> = Vec::with_capacity(2 * pts.len());
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &Point2<f64>>> = if pass == 0 {
            Box::new(pts.iter())
        } else {
            Box::new(pts.iter().rev())
        };
        for p in iter {
            while hull.len() >= start + 2 && cross2(&hull[hull.len() - 2], &hull[hull.len() - 1], p) <= eps {
                hull.pop();
            }
            hull.push(*p);
        }
        hull.pop();
    }
    hull
}

/// Shoelace area of a counter-clockwise polygon.
pub fn polygon_area(poly: &[Point2<f64>]) -> f64 {
    if poly.len() < 3 {
        return 0.0;
    }
    let mut s = 0.0;
    for i in 0..poly.len() {
        let (a, b) = (poly[i], poly[(i + 1) % poly.len()]);
        s += a.x * b.y - b.x * a.y;
    }
    0.5 * s
}

fn segment_distance(p: &Point2<f64>, a: &Point2<f64>, b: &Point2<f64>) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_squared();
    let t = if len2 > 0.0 { ((p - a).dot(&ab) / len2).clamp(0.0, 1.0) } else { 0.0 };
    (p - (a + ab * t)).norm()
}

/// Signed distance from `p` to the boundary of a convex counter-clockwise
/// polygon: positive inside, negative outside.
pub fn signed_margin(poly: &[Point2<f64>], p: &Point2<f64>) -> f64 {
    if poly.is_empty() {
        return f64::NEG_INFINITY;
    }
    if poly.len() == 1 {
        return -(p - poly[0]).norm();
    }
    let n = poly.len();
    let dist = (0..n)
        .map(|i| segment_distance(p, &poly[i], &poly[(i + 1) % n]))
        .fold(f64::INFINITY, f64::min);
    let inside = poly.len() >= 3 && (0..n).all(|i| cross2(&poly[i], &poly[(i + 1) % n], p) >= 0.0);
    if inside {
        dist
    } else {
        -dist
    }
}
