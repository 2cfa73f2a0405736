use cano_core::stability::{box_mesh, Mesh};
use nalgebra::{Point2, Point3, Vector3};

pub fn p(x: f64, y: f64, z: f64) -> Point3<f64> {
    Point3::new(x, y, z)
}


/// Even-odd ray casting.
pub fn inside_polygon(poly: &[Point2<f64>], q: &Point2<f64>) -> bool {
    let mut inside = false;
    let mut j = poly.len() - 1;
    for i in 0..poly.len() {
        let (a, b) = (poly[i], poly[j]);
        if (a.y > q.y) != (b.y > q.y) && q.x < (b.x - a.x) * (q.y - a.y) / (b.y - a.y) + a.x {
            inside = !inside;
        }
        j = i;
    }
    inside
}


pub fn tetrahedron() -> Mesh {
    let v = vec![p(1.0, 1.0, 1.0), p(1.0, -1.0, -1.0), p(-1.0, 1.0, -1.0), p(-1.0, -1.0, 1.0)];
    let faces = [[0u32, 1, 2], [0, 1, 3], [0, 2, 3], [1, 2, 3]]
        .map(|[a, b, c]| {
            let n = (v[b as usize] - v[a as usize]).cross(&(v[c as usize] - v[a as usize]));
            let centroid = (v[a as usize].coords + v[b as usize].coords + v[c as usize].coords) / 3.0;
            if n.dot(&centroid) < 0.0 { [a, c, b] } else { [a, b, c] }
        })
        .to_vec();
    Mesh::new(v, faces).unwrap()
}


/// A small foot with a long arm resting on top of it, overhanging along +x.
pub fn cantilever() -> (Mesh, Point3<f64>) {
    let foot = box_mesh(p(0.0, 0.0, 0.0), p(0.2, 0.2, 0.2));
    let arm = box_mesh(p(0.0, 0.0, 0.2), p(2.0, 0.2, 0.4));
    let (vf, cf) = (0.2f64.powi(3), Vector3::new(0.1, 0.1, 0.1));
    let (va, ca) = (2.0 * 0.2 * 0.2, Vector3::new(1.0, 0.1, 0.3));
    (Mesh::merge(&[foot, arm]), Point3::from((cf * vf + ca * va) / (vf + va)))
}
