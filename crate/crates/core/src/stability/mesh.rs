use std::collections::HashMap;

use nalgebra::{Point3, Vector3};

use crate::error::{Error, Result};
use crate::geometry::{NormalizationTransform, Rotation};

/// Triangle mesh. Faces index into `vertices`.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    vertices: Vec<Point3<f64>>,
    faces: Vec<[u32; 3]>,
}

impl Mesh {
    /// Validates indices and drops zero-area faces.
    pub fn new(vertices: Vec<Point3<f64>>, faces: Vec<[u32; 3]>) -> Result<Self> {
        let mut mesh = Mesh::unchecked(vertices, faces)?;
        let keep = mesh.nondegenerate_faces();
        mesh.faces = retain_by(&mesh.faces, &keep);
        Ok(mesh)
    }

    /// As [`Mesh::new`], keeping one label per face in step with the faces.
    pub fn with_face_labels(
        vertices: Vec<Point3<f64>>,
        faces: Vec<[u32; 3]>,
        labels: Vec<u32>,
    ) -> Result<(Self, Vec<u32>)> {
        if labels.len() != faces.len() {
            return Err(Error::InvalidInput(format!(
                "{} face labels for {} faces",
                labels.len(),
                faces.len()
            )));
        }
        let mut mesh = Mesh::unchecked(vertices, faces)?;
        let keep = mesh.nondegenerate_faces();
        mesh.faces = retain_by(&mesh.faces, &keep);
        Ok((mesh, retain_by(&labels, &keep)))
    }

    fn unchecked(vertices: Vec<Point3<f64>>, faces: Vec<[u32; 3]>) -> Result<Self> {
        if let Some(f) = faces.iter().find(|f| f.iter().any(|&i| i as usize >= vertices.len())) {
            return Err(Error::InvalidInput(format!(
                "face {f:?} references a vertex beyond {}",
                vertices.len()
            )));
        }
        if vertices.iter().any(|p| !p.coords.iter().all(|c| c.is_finite())) {
            return Err(Error::InvalidInput("mesh has non-finite vertices".into()));
        }
        Ok(Mesh { vertices, faces })
    }

    fn nondegenerate_faces(&self) -> Vec<bool> {
        let diag = self.bounding_diagonal();
        let min_area = 1e-14 * diag * diag;
        self.faces
            .iter()
            .map(|f| f[0] != f[1] && f[1] != f[2] && f[0] != f[2] && triangle_area(&self.vertices, f) > min_area)
            .collect()
    }

    pub fn vertices(&self) -> &[Point3<f64>] {
        &self.vertices
    }

    pub fn faces(&self) -> &[[u32; 3]] {
        &self.faces
    }

    pub fn is_empty(&self) -> bool {
        self.faces.is_empty()
    }

    pub fn triangle(&self, face: usize) -> [Point3<f64>; 3] {
        let f = self.faces[face];
        [
            self.vertices[f[0] as usize],
            self.vertices[f[1] as usize],
            self.vertices[f[2] as usize],
        ]
    }

    pub fn face_area(&self, face: usize) -> f64 {
        triangle_area(&self.vertices, &self.faces[face])
    }

    pub fn surface_area(&self) -> f64 {
        (0..self.faces.len()).map(|i| self.face_area(i)).sum()
    }

    pub fn bounding_diagonal(&self) -> f64 {
        if self.vertices.is_empty() {
            return 0.0;
        }
        let mut lo = self.vertices[0];
        let mut hi = self.vertices[0];
        for p in &self.vertices {
            lo = lo.inf(p);
            hi = hi.sup(p);
        }
        (hi - lo).norm()
    }

    /// True when every undirected edge is shared by exactly two faces.
    pub fn is_watertight(&self) -> bool {
        if self.faces.is_empty() {
            return false;
        }
        let mut counts: HashMap<(u32, u32), u32> = HashMap::new();
        for f in &self.faces {
            for k in 0..3 {
                let (a, b) = (f[k], f[(k + 1) % 3]);
                *counts.entry((a.min(b), a.max(b))).or_default() += 1;
            }
        }
        counts.values().all(|&c| c == 2)
    }

    pub fn map_vertices(&self, f: impl Fn(&Point3<f64>) -> Point3<f64>) -> Mesh {
        Mesh {
            vertices: self.vertices.iter().map(f).collect(),
            faces: self.faces.clone(),
        }
    }

    pub fn rotated(&self, r: &Rotation) -> Mesh {
        self.map_vertices(|p| r.apply(p))
    }

    pub fn normalized_by(&self, t: &NormalizationTransform) -> Mesh {
        self.map_vertices(|p| t.apply(p))
    }

    /// Concatenates meshes, offsetting face indices.
    pub fn merge(parts: &[Mesh]) -> Mesh {
        let mut vertices = Vec::new();
        let mut faces = Vec::new();
        for m in parts {
            let base = vertices.len() as u32;
            vertices.extend_from_slice(&m.vertices);
            faces.extend(m.faces.iter().map(|f| [f[0] + base, f[1] + base, f[2] + base]));
        }
        Mesh { vertices, faces }
    }
}

fn retain_by<T: Copy>(items: &[T], keep: &[bool]) -> Vec<T> {
    items.iter().zip(keep).filter(|(_, &k)| k).map(|(&x, _)| x).collect()
}

pub(crate) fn triangle_area(vertices: &[Point3<f64>], f: &[u32; 3]) -> f64 {
    let a = vertices[f[0] as usize];
    let b = vertices[f[1] as usize];
    let c = vertices[f[2] as usize];
    0.5 * (b - a).cross(&(c - a)).norm()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MassEstimator {
    /// Uniform-density solid, via signed tetrahedra.
    Solid,
    /// Area-weighted surface centroid (open meshes or zero volume).
    Surface,
    /// Mean of a point set (no mesh available).
    Points,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CenterOfMass {
    pub point: Point3<f64>,
    pub estimator: MassEstimator,
}

pub fn center_of_mass(mesh: &Mesh) -> Result<CenterOfMass> {
    if mesh.is_empty() {
        return Err(Error::InvalidInput("center of mass of an empty mesh".into()));
    }
    if mesh.is_watertight() {
        let mut volume = 0.0;
        let mut moment = Vector3::zeros();
        for i in 0..mesh.faces.len() {
            let [a, b, c] = mesh.triangle(i);
            let v = a.coords.dot(&b.coords.cross(&c.coords)) / 6.0;
            volume += v;
            moment += (a.coords + b.coords + c.coords) * (v / 4.0);
        }
        let diag = mesh.bounding_diagonal();
        if volume.abs() > 1e-12 * diag * diag * diag {
            return Ok(CenterOfMass {
                point: Point3::from(moment / volume),
                estimator: MassEstimator::Solid,
            });
        }
    }
    let mut area = 0.0;
    let mut moment = Vector3::zeros();
    for i in 0..mesh.faces.len() {
        let [a, b, c] = mesh.triangle(i);
        let w = mesh.face_area(i);
        area += w;
        moment += (a.coords + b.coords + c.coords) * (w / 3.0);
    }
    Ok(CenterOfMass {
        point: Point3::from(moment / area),
        estimator: MassEstimator::Surface,
    })
}

/// Closed axis-aligned box with outward-facing triangles.
pub fn box_mesh(min: Point3<f64>, max: Point3<f64>) -> Mesh {
    let v = |x: bool, y: bool, z: bool| {
        Point3::new(
            if x { max.x } else { min.x },
            if y { max.y } else { min.y },
            if z { max.z } else { min.z },
        )
    };
    let vertices = vec![
        v(false, false, false),
        v(true, false, false),
        v(true, true, false),
        v(false, true, false),
        v(false, false, true),
        v(true, false, true),
        v(true, true, true),
        v(false, true, true),
    ];
    let faces = vec![
        [0, 2, 1],
        [0, 3, 2],
        [4, 5, 6],
        [4, 6, 7],
        [0, 1, 5],
        [0, 5, 4],
        [1, 2, 6],
        [1, 6, 5],
        [2, 3, 7],
        [2, 7, 6],
        [3, 0, 4],
        [3, 4, 7],
    ];
    Mesh { vertices, faces }
}

/// Closed prism approximating a z-aligned cylinder with `segments` sides.
pub fn cylinder_mesh(center: Point3<f64>, radius: f64, z0: f64, z1: f64, segments: usize) -> Mesh {
    let n = segments.max(3);
    let mut vertices = Vec::with_capacity(2 * n + 2);
    for z in [z0, z1] {
        for i in 0..n {
            let t = 2.0 * std::f64::consts::PI * i as f64 / n as f64;
            vertices.push(Point3::new(center.x + radius * t.cos(), center.y + radius * t.sin(), z));
        }
    }
    let bottom_c = vertices.len() as u32;
    vertices.push(Point3::new(center.x, center.y, z0));
    let top_c = vertices.len() as u32;
    vertices.push(Point3::new(center.x, center.y, z1));
    let n32 = n as u32;
    let mut faces = Vec::with_capacity(4 * n);
    for i in 0..n32 {
        let j = (i + 1) % n32;
        faces.push([bottom_c, j, i]);
        faces.push([top_c, n32 + i, n32 + j]);
        faces.push([i, j, n32 + j]);
        faces.push([i, n32 + j, n32 + i]);
    }
    Mesh { vertices, faces }
}
