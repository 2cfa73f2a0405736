//! Labeled synthetic objects built from boxes and prisms, z up and +x front.

use std::f64::consts::FRAC_PI_2;
use std::path::Path;

use nalgebra::{Point3, Vector3};

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::geometry::{normalize_to_unit_sphere, LabeledCloud, Rotation};
use crate::io::{labels, ply};
use crate::metrics::SymmetrySpec;
use crate::stability::{box_mesh, cylinder_mesh, support_candidates, Mesh};
use crate::template::CategoryTemplate;

/// A part-labeled mesh.
#[derive(Debug, Clone)]
pub struct SyntheticObject {
    pub category: String,
    pub mesh: Mesh,
    /// Part index of every face.
    pub face_labels: Vec<u32>,
    pub part_names: Vec<String>,
}

#[derive(Default)]
struct Builder {
    meshes: Vec<Mesh>,
    labels: Vec<u32>,
    names: Vec<String>,
}

impl Builder {
    fn part(mut self, name: &str, mesh: Mesh) -> Self {
        let label = match self.names.iter().position(|n| n == name) {
            Some(i) => i as u32,
            None => {
                self.names.push(name.to_string());
                (self.names.len() - 1) as u32
            }
        };
        self.labels.extend(std::iter::repeat_n(label, mesh.faces().len()));
        self.meshes.push(mesh);
        self
    }

    fn cuboid(self, name: &str, min: [f64; 3], max: [f64; 3]) -> Self {
        self.part(name, box_mesh(Point3::from(min), Point3::from(max)))
    }

    fn build(self, category: &str) -> SyntheticObject {
        SyntheticObject {
            category: category.to_string(),
            mesh: Mesh::merge(&self.meshes),
            face_labels: self.labels,
            part_names: self.names,
        }
    }
}

/// A z-aligned prism laid along +x, its base centred on `at`.
fn prism_along_x(at: [f64; 3], radius: f64, length: f64) -> Mesh {
    let r = Rotation::from_axis_angle(&Vector3::y(), FRAC_PI_2).expect("unit axis");
    let offset = Vector3::from(at);
    cylinder_mesh(Point3::origin(), radius, 0.0, length, 24).map_vertices(|p| r.apply(p) + offset)
}

pub fn chair() -> SyntheticObject {
    let mut b = Builder::default()
        .cuboid("seat", [-0.5, -0.5, 0.45], [0.5, 0.5, 0.55])
        .cuboid("back", [-0.5, -0.5, 0.55], [-0.4, 0.5, 1.3])
        .cuboid("arm", [-0.4, 0.42, 0.55], [0.35, 0.5, 0.8]);
    for (x, y) in [(-0.5, -0.5), (0.42, -0.5), (-0.5, 0.42), (0.42, 0.42)] {
        b = b.cuboid("leg", [x, y, 0.0], [x + 0.08, y + 0.08, 0.45]);
    }
    b.build("chair")
}

/// `cylinder_mesh` without its top cap.
fn cup(radius: f64, height: f64, segments: usize) -> Mesh {
    let closed = cylinder_mesh(Point3::origin(), radius, 0.0, height, segments);
    let top = (closed.vertices().len() - 1) as u32;
    let faces = closed.faces().iter().copied().filter(|f| !f.contains(&top)).collect();
    Mesh::new(closed.vertices().to_vec(), faces).expect("valid subset")
}

pub fn mug() -> SyntheticObject {
    Builder::default()
        .part("body", cup(0.4, 0.9, 32))
        .cuboid("handle", [0.38, -0.05, 0.35], [0.65, 0.05, 0.45])
        .cuboid("handle", [0.55, -0.05, 0.45], [0.65, 0.05, 0.75])
        .cuboid("handle", [0.38, -0.05, 0.75], [0.65, 0.05, 0.85])
        .build("mug")
}

pub fn camera() -> SyntheticObject {
    Builder::default()
        .cuboid("body", [-0.25, -0.6, 0.0], [0.25, 0.6, 0.7])
        .part("lens", prism_along_x([0.25, 0.15, 0.35], 0.2, 0.3))
        .cuboid("flash", [-0.1, -0.5, 0.7], [0.1, -0.25, 0.82])
        .cuboid("grip", [0.25, -0.6, 0.05], [0.35, -0.4, 0.6])
        .build("camera")
}

pub fn lamp() -> SyntheticObject {
    Builder::default()
        .part("base", cylinder_mesh(Point3::origin(), 0.35, 0.0, 0.08, 32))
        .cuboid("pole", [-0.03, -0.03, 0.08], [0.03, 0.03, 1.0])
        .cuboid("arm", [-0.03, -0.03, 0.95], [0.5, 0.03, 1.0])
        .part("shade", cylinder_mesh(Point3::new(0.5, 0.0, 0.0), 0.18, 0.7, 0.95, 32))
        .build("lamp")
}

pub fn desk() -> SyntheticObject {
    Builder::default()
        .cuboid("top", [-0.5, -1.0, 0.72], [0.5, 1.0, 0.78])
        .cuboid("side", [-0.5, -1.0, 0.0], [0.5, -0.94, 0.72])
        .cuboid("side", [-0.5, 0.94, 0.0], [0.5, 1.0, 0.72])
        .cuboid("drawer", [-0.3, 0.4, 0.45], [0.5, 0.94, 0.72])
        .cuboid("panel", [-0.5, -0.94, 0.3], [-0.46, 0.94, 0.72])
        .build("desk")
}

/// One object per category, all without rotational symmetry.
pub fn catalogue() -> Vec<SyntheticObject> {
    vec![chair(), mug(), camera(), lamp(), desk()]
}

impl SyntheticObject {
    /// Part-labeled surface samples.
    pub fn sample(&self, count: usize, seed: u64) -> Result<LabeledCloud> {
        let s = crate::io::sampling::sample_surface(&self.mesh, count, seed, Some(&self.face_labels), None)?;
        LabeledCloud::new(s.points)?.with_labels(s.labels.expect("face labels given"), self.part_names.clone())
    }

    pub fn template(&self, count: usize, seed: u64) -> Result<CategoryTemplate> {
        CategoryTemplate::new(
            self.category.clone(),
            format!("synthetic-{}", self.category),
            &self.sample(count, seed)?,
            SymmetrySpec::None,
            "z up, x front",
        )
    }

    pub fn rotated(&self, r: &Rotation) -> SyntheticObject {
        SyntheticObject {
            mesh: self.mesh.rotated(r),
            ..self.clone()
        }
    }

    /// Writes `<path>` as a PLY mesh and its per-face `.labels` sidecar.
    pub fn write(&self, path: &Path, encoding: ply::Encoding) -> Result<()> {
        ply::write_mesh(path, &self.mesh, encoding)?;
        labels::write(&labels::sidecar_path(path), &self.part_names, &self.face_labels)
    }
}

/// A synthetic object in a known pose, normalized like loaded data.
#[derive(Debug, Clone)]
pub struct PosedInstance {
    pub id: String,
    /// Index into [`catalogue`].
    pub source: usize,
    pub category: String,
    /// Canonicalizing rotation: maps the observed object to its canonical pose.
    pub ground_truth: Rotation,
    /// Whether the object was tipped onto another hull facet before the yaw.
    pub tipped: bool,
    pub mesh: Mesh,
    pub cloud: LabeledCloud,
}

/// `count` instances cycling through `objects`: each gets a uniform random
/// yaw, and half of them are first tipped onto a random stable hull facet.
pub fn posed_suite(objects: &[SyntheticObject], count: usize, points: usize, seed: u64) -> Result<Vec<PosedInstance>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let facets: Vec<Vec<Rotation>> = objects
        .iter()
        .map(|o| {
            Ok(support_candidates(&o.mesh)?
                .into_iter()
                .filter(|c| c.valid)
                .map(|c| c.rotation)
                .collect())
        })
        .collect::<Result<_>>()?;
    let mut out = Vec::with_capacity(count);
    for i in 0..count {
        let source = i % objects.len();
        let object = &objects[source];
        let tipped = rng.random_bool(0.5);
        let tip = if tipped {
            facets[source][rng.random_range(0..facets[source].len())]
        } else {
            Rotation::identity()
        };
        let yaw = Rotation::about_z(rng.random_range(0.0..std::f64::consts::TAU));
        let pose = yaw * tip;
        let posed = object.rotated(&pose);
        let (cloud, t) = normalize_to_unit_sphere(&posed.sample(points, seed.wrapping_add(1000 + i as u64))?)?;
        out.push(PosedInstance {
            id: format!("{}-{i:04}", object.category),
            source,
            category: object.category.clone(),
            ground_truth: pose.inverse(),
            tipped,
            mesh: posed.mesh.normalized_by(&t),
            cloud,
        });
    }
    Ok(out)
}
