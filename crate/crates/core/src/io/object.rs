use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{labels, obj, ply, sampling};
use crate::error::{Error, Result};
use crate::geometry::LabeledCloud;
use crate::stability::Mesh;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct LoadOptions {
    /// Surface samples drawn from meshes.
    pub sample_count: usize,
    pub seed: u64,
}

impl Default for LoadOptions {
    fn default() -> Self {
        LoadOptions {
            sample_count: sampling::DEFAULT_SAMPLE_COUNT,
            seed: 0,
        }
    }
}

/// An object as read from disk, before normalization.
#[derive(Debug, Clone)]
pub struct LoadedObject {
    pub mesh: Option<Mesh>,
    pub cloud: LabeledCloud,
}

/// Loads an OBJ or PLY file. Meshes are sampled to a point cloud. A sibling
/// `<stem>.labels` file, when present, supplies part labels per point, or
/// for meshes per face.
pub fn load_object(path: &Path, opts: &LoadOptions) -> Result<LoadedObject> {
    let ext = path
        .extension()
        .and_then(|e| e.to_str())
        .map(str::to_ascii_lowercase)
        .unwrap_or_default();
    let data = match ext.as_str() {
        "obj" => obj::read(path)?,
        "ply" => ply::read(path)?,
        other => {
            return Err(Error::UnsupportedFormat {
                path: path.into(),
                reason: format!("extension `{other}`"),
            })
        }
    };

    let sidecar = labels::sidecar_path(path);
    let part_labels = if sidecar.exists() {
        Some(labels::read(&sidecar)?)
    } else {
        None
    };

    if data.faces.is_empty() {
        let mut cloud = LabeledCloud::new(data.vertices)?;
        if let Some(c) = data.colors {
            cloud = cloud.with_colors(c)?;
        }
        if let Some(l) = part_labels {
            if l.labels.len() != cloud.len() {
                return Err(Error::LabelCountMismatch {
                    path: sidecar,
                    expected: cloud.len(),
                    found: l.labels.len(),
                });
            }
            cloud = cloud.with_labels(l.labels, l.part_names)?;
        }
        return Ok(LoadedObject { mesh: None, cloud });
    }

    let mut tris = Vec::new();
    let mut tri_source = Vec::new();
    for (fi, f) in data.faces.iter().enumerate() {
        if f.iter().any(|&i| i as usize >= data.vertices.len()) {
            return Err(Error::parse(path, 0, "face index out of range"));
        }
        for k in 1..f.len() - 1 {
            tris.push([f[0], f[k], f[k + 1]]);
            tri_source.push(fi as u32);
        }
    }
    // Labels are either one per face of the file or one per sampled point.
    let per_face = part_labels
        .as_ref()
        .is_some_and(|l| l.labels.len() == data.faces.len() && l.labels.len() != opts.sample_count);
    let (mesh, face_labels) = if per_face {
        let l = part_labels.as_ref().expect("checked");
        let tri_labels = tri_source.iter().map(|&f| l.labels[f as usize]).collect();
        let (mesh, fl) = Mesh::with_face_labels(data.vertices, tris, tri_labels)?;
        (mesh, Some(fl))
    } else {
        (Mesh::new(data.vertices, tris)?, None)
    };
    let s = sampling::sample_surface(
        &mesh,
        opts.sample_count,
        opts.seed,
        face_labels.as_deref(),
        data.colors.as_deref(),
    )?;
    let mut cloud = LabeledCloud::new(s.points)?;
    if let Some(c) = s.colors {
        cloud = cloud.with_colors(c)?;
    }
    if let Some(l) = part_labels {
        let labels = match s.labels {
            Some(sampled) => sampled,
            None if l.labels.len() == cloud.len() => l.labels,
            None => {
                return Err(Error::LabelCountMismatch {
                    path: sidecar,
                    expected: cloud.len(),
                    found: l.labels.len(),
                })
            }
        };
        cloud = cloud.with_labels(labels, l.part_names)?;
    }
    let mesh = Some(mesh);
    Ok(LoadedObject { mesh, cloud })
}
