//! Pose records: `{"object_id", "rotation": [w, x, y, z], "source"}` per line.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Rotation;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PoseSource {
    Annotation,
    Prediction,
    GroundTruth,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawPose")]
pub struct PoseRecord {
    pub object_id: String,
    /// Unit quaternion `(w, x, y, z)`.
    pub rotation: [f64; 4],
    pub source: PoseSource,
}

#[derive(Deserialize)]
struct RawPose {
    object_id: String,
    rotation: [f64; 4],
    source: PoseSource,
}

impl TryFrom<RawPose> for PoseRecord {
    type Error = Error;

    fn try_from(r: RawPose) -> Result<Self> {
        Rotation::from_quaternion_wxyz(r.rotation)?;
        Ok(PoseRecord {
            object_id: r.object_id,
            rotation: r.rotation,
            source: r.source,
        })
    }
}

impl PoseRecord {
    pub fn new(object_id: impl Into<String>, rotation: &Rotation, source: PoseSource) -> Self {
        PoseRecord {
            object_id: object_id.into(),
            rotation: rotation.to_quaternion_wxyz(),
            source,
        }
    }

    pub fn to_rotation(&self) -> Result<Rotation> {
        Rotation::from_quaternion_wxyz(self.rotation)
    }
}

pub fn write_poses(path: &Path, poses: &[PoseRecord]) -> Result<()> {
    let mut out = Vec::new();
    for p in poses {
        serde_json::to_writer(&mut out, p).map_err(|e| Error::InvalidInput(e.to_string()))?;
        out.push(b'\n');
    }
    let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(&out).map_err(|e| Error::io(path, e))
}

pub fn read_poses(path: &Path) -> Result<Vec<PoseRecord>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| serde_json::from_str(l).map_err(|e| Error::parse(path, i + 1, e.to_string())))
        .collect()
}
