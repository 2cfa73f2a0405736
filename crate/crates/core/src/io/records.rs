//! Candidate-set records: one JSON object per line.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::candidates::{Candidate, CandidateFlags, CandidateSet, CandidateTag, Diagnostics};
use crate::error::{Error, Result};
use crate::geometry::{NormalizationTransform, Rotation};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateEntry {
    pub tag: CandidateTag,
    /// Canonicalizing rotation as a unit quaternion `(w, x, y, z)`, `w >= 0`.
    pub quaternion: [f64; 4],
    #[serde(default)]
    pub diagnostics: Diagnostics,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateRecord {
    pub object_id: String,
    pub category: String,
    pub candidates: Vec<CandidateEntry>,
    #[serde(default)]
    pub flags: CandidateFlags,
    /// Maps loaded coordinates to the unit-sphere frame the rotations act in.
    pub normalization: NormalizationRecord,
    pub hash: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalizationRecord {
    pub translation: [f64; 3],
    pub scale: f64,
}

impl From<&NormalizationTransform> for NormalizationRecord {
    fn from(t: &NormalizationTransform) -> Self {
        NormalizationRecord {
            translation: t.translation.into(),
            scale: t.scale,
        }
    }
}

impl CandidateRecord {
    pub fn new(category: &str, set: &CandidateSet, normalization: &NormalizationTransform) -> Self {
        let candidates: Vec<CandidateEntry> = set
            .candidates
            .iter()
            .map(|c| CandidateEntry {
                tag: c.tag,
                quaternion: c.rotation.to_quaternion_wxyz(),
                diagnostics: c.diagnostics.clone(),
            })
            .collect();
        let hash = candidate_set_hash(&set.object_id, &candidates);
        CandidateRecord {
            object_id: set.object_id.clone(),
            category: category.to_string(),
            candidates,
            flags: set.flags,
            normalization: normalization.into(),
            hash,
        }
    }

    /// Checks the five tags and the stored hash.
    pub fn validate(&self) -> Result<()> {
        let tags: Vec<_> = self.candidates.iter().map(|c| c.tag).collect();
        if tags != CandidateTag::ALL {
            return Err(Error::InvalidInput(format!(
                "`{}`: candidate tags {tags:?} are not the five fixed tags",
                self.object_id
            )));
        }
        if candidate_set_hash(&self.object_id, &self.candidates) != self.hash {
            return Err(Error::InvalidInput(format!("`{}`: candidate hash mismatch", self.object_id)));
        }
        Ok(())
    }

    pub fn rotation(&self, tag: CandidateTag) -> Result<Rotation> {
        let c = self
            .candidates
            .iter()
            .find(|c| c.tag == tag)
            .ok_or_else(|| Error::InvalidDecision(format!("`{}` has no candidate {tag}", self.object_id)))?;
        Rotation::from_quaternion_wxyz(c.quaternion)
    }

    pub fn to_candidate_set(&self) -> Result<CandidateSet> {
        let candidates = self
            .candidates
            .iter()
            .map(|c| {
                Ok(Candidate {
                    tag: c.tag,
                    rotation: Rotation::from_quaternion_wxyz(c.quaternion)?,
                    diagnostics: c.diagnostics.clone(),
                })
            })
            .collect::<Result<_>>()?;
        Ok(CandidateSet {
            object_id: self.object_id.clone(),
            candidates,
            flags: self.flags,
        })
    }
}

/// SHA-256 over `object_id` and, per candidate, `TAG:w,x,y,z;` with each
/// component written as `{:.16e}`, so the value does not depend on the
/// platform's float formatting or memory layout.
pub fn candidate_set_hash(object_id: &str, candidates: &[CandidateEntry]) -> String {
    let mut text = String::new();
    text.push_str(object_id);
    text.push('\n');
    for c in candidates {
        let [w, x, y, z] = c.quaternion;
        text.push_str(&format!("{}:{w:.16e},{x:.16e},{y:.16e},{z:.16e};", c.tag));
    }
    hex::encode(Sha256::digest(text.as_bytes()))
}

pub fn write_candidate_records(path: &Path, records: &[CandidateRecord]) -> Result<()> {
    let mut out = Vec::new();
    for r in records {
        serde_json::to_writer(&mut out, r).map_err(|e| Error::InvalidInput(e.to_string()))?;
        out.push(b'\n');
    }
    let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(&out).map_err(|e| Error::io(path, e))?;
    f.sync_all().map_err(|e| Error::io(path, e))
}

/// Reads and validates every record.
pub fn read_candidate_records(path: &Path) -> Result<Vec<CandidateRecord>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let r: CandidateRecord = serde_json::from_str(line).map_err(|e| Error::parse(path, i + 1, e.to_string()))?;
        r.validate().map_err(|e| Error::parse(path, i + 1, e.to_string()))?;
        out.push(r);
    }
    Ok(out)
}
