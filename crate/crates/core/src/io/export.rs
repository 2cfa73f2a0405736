//! Writes the canonicalized dataset from annotations.

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::annotations::{latest_per_object, AnnotationRecord, Decision};
use super::manifest::ObjectManifest;
use super::object::{load_object, LoadOptions};
use super::poses::{write_poses, PoseRecord, PoseSource};
use super::records::CandidateRecord;
use super::{labels, ply};
use crate::error::{Error, Result};
use crate::geometry::{normalize_to_unit_sphere, rotate, Rotation};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExportOptions {
    pub load: LoadOptions,
    pub encoding: ply::Encoding,
}

impl Default for ExportOptions {
    fn default() -> Self {
        ExportOptions {
            load: LoadOptions::default(),
            encoding: ply::Encoding::BinaryLittleEndian,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ExportSummary {
    pub total: usize,
    pub retained: usize,
    pub retained_pct: f64,
    /// Discards by reason, e.g. `quality-thin-shell`.
    pub discarded: BTreeMap<String, usize>,
    /// Discards by group: quality, misclassified, pose, other.
    pub discard_groups: BTreeMap<String, usize>,
    pub selected_tags: BTreeMap<String, usize>,
    /// Records superseded by a later record for the same object.
    pub duplicates: usize,
}

/// Validates that every manifest object has a decision whose candidate hash
/// matches, then writes `clouds/<id>.ply` (+ `.labels`), `meshes/<id>.ply`
/// for mesh inputs, `poses.jsonl` and `summary.json` under `out_dir`.
/// Nothing is written if validation fails.
pub fn export_canonical(
    manifest: &ObjectManifest,
    candidates: &[CandidateRecord],
    annotations: &[AnnotationRecord],
    out_dir: &Path,
    opts: &ExportOptions,
) -> Result<ExportSummary> {
    let (latest, duplicates) = latest_per_object(annotations);
    if duplicates > 0 {
        tracing::warn!(duplicates, "objects annotated more than once; keeping the last record");
    }
    let decisions: HashMap<&str, &AnnotationRecord> = latest.iter().map(|r| (r.object_id.as_str(), *r)).collect();
    let records: HashMap<&str, &CandidateRecord> = candidates.iter().map(|c| (c.object_id.as_str(), c)).collect();

    let missing: Vec<&str> = manifest
        .objects
        .iter()
        .map(|o| o.id.as_str())
        .filter(|id| !decisions.contains_key(id))
        .collect();
    if let Some(first) = missing.first() {
        return Err(Error::ExportIncomplete {
            missing: missing.len(),
            first: first.to_string(),
        });
    }

    let mut summary = ExportSummary {
        total: manifest.len(),
        duplicates,
        ..Default::default()
    };
    let mut plan: Vec<(usize, Rotation)> = Vec::new();
    for (i, entry) in manifest.objects.iter().enumerate() {
        let a = decisions[entry.id.as_str()];
        match &a.decision {
            Decision::Select(tag) => {
                let rec = records.get(entry.id.as_str()).ok_or_else(|| {
                    Error::InvalidDecision(format!("no candidate record for `{}`", entry.id))
                })?;
                if rec.hash != a.candidate_set_hash {
                    return Err(Error::StaleAnnotation {
                        object_id: entry.id.clone(),
                    });
                }
                plan.push((i, rec.rotation(*tag)?));
                summary.retained += 1;
                *summary.selected_tags.entry(tag.to_string()).or_default() += 1;
            }
            Decision::Discard(reason) => {
                *summary.discarded.entry(reason.to_string()).or_default() += 1;
                let group = serde_json::to_value(reason.group()).expect("enum serializes");
                *summary
                    .discard_groups
                    .entry(group.as_str().unwrap_or_default().to_string())
                    .or_default() += 1;
            }
        }
    }
    summary.retained_pct = if summary.total == 0 {
        0.0
    } else {
        100.0 * summary.retained as f64 / summary.total as f64
    };

    let clouds = out_dir.join("clouds");
    let meshes = out_dir.join("meshes");
    fs::create_dir_all(&clouds).map_err(|e| Error::io(&clouds, e))?;
    let mut poses = Vec::with_capacity(plan.len());
    for (i, r) in plan {
        let entry = &manifest.objects[i];
        let loaded = load_object(&manifest.resolve(entry), &opts.load)?;
        let (cloud, t) = normalize_to_unit_sphere(&loaded.cloud)?;
        let canonical = rotate(&cloud, &r);
        let cloud_path = clouds.join(format!("{}.ply", entry.id));
        ply::write_cloud(&cloud_path, &canonical, opts.encoding)?;
        if let (Some(l), Some(names)) = (canonical.labels(), canonical.part_names()) {
            labels::write(&labels::sidecar_path(&cloud_path), names, l)?;
        }
        if let Some(mesh) = loaded.mesh {
            fs::create_dir_all(&meshes).map_err(|e| Error::io(&meshes, e))?;
            ply::write_mesh(
                &meshes.join(format!("{}.ply", entry.id)),
                &mesh.normalized_by(&t).rotated(&r),
                opts.encoding,
            )?;
        }
        poses.push(PoseRecord::new(entry.id.clone(), &r, PoseSource::Annotation));
    }
    write_poses(&out_dir.join("poses.jsonl"), &poses)?;
    let summary_path = out_dir.join("summary.json");
    let text = serde_json::to_string_pretty(&summary).map_err(|e| Error::InvalidInput(e.to_string()))?;
    fs::write(&summary_path, text + "\n").map_err(|e| Error::io(&summary_path, e))?;
    Ok(summary)
}
