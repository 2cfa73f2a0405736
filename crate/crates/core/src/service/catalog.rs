//! Everything the service shows annotators, loaded once at startup.

use std::collections::{BTreeMap, HashMap};

use serde::Serialize;

use crate::candidates::CandidateFlags;
use crate::error::{Error, Result};
use crate::geometry::{normalize_to_unit_sphere, LabeledCloud};
use crate::io::{load_object, CandidateEntry, CandidateRecord, LoadOptions, ObjectManifest, TemplateRegistry};
use crate::template::CategoryTemplate;

#[derive(Debug, Clone)]
pub struct ServiceObject {
    pub id: String,
    pub category: String,
    pub record: CandidateRecord,
    /// Normalized object cloud, decimated for display.
    pub preview: LabeledCloud,
}

#[derive(Debug, Clone)]
pub struct TemplatePreview {
    pub template_id: String,
    pub axis_convention: String,
    pub cloud: LabeledCloud,
}

impl TemplatePreview {
    pub fn from_template(t: &CategoryTemplate, max_points: usize) -> Self {
        TemplatePreview {
            template_id: t.template_id.clone(),
            axis_convention: t.axis_convention.clone(),
            cloud: t.cloud.decimated(max_points),
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct Catalog {
    objects: Vec<ServiceObject>,
    index: HashMap<String, usize>,
    templates: HashMap<String, TemplatePreview>,
}

impl Catalog {
    /// Objects are dispatched in the order given.
    pub fn new(objects: Vec<ServiceObject>, templates: HashMap<String, TemplatePreview>) -> Result<Self> {
        let mut index = HashMap::with_capacity(objects.len());
        for (i, o) in objects.iter().enumerate() {
            if o.record.object_id != o.id {
                return Err(Error::InvalidInput(format!(
                    "candidate record `{}` attached to object `{}`",
                    o.record.object_id, o.id
                )));
            }
            if !templates.contains_key(&o.category) {
                return Err(Error::UnregisteredCategory(o.category.clone()));
            }
            if index.insert(o.id.clone(), i).is_some() {
                return Err(Error::InvalidInput(format!("duplicate object id `{}`", o.id)));
            }
        }
        Ok(Catalog {
            objects,
            index,
            templates,
        })
    }

    /// Loads and normalizes every manifest object and pairs it with its
    /// candidate record.
    pub fn load(
        manifest: &ObjectManifest,
        registry: &TemplateRegistry,
        records: &[CandidateRecord],
        load: &LoadOptions,
        preview_points: usize,
    ) -> Result<Self> {
        let by_id: HashMap<&str, &CandidateRecord> = records.iter().map(|r| (r.object_id.as_str(), r)).collect();
        let mut objects = Vec::with_capacity(manifest.len());
        let mut templates = HashMap::new();
        for entry in &manifest.objects {
            let record = by_id
                .get(entry.id.as_str())
                .ok_or_else(|| Error::InvalidInput(format!("no candidate record for `{}`", entry.id)))?;
            let template = registry.get(&entry.category)?;
            templates
                .entry(entry.category.clone())
                .or_insert_with(|| TemplatePreview::from_template(template, preview_points));
            let loaded = load_object(&manifest.resolve(entry), load)?;
            let (cloud, _) = normalize_to_unit_sphere(&loaded.cloud)?;
            objects.push(ServiceObject {
                id: entry.id.clone(),
                category: entry.category.clone(),
                record: (*record).clone(),
                preview: cloud.decimated(preview_points),
            });
        }
        Catalog::new(objects, templates)
    }

    pub fn ids(&self) -> Vec<String> {
        self.objects.iter().map(|o| o.id.clone()).collect()
    }

    pub fn get(&self, id: &str) -> Option<&ServiceObject> {
        self.index.get(id).map(|&i| &self.objects[i])
    }

    pub fn len(&self) -> usize {
        self.objects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.objects.is_empty()
    }

    pub fn payload(&self, id: &str) -> Option<ObjectPayload> {
        let o = self.get(id)?;
        let t = &self.templates[&o.category];
        let mut colors = BTreeMap::new();
        for name in t.cloud.part_names().into_iter().chain(o.preview.part_names()).flatten() {
            let next = colors.len();
            colors.entry(name.clone()).or_insert_with(|| palette(next));
        }
        Some(ObjectPayload {
            object_id: o.id.clone(),
            category: o.category.clone(),
            candidate_set_hash: o.record.hash.clone(),
            object: CloudPayload::from(&o.preview),
            candidates: o.record.candidates.clone(),
            flags: o.record.flags,
            template: TemplatePayload {
                template_id: t.template_id.clone(),
                axis_convention: t.axis_convention.clone(),
                cloud: CloudPayload::from(&t.cloud),
            },
            part_colors: colors,
        })
    }
}

/// Points as a flat `[x0, y0, z0, x1, ...]` array.
#[derive(Debug, Clone, Serialize)]
pub struct CloudPayload {
    pub points: Vec<f32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<u32>>,
    pub part_names: Vec<String>,
}

impl From<&LabeledCloud> for CloudPayload {
    fn from(c: &LabeledCloud) -> Self {
        CloudPayload {
            points: c.points().iter().flat_map(|p| [p.x as f32, p.y as f32, p.z as f32]).collect(),
            labels: c.labels().map(<[u32]>::to_vec),
            part_names: c.part_names().map(<[String]>::to_vec).unwrap_or_default(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TemplatePayload {
    pub template_id: String,
    pub axis_convention: String,
    #[serde(flatten)]
    pub cloud: CloudPayload,
}

#[derive(Debug, Clone, Serialize)]
pub struct ObjectPayload {
    pub object_id: String,
    pub category: String,
    pub candidate_set_hash: String,
    pub object: CloudPayload,
    pub candidates: Vec<CandidateEntry>,
    pub flags: CandidateFlags,
    pub template: TemplatePayload,
    /// RGB in `[0, 1]` per part name, shared by object and template.
    pub part_colors: BTreeMap<String, [f32; 3]>,
}

fn palette(i: usize) -> [f32; 3] {
    const COLORS: [[f32; 3]; 10] = [
        [0.894, 0.102, 0.110],
        [0.216, 0.494, 0.722],
        [0.302, 0.686, 0.290],
        [0.596, 0.306, 0.639],
        [1.000, 0.498, 0.000],
        [0.651, 0.337, 0.157],
        [0.969, 0.506, 0.749],
        [0.600, 0.600, 0.600],
        [0.090, 0.745, 0.812],
        [0.737, 0.741, 0.133],
    ];
    COLORS[i % COLORS.len()]
}
