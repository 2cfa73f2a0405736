//! Category → template registry, stored as TOML:
//!
//! ```toml
//! [[category]]
//! name = "mug"
//! template = "templates/mug.ply"
//! axis_convention = "z up, x toward the handle"
//! symmetry = "discrete"          # "none" (default), "continuous" or "discrete"
//! symmetry_axis = [0.0, 0.0, 1.0]
//! symmetry_angle_deg = 180.0
//! ```
//!
//! Template paths are relative to the registry file.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::object::{load_object, LoadOptions};
use crate::error::{Error, Result};
use crate::metrics::SymmetrySpec;
use crate::template::CategoryTemplate;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SymmetryKind {
    #[default]
    None,
    Continuous,
    Discrete,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegistryEntry {
    pub name: String,
    pub template: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub template_id: Option<String>,
    #[serde(default)]
    pub axis_convention: String,
    #[serde(default)]
    pub symmetry: SymmetryKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub symmetry_axis: Option<[f64; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub symmetry_angle_deg: Option<f64>,
}

impl RegistryEntry {
    pub fn symmetry_spec(&self) -> Result<SymmetrySpec> {
        let axis = || {
            self.symmetry_axis.ok_or_else(|| {
                Error::InvalidInput(format!("category `{}`: symmetry_axis is required", self.name))
            })
        };
        match self.symmetry {
            SymmetryKind::None => Ok(SymmetrySpec::None),
            SymmetryKind::Continuous => SymmetrySpec::continuous(axis()?),
            SymmetryKind::Discrete => {
                let angle = self.symmetry_angle_deg.ok_or_else(|| {
                    Error::InvalidInput(format!("category `{}`: symmetry_angle_deg is required", self.name))
                })?;
                SymmetrySpec::discrete(axis()?, angle)
            }
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegistryFile {
    #[serde(default)]
    pub category: Vec<RegistryEntry>,
}

#[derive(Debug, Clone, Default)]
pub struct TemplateRegistry {
    templates: BTreeMap<String, CategoryTemplate>,
}

impl TemplateRegistry {
    pub fn insert(&mut self, template: CategoryTemplate) -> Result<()> {
        if self.templates.contains_key(&template.category) {
            return Err(Error::InvalidInput(format!(
                "category `{}` registered twice",
                template.category
            )));
        }
        self.templates.insert(template.category.clone(), template);
        Ok(())
    }

    pub fn get(&self, category: &str) -> Result<&CategoryTemplate> {
        self.templates
            .get(category)
            .ok_or_else(|| Error::UnregisteredCategory(category.to_string()))
    }

    pub fn categories(&self) -> impl Iterator<Item = &str> {
        self.templates.keys().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.templates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.templates.is_empty()
    }
}

pub fn read_registry_file(path: &Path) -> Result<RegistryFile> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    toml::from_str(&text).map_err(|e| toml_error(path, &text, e))
}

/// Reads the registry and loads and normalizes every template.
pub fn load_template_registry(path: &Path, opts: &LoadOptions) -> Result<TemplateRegistry> {
    let file = read_registry_file(path)?;
    let base = path.parent().unwrap_or(Path::new("."));
    let mut registry = TemplateRegistry::default();
    for entry in &file.category {
        let template_path = base.join(&entry.template);
        let loaded = load_object(&template_path, opts)?;
        let id = entry.template_id.clone().unwrap_or_else(|| {
            template_path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_default()
        });
        registry.insert(CategoryTemplate::new(
            entry.name.clone(),
            id,
            &loaded.cloud,
            entry.symmetry_spec()?,
            entry.axis_convention.clone(),
        )?)?;
    }
    Ok(registry)
}

pub(crate) fn toml_error(path: &Path, text: &str, e: toml::de::Error) -> Error {
    let line = e
        .span()
        .map(|s| text[..s.start.min(text.len())].matches('\n').count() + 1)
        .unwrap_or(0);
    Error::parse(path, line, e.message())
}
