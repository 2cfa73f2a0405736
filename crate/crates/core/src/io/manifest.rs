//! Object manifest, stored as TOML:
//!
//! ```toml
//! [[object]]
//! id = "chair-0001"
//! path = "objects/chair-0001.ply"
//! category = "chair"
//! ```
//!
//! Paths are relative to the manifest file. Order is dispatch order.

use std::collections::HashSet;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::registry::toml_error;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestEntry {
    pub id: String,
    pub path: PathBuf,
    pub category: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
struct ManifestFile {
    #[serde(default)]
    object: Vec<ManifestEntry>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ObjectManifest {
    /// Directory relative paths are resolved against.
    pub root: PathBuf,
    pub objects: Vec<ManifestEntry>,
}

impl ObjectManifest {
    pub fn new(root: impl Into<PathBuf>, objects: Vec<ManifestEntry>) -> Result<Self> {
        let mut seen = HashSet::new();
        for o in &objects {
            if o.id.is_empty() {
                return Err(Error::InvalidInput("manifest entry with empty id".into()));
            }
            if !seen.insert(o.id.as_str()) {
                return Err(Error::InvalidInput(format!("duplicate object id `{}`", o.id)));
            }
        }
        Ok(ObjectManifest {
            root: root.into(),
            objects,
        })
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let file: ManifestFile = toml::from_str(&text).map_err(|e| toml_error(path, &text, e))?;
        ObjectManifest::new(path.parent().unwrap_or(Path::new(".")), file.object)
    }

    /// Writes the entries with paths as given.
    pub fn write(&self, path: &Path) -> Result<()> {
        let file = ManifestFile {
            object: self.objects.clone(),
        };
        let text = toml::to_string(&file).map_err(|e| Error::InvalidInput(e.to_string()))?;
        fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    pub fn resolve(&self, entry: &ManifestEntry) -> PathBuf {
        self.root.join(&entry.path)
    }

    pub fn get(&self, id: &str) -> Option<&ManifestEntry> {
        self.objects.iter().find(|o| o.id == id)
    }

    pub fn len(&self) -> usize {
        self.objects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.objects.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_and_duplicates() {
        let dir = tempfile::tempdir().unwrap();
        let m = ObjectManifest::new(
            dir.path(),
            vec![
                ManifestEntry {
                    id: "a".into(),
                    path: "a.ply".into(),
                    category: "mug".into(),
                },
                ManifestEntry {
                    id: "b".into(),
                    path: "sub/b.obj".into(),
                    category: "chair".into(),
                },
            ],
        )
        .unwrap();
        let p = dir.path().join("manifest.toml");
        m.write(&p).unwrap();
        let back = ObjectManifest::read(&p).unwrap();
        assert_eq!(back, m);
        assert_eq!(back.resolve(&back.objects[1]), dir.path().join("sub/b.obj"));

        let dup = vec![back.objects[0].clone(), back.objects[0].clone()];
        assert!(ObjectManifest::new(".", dup).is_err());
    }

    #[test]
    fn parse_error_names_line() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("m.toml");
        fs::write(&p, "[[object]]\nid = \"a\"\npath = 3\ncategory = \"x\"\n").unwrap();
        match ObjectManifest::read(&p) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
    }
}
