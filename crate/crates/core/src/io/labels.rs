//! `.labels` sidecar: a `parts: name1,name2,...` header line followed by one
//! part index per line.

use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartLabels {
    pub part_names: Vec<String>,
    pub labels: Vec<u32>,
}

pub fn sidecar_path(object: &Path) -> PathBuf {
    object.with_extension("labels")
}

pub fn read(path: &Path) -> Result<PartLabels> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, head) = lines.next().ok_or_else(|| Error::parse(path, 1, "empty labels file"))?;
    let names = head
        .trim()
        .strip_prefix("parts:")
        .ok_or_else(|| Error::parse(path, 1, "expected `parts:` header"))?;
    let part_names: Vec<String> = names
        .split(',')
        .map(|s| s.trim().to_string())
        .filter(|s| !s.is_empty())
        .collect();
    let mut labels = Vec::new();
    for (i, line) in lines {
        let v: u32 = line
            .trim()
            .parse()
            .map_err(|_| Error::parse(path, i + 1, format!("bad label `{}`", line.trim())))?;
        if v as usize >= part_names.len() {
            return Err(Error::parse(
                path,
                i + 1,
                format!("label {v} out of range for {} parts", part_names.len()),
            ));
        }
        labels.push(v);
    }
    Ok(PartLabels { part_names, labels })
}

pub fn write(path: &Path, part_names: &[String], labels: &[u32]) -> Result<()> {
    let mut out = format!("parts: {}\n", part_names.join(","));
    for l in labels {
        out.push_str(&l.to_string());
        out.push('\n');
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}
