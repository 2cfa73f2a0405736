use std::collections::HashMap;
use std::path::PathBuf;
use std::process::Command;

use nalgebra::Point3;

use super::mesh::Mesh;
use super::support::SupportCandidate;
use crate::error::{Error, Result};
use crate::geometry::{LabeledCloud, Rotation};
use crate::io::ply;

/// Geometry the candidates were computed from, for scorers that need to
/// look at the posed object.
#[derive(Debug, Clone, Copy)]
pub struct UprightContext<'a> {
    pub points: &'a [Point3<f64>],
    pub mesh: Option<&'a Mesh>,
}

/// Ranks support candidates by how well each pose matches a human notion
/// of "upright". Higher is better.
pub trait UprightScorer: Send + Sync {
    fn score(&self, ctx: &UprightContext<'_>, candidates: &[SupportCandidate]) -> Result<Vec<f64>>;
}

/// `polygon_area - lambda * com_height`: broad footprints and low centers of mass win.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StabilityHeuristic {
    pub lambda: f64,
}

impl Default for StabilityHeuristic {
    fn default() -> Self {
        StabilityHeuristic { lambda: 1.0 }
    }
}

impl StabilityHeuristic {
    pub fn score_one(&self, c: &SupportCandidate) -> f64 {
        c.polygon_area - self.lambda * c.com_height
    }
}

impl UprightScorer for StabilityHeuristic {
    fn score(&self, _ctx: &UprightContext<'_>, candidates: &[SupportCandidate]) -> Result<Vec<f64>> {
        Ok(candidates.iter().map(|c| self.score_one(c)).collect())
    }
}

/// Delegates scoring to an external program.
///
/// The program is run as `program [args..] <preview_dir> <manifest>`. The
/// preview directory holds `candidate_<id>.ply`, the object under each
/// candidate rotation; the manifest lists `<id> <file name>` per line. The
/// program must print one `<id> <score>` line per candidate on stdout.
#[derive(Debug, Clone)]
pub struct ExternalCommandScorer {
    pub program: PathBuf,
    pub args: Vec<String>,
}

impl UprightScorer for ExternalCommandScorer {
    fn score(&self, ctx: &UprightContext<'_>, candidates: &[SupportCandidate]) -> Result<Vec<f64>> {
        let dir = tempfile::tempdir().map_err(|e| Error::Scorer(format!("temp dir: {e}")))?;
        let mut manifest = String::new();
        for (id, c) in candidates.iter().enumerate() {
            let name = format!("candidate_{id}.ply");
            write_preview(&dir.path().join(&name), ctx, &c.rotation)?;
            manifest.push_str(&format!("{id} {name}\n"));
        }
        let manifest_path = dir.path().join("manifest.txt");
        std::fs::write(&manifest_path, manifest).map_err(|e| Error::io(&manifest_path, e))?;

        let output = Command::new(&self.program)
            .args(&self.args)
            .arg(dir.path())
            .arg(&manifest_path)
            .output()
            .map_err(|e| Error::Scorer(format!("{}: {e}", self.program.display())))?;
        if !output.status.success() {
            return Err(Error::Scorer(format!(
                "{} exited with {}: {}",
                self.program.display(),
                output.status,
                String::from_utf8_lossy(&output.stderr).trim()
            )));
        }
        parse_scores(&String::from_utf8_lossy(&output.stdout), candidates.len())
    }
}

fn write_preview(path: &std::path::Path, ctx: &UprightContext<'_>, r: &Rotation) -> Result<()> {
    match ctx.mesh {
        Some(mesh) => ply::write_mesh(path, &mesh.rotated(r), ply::Encoding::Ascii),
        None => {
            let cloud = LabeledCloud::new(ctx.points.iter().map(|p| r.apply(p)).collect())?;
            ply::write_cloud(path, &cloud, ply::Encoding::Ascii)
        }
    }
}

fn parse_scores(stdout: &str, n: usize) -> Result<Vec<f64>> {
    let mut scores: HashMap<usize, f64> = HashMap::new();
    for line in stdout.lines().map(str::trim).filter(|l| !l.is_empty()) {
        let mut it = line.split_whitespace();
        let (Some(id), Some(score), None) = (it.next(), it.next(), it.next()) else {
            return Err(Error::Scorer(format!("malformed score line `{line}`")));
        };
        let id: usize = id
            .parse()
            .map_err(|_| Error::Scorer(format!("bad candidate id in `{line}`")))?;
        let score: f64 = score
            .parse()
            .map_err(|_| Error::Scorer(format!("bad score in `{line}`")))?;
        if id >= n {
            return Err(Error::Scorer(format!("unknown candidate id {id}")));
        }
        scores.insert(id, score);
    }
    (0..n)
        .map(|i| {
            scores
                .get(&i)
                .copied()
                .ok_or_else(|| Error::Scorer(format!("no score for candidate {i}")))
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UprightChoice {
    /// Index into the candidate list.
    pub index: usize,
    pub rotation: Rotation,
    pub score: f64,
}

/// Picks the equilibrium-valid candidate with the highest score; the first
/// one wins ties.
pub fn select_upright(
    candidates: &[SupportCandidate],
    scorer: &dyn UprightScorer,
    ctx: &UprightContext<'_>,
) -> Result<UprightChoice> {
    if !candidates.iter().any(|c| c.valid) {
        return Err(Error::NoStablePose);
    }
    let scores = scorer.score(ctx, candidates)?;
    if scores.len() != candidates.len() {
        return Err(Error::Scorer(format!(
            "scorer returned {} scores for {} candidates",
            scores.len(),
            candidates.len()
        )));
    }
    let mut best: Option<(usize, f64)> = None;
    for (i, (c, &s)) in candidates.iter().zip(&scores).enumerate() {
        if !c.valid || !s.is_finite() {
            continue;
        }
        if best.is_none_or(|(_, b)| s > b) {
            best = Some((i, s));
        }
    }
    let (index, score) = best.ok_or(Error::NoStablePose)?;
    Ok(UprightChoice {
        index,
        rotation: candidates[index].rotation,
        score,
    })
}
