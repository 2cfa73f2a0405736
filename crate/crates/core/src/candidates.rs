//! The five candidate canonicalizing rotations offered to annotators.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::criteria::{
    horizontal_geometric, horizontal_semantic, horizontal_semantic_with, pca_align, polarity_candidates,
    CriterionConfig,
};
use crate::error::{Error, Result};
use crate::geometry::{rotate, LabeledCloud, Rotation};
use crate::stability::{
    select_upright, support_candidates_for_points, support_candidates_with, Mesh, SupportConfig, UprightContext,
    UprightScorer,
};
use crate::template::CategoryTemplate;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum CandidateTag {
    #[serde(rename = "HS")]
    Hs,
    #[serde(rename = "HG")]
    Hg,
    #[serde(rename = "HG_FLIP")]
    HgFlip,
    #[serde(rename = "SUP_HS")]
    SupHs,
    #[serde(rename = "PCA_HS")]
    PcaHs,
}

impl CandidateTag {
    /// Every tag, in the order candidates are emitted.
    pub const ALL: [CandidateTag; 5] = [
        CandidateTag::Hs,
        CandidateTag::Hg,
        CandidateTag::HgFlip,
        CandidateTag::SupHs,
        CandidateTag::PcaHs,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            CandidateTag::Hs => "HS",
            CandidateTag::Hg => "HG",
            CandidateTag::HgFlip => "HG_FLIP",
            CandidateTag::SupHs => "SUP_HS",
            CandidateTag::PcaHs => "PCA_HS",
        }
    }
}

impl fmt::Display for CandidateTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CandidateTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        CandidateTag::ALL
            .into_iter()
            .find(|t| t.as_str() == s)
            .ok_or_else(|| Error::InvalidInput(format!("unknown candidate tag `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct CandidateFlags {
    pub continuous_symmetry: bool,
    pub semantic_unavailable: bool,
    pub no_stable_pose: bool,
    pub pca_degenerate: bool,
}

/// Audit values attached to a candidate.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Diagnostics {
    /// Final yaw of the horizontal step, degrees.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theta_deg: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub geometric_energy: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub semantic_energy: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub com_margin: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pca_costs: Option<[f64; 4]>,
    /// Set when this entry repeats another candidate because its own
    /// branch failed.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fallback_of: Option<CandidateTag>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub tag: CandidateTag,
    /// Canonicalizing rotation: applied to the object, yields the canonical pose.
    pub rotation: Rotation,
    pub diagnostics: Diagnostics,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CandidateSet {
    pub object_id: String,
    /// Exactly one entry per tag, in [`CandidateTag::ALL`] order.
    pub candidates: Vec<Candidate>,
    pub flags: CandidateFlags,
}

impl CandidateSet {
    pub fn get(&self, tag: CandidateTag) -> &Candidate {
        self.candidates.iter().find(|c| c.tag == tag).expect("all tags present")
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CandidateConfig {
    pub criterion: CriterionConfig,
    pub support: SupportConfig,
    /// When set, the yaw searches run on stride-decimated copies of the
    /// object and template with at most this many points. PCA always uses
    /// the full clouds.
    pub search_points: Option<usize>,
}

/// Builds the five candidates for an object normalized to the unit sphere.
///
/// `mesh`, when given, must be in the same frame as `cloud`; without it the
/// support facets come from the hull of the cloud and the center of mass
/// is the point centroid.
pub fn generate_candidates(
    object_id: &str,
    mesh: Option<&Mesh>,
    cloud: &LabeledCloud,
    template: &CategoryTemplate,
    cfg: &CandidateConfig,
    scorer: &dyn UprightScorer,
) -> Result<CandidateSet> {
    let crit = &cfg.criterion;
    let mut flags = CandidateFlags::default();
    let (search_cloud, search_template) = match cfg.search_points {
        Some(n) => (
            cloud.decimated(n),
            CategoryTemplate {
                cloud: template.cloud.decimated(n),
                ..template.clone()
            },
        ),
        None => (cloud.clone(), template.clone()),
    };
    let (cloud_s, template_s) = (&search_cloud, &search_template);

    let g = horizontal_geometric(cloud_s, template_s, crit)?;
    flags.continuous_symmetry = g.continuous_symmetry;
    let hg = Candidate {
        tag: CandidateTag::Hg,
        rotation: g.r_g,
        diagnostics: Diagnostics {
            theta_deg: Some(g.theta.to_degrees()),
            geometric_energy: Some(g.energy),
            ..Default::default()
        },
    };
    let hg_flip = Candidate {
        tag: CandidateTag::HgFlip,
        rotation: g.r_invg,
        diagnostics: Diagnostics {
            theta_deg: Some((g.theta + std::f64::consts::PI).rem_euclid(std::f64::consts::TAU).to_degrees()),
            ..Default::default()
        },
    };

    let hs = match horizontal_semantic_with(cloud_s, template_s, &g.profile, crit) {
        Ok(s) => Candidate {
            tag: CandidateTag::Hs,
            rotation: s.r_s,
            diagnostics: Diagnostics {
                theta_deg: Some(s.theta.to_degrees()),
                semantic_energy: Some(s.semantic_energy),
                ..Default::default()
            },
        },
        Err(Error::SemanticUnavailable) => {
            flags.semantic_unavailable = true;
            Candidate {
                tag: CandidateTag::Hs,
                diagnostics: Diagnostics {
                    fallback_of: Some(CandidateTag::Hg),
                    ..hg.diagnostics.clone()
                },
                ..hg.clone()
            }
        }
        Err(e) => return Err(e),
    };

    let sup = match upright(mesh, cloud, &cfg.support, scorer) {
        Ok((r_sup, margin)) => {
            let mut c = vertical_then_semantic(CandidateTag::SupHs, cloud_s, template_s, crit, r_sup)?;
            c.diagnostics.com_margin = Some(margin);
            c
        }
        Err(Error::NoStablePose) => {
            flags.no_stable_pose = true;
            fallback(CandidateTag::SupHs, &hs)
        }
        Err(e) => return Err(e),
    };

    let pca = match pca_align(cloud, template) {
        Ok(a) => {
            let mut c = vertical_then_semantic(CandidateTag::PcaHs, cloud_s, template_s, crit, a.r_pca)?;
            c.diagnostics.pca_costs = Some(a.costs);
            c
        }
        Err(Error::PcaDegenerate(_)) => {
            flags.pca_degenerate = true;
            fallback(CandidateTag::PcaHs, &hs)
        }
        Err(Error::SemanticUnavailable) => {
            // No parts to choose a polarity with: keep the unflipped frame.
            let r = polarity_candidates(cloud, template)?[0];
            vertical_then_semantic(CandidateTag::PcaHs, cloud_s, template_s, crit, r)?
        }
        Err(e) => return Err(e),
    };

    Ok(CandidateSet {
        object_id: object_id.to_string(),
        candidates: vec![hs, hg, hg_flip, sup, pca],
        flags,
    })
}

fn fallback(tag: CandidateTag, of: &Candidate) -> Candidate {
    Candidate {
        tag,
        rotation: of.rotation,
        diagnostics: Diagnostics {
            fallback_of: Some(of.tag),
            ..of.diagnostics.clone()
        },
    }
}

/// `R_S' · R_v`, with `R_S'` solved on the object after `R_v`. Without
/// shared parts the vertical rotation is used alone.
fn vertical_then_semantic(
    tag: CandidateTag,
    cloud: &LabeledCloud,
    template: &CategoryTemplate,
    crit: &CriterionConfig,
    r_v: Rotation,
) -> Result<Candidate> {
    let upright = rotate(cloud, &r_v);
    match horizontal_semantic(&upright, template, crit) {
        Ok(s) => Ok(Candidate {
            tag,
            rotation: s.r_s * r_v,
            diagnostics: Diagnostics {
                theta_deg: Some(s.theta.to_degrees()),
                semantic_energy: Some(s.semantic_energy),
                ..Default::default()
            },
        }),
        Err(Error::SemanticUnavailable) => Ok(Candidate {
            tag,
            rotation: r_v,
            diagnostics: Diagnostics::default(),
        }),
        Err(e) => Err(e),
    }
}

/// Best-scoring stable resting pose and its center-of-mass margin.
fn upright(
    mesh: Option<&Mesh>,
    cloud: &LabeledCloud,
    cfg: &SupportConfig,
    scorer: &dyn UprightScorer,
) -> Result<(Rotation, f64)> {
    let candidates = match mesh.filter(|m| !m.is_empty()) {
        Some(m) => support_candidates_with(m, cfg)?.0,
        None => {
            let com = cloud
                .centroid()
                .ok_or_else(|| Error::InvalidInput("empty cloud".into()))?;
            support_candidates_for_points(cloud.points(), &com, cfg)?
        }
    };
    let ctx = UprightContext {
        points: cloud.points(),
        mesh,
    };
    let choice = select_upright(&candidates, scorer, &ctx)?;
    Ok((choice.rotation, candidates[choice.index].com_margin))
}
