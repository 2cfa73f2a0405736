use nalgebra::Matrix3;

use super::energy::{shared_parts, FLAT_TOLERANCE};
use crate::error::{Error, Result};
use crate::geometry::{chamfer_distance, principal_axes, LabeledCloud, PcaFrame, Rotation};
use crate::template::CategoryTemplate;

/// Sign pairs applied to the object's first two principal axes.
pub const POLARITIES: [(f64, f64); 4] = [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)];

#[derive(Debug, Clone)]
pub struct PcaAlignment {
    pub r_pca: Rotation,
    /// Index into [`POLARITIES`] of the chosen rotation.
    pub chosen: usize,
    pub candidates: [Rotation; 4],
    /// Mean per-part Chamfer distance for each candidate.
    pub costs: [f64; 4],
    /// All four costs agree within tolerance; `chosen` is then 0.
    pub ambiguous: bool,
}

/// The four rotations taking the object's principal frame, under each sign
/// flip of its first two axes, onto the template's.
pub fn polarity_candidates(object: &LabeledCloud, template: &CategoryTemplate) -> Result<[Rotation; 4]> {
    let fo = frame(object)?;
    let ft = frame(&template.cloud)?;
    let t = Matrix3::from_columns(&[ft.v1, ft.v2, ft.v1.cross(&ft.v2)]);
    let mut out = [Rotation::identity(); 4];
    for (slot, &(s1, s2)) in out.iter_mut().zip(&POLARITIES) {
        let a = fo.v1 * s1;
        let b = fo.v2 * s2;
        let o = Matrix3::from_columns(&[a, b, a.cross(&b)]);
        *slot = Rotation::from_matrix(t * o.transpose())?;
    }
    Ok(out)
}

fn frame(cloud: &LabeledCloud) -> Result<PcaFrame> {
    let f = principal_axes(cloud).map_err(|e| match e {
        Error::DegenerateGeometry(m) => Error::PcaDegenerate(m),
        other => other,
    })?;
    if f.degenerate {
        return Err(Error::PcaDegenerate(format!(
            "near-equal eigenvalues {:?}",
            f.eigenvalues
        )));
    }
    Ok(f)
}

/// Mean over shared parts of `CD(S_k^t, R S_k^o)`.
pub fn semantic_alignment_cost(object: &LabeledCloud, template: &CategoryTemplate, r: &Rotation) -> Result<f64> {
    let parts = shared_parts(&template.cloud, object);
    if parts.is_empty() {
        return Err(Error::SemanticUnavailable);
    }
    let mut sum = 0.0;
    for (_, t, o) in &parts {
        let moved: Vec<_> = o.iter().map(|p| r.apply(p)).collect();
        sum += chamfer_distance(t, &moved)?;
    }
    Ok(sum / parts.len() as f64)
}

/// Picks the polarity whose rotation best aligns the shared parts.
pub fn pca_align(object: &LabeledCloud, template: &CategoryTemplate) -> Result<PcaAlignment> {
    let candidates = polarity_candidates(object, template)?;
    if shared_parts(&template.cloud, object).is_empty() {
        return Err(Error::SemanticUnavailable);
    }
    let mut costs = [0.0; 4];
    for (c, r) in costs.iter_mut().zip(&candidates) {
        *c = semantic_alignment_cost(object, template, r)?;
    }
    let (lo, hi) = costs
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)));
    let ambiguous = hi - lo < FLAT_TOLERANCE;
    let chosen = if ambiguous {
        0
    } else {
        (0..4).fold(0, |best, i| if costs[i] < costs[best] { i } else { best })
    };
    Ok(PcaAlignment {
        r_pca: candidates[chosen],
        chosen,
        candidates,
        costs,
        ambiguous,
    })
}
