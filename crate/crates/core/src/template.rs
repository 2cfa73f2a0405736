use crate::error::Result;
use crate::geometry::{normalize_to_unit_sphere, LabeledCloud};
use crate::metrics::SymmetrySpec;

/// The reference instance that defines a category's canonical frame.
#[derive(Debug, Clone)]
pub struct CategoryTemplate {
    pub category: String,
    pub template_id: String,
    /// Normalized to the unit sphere.
    pub cloud: LabeledCloud,
    pub symmetry: SymmetrySpec,
    /// Free-text description of the axes, e.g. "z up, x front".
    pub axis_convention: String,
}

impl CategoryTemplate {
    /// Normalizes `cloud` to the unit sphere.
    pub fn new(
        category: impl Into<String>,
        template_id: impl Into<String>,
        cloud: &LabeledCloud,
        symmetry: SymmetrySpec,
        axis_convention: impl Into<String>,
    ) -> Result<Self> {
        let (cloud, _) = normalize_to_unit_sphere(cloud)?;
        Ok(CategoryTemplate {
            category: category.into(),
            template_id: template_id.into(),
            cloud,
            symmetry: symmetry.validated()?,
            axis_convention: axis_convention.into(),
        })
    }
}
