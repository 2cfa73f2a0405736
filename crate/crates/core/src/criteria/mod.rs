//! Yaw search against a category template and PCA polarity selection.

mod config;
mod energy;
mod horizontal;
mod pca_align;

pub use config::CriterionConfig;
pub use energy::{cyclic_local_minima, extrema_of_energy, shared_parts, smooth3, EnergyProfile, FLAT_TOLERANCE};
pub use horizontal::{
    horizontal_geometric, horizontal_semantic, horizontal_semantic_with, semantic_objective, HorizontalGeometric,
    HorizontalSemantic,
};
pub use pca_align::{pca_align, polarity_candidates, semantic_alignment_cost, PcaAlignment, POLARITIES};
