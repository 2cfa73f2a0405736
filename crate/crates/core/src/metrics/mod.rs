//! Symmetry-aware pose error and evaluation metrics.

mod consistency;
mod summary;
mod symmetry;

pub use consistency::{
    gt_equivariance_consistency, instance_consistency, Canonicalizer, ConsistencyReport, Instance, Perturbation,
};
pub use summary::{accuracy_at, iqr, mean_abs_error, quantile, AngularError, ErrorSample, MetricReport};
pub use symmetry::{sym_aware_angle, sym_aware_canonical_angle, SymmetrySpec};
