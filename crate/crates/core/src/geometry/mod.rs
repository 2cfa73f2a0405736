//! Point clouds, rotations, nearest-neighbor search, Chamfer distance and PCA.

mod chamfer;
mod cloud;
mod kdtree;
mod pca;
mod rotation;

pub use chamfer::{chamfer_distance, mean_nearest_squared, ChamferPair, PairHints};
pub use cloud::{normalize_to_unit_sphere, rotate, LabeledCloud, NormalizationTransform};
pub use kdtree::{squared_distance, PointIndex, NO_HINT};
pub use pca::{principal_axes, principal_axes_of, PcaFrame, AMBIGUOUS_EIGENGAP};
pub use rotation::{geodesic_angle, geodesic_angle_rad, wrap_angle, wrapped_distance, Rotation};
