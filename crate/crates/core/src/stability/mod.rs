//! Static-equilibrium upright candidates from convex-hull support facets.

mod hull;
mod mesh;
mod scorer;
mod support;

pub use hull::{convex_hull, HullFace};
pub use mesh::{box_mesh, center_of_mass, cylinder_mesh, CenterOfMass, MassEstimator, Mesh};
pub use scorer::{
    select_upright, ExternalCommandScorer, StabilityHeuristic, UprightChoice, UprightContext, UprightScorer,
};
pub use support::{
    convex_polygon, polygon_area, signed_margin, support_candidates, support_candidates_for_points,
    support_candidates_with, SupportCandidate, SupportConfig,
};
