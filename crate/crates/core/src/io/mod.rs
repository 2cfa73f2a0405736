//! Mesh and point-cloud files, registries, manifests and record logs.

pub mod annotations;
mod export;
pub mod labels;
mod manifest;
pub mod obj;
mod object;
pub mod ply;
mod poses;
mod records;
mod registry;
pub mod sampling;

pub use annotations::{
    latest_per_object,
    append_annotation, read_annotations, AnnotationLog, AnnotationRecord, AnnotationStats, Decision, DiscardGroup,
    DiscardReason, LogContents,
};
pub use export::{export_canonical, ExportOptions, ExportSummary};
pub use manifest::{ManifestEntry, ObjectManifest};
pub use object::{load_object, LoadOptions, LoadedObject};
pub use poses::{read_poses, write_poses, PoseRecord, PoseSource};
pub use records::{
    candidate_set_hash, read_candidate_records, write_candidate_records, CandidateEntry, CandidateRecord,
    NormalizationRecord,
};
pub use registry::{
    load_template_registry, read_registry_file, RegistryEntry, RegistryFile, SymmetryKind, TemplateRegistry,
};
pub(crate) use registry::toml_error;
