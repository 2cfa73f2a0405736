//! C interface to the canonicalization engine.
//!
//! Objects cross the boundary as opaque handles created by a `*_new` or
//! `*_load` function and released with the matching `*_free`. Every fallible
//! call returns a [`CanoStatus`]; on failure a message is kept per thread and
//! can be copied out with [`cano_last_error_message`]. Outputs are written
//! only on success.
//!
//! Objects passed to the criteria are normalized to the unit sphere first,
//! as the loaders and the CLI do.

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use cano_core::candidates::{generate_candidates, CandidateSet, CandidateTag};
use cano_core::config::AppConfig;
use cano_core::criteria::{horizontal_geometric, CriterionConfig};
use cano_core::geometry::{chamfer_distance, normalize_to_unit_sphere, LabeledCloud, Rotation};
use cano_core::io::{load_object, LoadOptions};
use cano_core::metrics::{sym_aware_angle, SymmetrySpec};
use cano_core::stability::Mesh;
use cano_core::{CategoryTemplate, Error};
use nalgebra::Point3;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CanoStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidInput = 2,
    DegenerateGeometry = 3,
    NoStablePose = 4,
    SemanticUnavailable = 5,
    PcaDegenerate = 6,
    Io = 7,
    Parse = 8,
    UnsupportedFormat = 9,
    LabelCountMismatch = 10,
    BufferTooSmall = 11,
    Panic = 12,
    Other = 13,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CanoTag {
    Hs = 0,
    Hg = 1,
    HgFlip = 2,
    SupHs = 3,
    PcaHs = 4,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CanoSymmetry {
    None = 0,
    Discrete = 1,
    Continuous = 2,
}

/// A point cloud with optional part labels, plus the mesh it was sampled from.
pub struct CanoCloud {
    cloud: LabeledCloud,
    mesh: Option<Mesh>,
}

pub struct CanoTemplate {
    template: CategoryTemplate,
}

pub struct CanoCandidateSet {
    set: CandidateSet,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Failure(CanoStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::InvalidInput(_) | Error::UnregisteredCategory(_) => CanoStatus::InvalidInput,
            Error::DegenerateGeometry(_) => CanoStatus::DegenerateGeometry,
            Error::NoStablePose => CanoStatus::NoStablePose,
            Error::SemanticUnavailable => CanoStatus::SemanticUnavailable,
            Error::PcaDegenerate(_) => CanoStatus::PcaDegenerate,
            Error::Io { .. } => CanoStatus::Io,
            Error::Parse { .. } => CanoStatus::Parse,
            Error::UnsupportedFormat { .. } => CanoStatus::UnsupportedFormat,
            Error::LabelCountMismatch { .. } => CanoStatus::LabelCountMismatch,
            _ => CanoStatus::Other,
        };
        Failure(status, e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(CanoStatus::NullPointer, format!("`{what}` is null"))
}

fn set_last_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> CanoStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => CanoStatus::Ok,
        Ok(Err(Failure(status, message))) => {
            set_last_error(message);
            status
        }
        Err(payload) => {
            let message = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(format!("panic: {message}"));
            CanoStatus::Panic
        }
    }
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn out<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn string(p: *const c_char, what: &str) -> Result<String, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map(str::to_owned)
        .map_err(|_| Failure(CanoStatus::InvalidInput, format!("`{what}` is not UTF-8")))
}

unsafe fn quaternion(p: *const f64, what: &str) -> Result<Rotation, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    let q = std::slice::from_raw_parts(p, 4);
    Ok(Rotation::from_quaternion_wxyz([q[0], q[1], q[2], q[3]])?)
}

unsafe fn symmetry(kind: CanoSymmetry, axis: *const f64, angle_deg: f64) -> Result<SymmetrySpec, Failure> {
    let axis = || -> Result<[f64; 3], Failure> {
        if axis.is_null() {
            return Err(null("axis"));
        }
        let a = std::slice::from_raw_parts(axis, 3);
        Ok([a[0], a[1], a[2]])
    };
    Ok(match kind {
        CanoSymmetry::None => SymmetrySpec::None,
        CanoSymmetry::Discrete => SymmetrySpec::discrete(axis()?, angle_deg)?,
        CanoSymmetry::Continuous => SymmetrySpec::continuous(axis()?)?,
    })
}

fn tag_of(t: CandidateTag) -> CanoTag {
    match t {
        CandidateTag::Hs => CanoTag::Hs,
        CandidateTag::Hg => CanoTag::Hg,
        CandidateTag::HgFlip => CanoTag::HgFlip,
        CandidateTag::SupHs => CanoTag::SupHs,
        CandidateTag::PcaHs => CanoTag::PcaHs,
    }
}

fn normalized(c: &CanoCloud) -> Result<(LabeledCloud, Option<Mesh>), Failure> {
    let (cloud, t) = normalize_to_unit_sphere(&c.cloud)?;
    Ok((cloud, c.mesh.as_ref().map(|m| m.normalized_by(&t))))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn cano_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Copies the calling thread's last error message into `buf` (NUL-terminated,
/// truncated to `cap`). Returns the full message length in bytes excluding
/// the terminator, or 0 when no call has failed on this thread.
#[no_mangle]
pub unsafe extern "C" fn cano_last_error_message(buf: *mut c_char, cap: usize) -> usize {
    LAST_ERROR.with(|e| {
        let e = e.borrow();
        let Some(msg) = e.as_ref() else { return 0 };
        let bytes = msg.as_bytes();
        if !buf.is_null() && cap > 0 {
            let n = bytes.len().min(cap - 1);
            ptr::copy_nonoverlapping(bytes.as_ptr().cast(), buf, n);
            *buf.add(n) = 0;
        }
        bytes.len()
    })
}

/// Builds a cloud from `n` points given as `xyz` triples. `labels` may be
/// null; otherwise it holds `n` indices into the `n_parts` strings of
/// `part_names`.
#[no_mangle]
pub unsafe extern "C" fn cano_cloud_new(
    xyz: *const f64,
    n: usize,
    labels: *const u32,
    part_names: *const *const c_char,
    n_parts: usize,
    out_cloud: *mut *mut CanoCloud,
) -> CanoStatus {
    guard(|| {
        let out_cloud = out(out_cloud, "out_cloud")?;
        if xyz.is_null() {
            return Err(null("xyz"));
        }
        let coords = std::slice::from_raw_parts(xyz, n * 3);
        let points = coords.chunks_exact(3).map(|c| Point3::new(c[0], c[1], c[2])).collect();
        let mut cloud = LabeledCloud::new(points)?;
        if !labels.is_null() {
            if part_names.is_null() {
                return Err(null("part_names"));
            }
            let names = std::slice::from_raw_parts(part_names, n_parts)
                .iter()
                .map(|&p| string(p, "part_names[i]"))
                .collect::<Result<Vec<_>, _>>()?;
            cloud = cloud.with_labels(std::slice::from_raw_parts(labels, n).to_vec(), names)?;
        }
        *out_cloud = Box::into_raw(Box::new(CanoCloud { cloud, mesh: None }));
        Ok(())
    })
}

/// Loads an OBJ or PLY file (with its `.labels` sidecar, if any). Meshes are
/// sampled to `sample_count` points with `seed` and kept for the support
/// criterion.
#[no_mangle]
pub unsafe extern "C" fn cano_cloud_load(
    path: *const c_char,
    sample_count: usize,
    seed: u64,
    out_cloud: *mut *mut CanoCloud,
) -> CanoStatus {
    guard(|| {
        let out_cloud = out(out_cloud, "out_cloud")?;
        let path = string(path, "path")?;
        let o = load_object(Path::new(&path), &LoadOptions { sample_count, seed })?;
        *out_cloud = Box::into_raw(Box::new(CanoCloud {
            cloud: o.cloud,
            mesh: o.mesh,
        }));
        Ok(())
    })
}

/// Number of points, or 0 for a null handle.
#[no_mangle]
pub unsafe extern "C" fn cano_cloud_len(cloud: *const CanoCloud) -> usize {
    cloud.as_ref().map_or(0, |c| c.cloud.len())
}

/// Copies the points as `xyz` triples into `xyz`, which holds `cap` doubles.
#[no_mangle]
pub unsafe extern "C" fn cano_cloud_points(cloud: *const CanoCloud, xyz: *mut f64, cap: usize) -> CanoStatus {
    guard(|| {
        let c = deref(cloud, "cloud")?;
        if xyz.is_null() {
            return Err(null("xyz"));
        }
        let need = c.cloud.len() * 3;
        if cap < need {
            return Err(Failure(CanoStatus::BufferTooSmall, format!("need {need} doubles, have {cap}")));
        }
        let dst = std::slice::from_raw_parts_mut(xyz, need);
        for (d, p) in dst.chunks_exact_mut(3).zip(c.cloud.points()) {
            d.copy_from_slice(&[p.x, p.y, p.z]);
        }
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn cano_cloud_free(cloud: *mut CanoCloud) {
    if !cloud.is_null() {
        drop(Box::from_raw(cloud));
    }
}

/// Makes a category template from a labeled cloud. `axis` (3 doubles) and
/// `angle_deg` are read only for symmetric categories.
#[no_mangle]
pub unsafe extern "C" fn cano_template_new(
    category: *const c_char,
    cloud: *const CanoCloud,
    symmetry_kind: CanoSymmetry,
    axis: *const f64,
    angle_deg: f64,
    out_template: *mut *mut CanoTemplate,
) -> CanoStatus {
    guard(|| {
        let out_template = out(out_template, "out_template")?;
        let category = string(category, "category")?;
        let c = deref(cloud, "cloud")?;
        let sym = symmetry(symmetry_kind, axis, angle_deg)?;
        let template = CategoryTemplate::new(category.clone(), category, &c.cloud, sym, "")?;
        *out_template = Box::into_raw(Box::new(CanoTemplate { template }));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn cano_template_free(tmpl: *mut CanoTemplate) {
    if !tmpl.is_null() {
        drop(Box::from_raw(tmpl));
    }
}

/// Symmetric squared Chamfer distance between two clouds as given.
#[no_mangle]
pub unsafe extern "C" fn cano_chamfer(a: *const CanoCloud, b: *const CanoCloud, out_distance: *mut f64) -> CanoStatus {
    guard(|| {
        let (a, b) = (deref(a, "a")?, deref(b, "b")?);
        let out_distance = out(out_distance, "out_distance")?;
        *out_distance = chamfer_distance(a.cloud.points(), b.cloud.points())?;
        Ok(())
    })
}

/// Yaw aligning `object` with `template` by Chamfer distance, searched on a
/// grid of `grid_step_deg` (0 for the default) and refined. Writes the angle
/// in radians and the rotation as a `wxyz` quaternion.
#[no_mangle]
pub unsafe extern "C" fn cano_horizontal_geometric(
    object: *const CanoCloud,
    tmpl: *const CanoTemplate,
    grid_step_deg: f64,
    out_theta: *mut f64,
    out_quaternion: *mut f64,
) -> CanoStatus {
    guard(|| {
        let o = deref(object, "object")?;
        let t = deref(tmpl, "tmpl")?;
        let out_theta = out(out_theta, "out_theta")?;
        if out_quaternion.is_null() {
            return Err(null("out_quaternion"));
        }
        let mut cfg = CriterionConfig::default();
        if grid_step_deg != 0.0 {
            cfg.grid_step = grid_step_deg.to_radians();
        }
        let (cloud, _) = normalized(o)?;
        let g = horizontal_geometric(&cloud, &t.template, &cfg)?;
        *out_theta = g.theta;
        std::slice::from_raw_parts_mut(out_quaternion, 4).copy_from_slice(&g.r_g.to_quaternion_wxyz());
        Ok(())
    })
}

/// The five candidate canonicalizing rotations for `object`, using default
/// settings. The loaded mesh, when there is one, drives the support
/// criterion.
#[no_mangle]
pub unsafe extern "C" fn cano_candidates_generate(
    object: *const CanoCloud,
    tmpl: *const CanoTemplate,
    out_set: *mut *mut CanoCandidateSet,
) -> CanoStatus {
    guard(|| {
        let o = deref(object, "object")?;
        let t = deref(tmpl, "tmpl")?;
        let out_set = out(out_set, "out_set")?;
        let cfg = AppConfig::default();
        let (cloud, mesh) = normalized(o)?;
        let set = generate_candidates("object", mesh.as_ref(), &cloud, &t.template, &cfg.candidate_config(), &cfg.scorer())?;
        *out_set = Box::into_raw(Box::new(CanoCandidateSet { set }));
        Ok(())
    })
}

/// Number of candidates, or 0 for a null handle.
#[no_mangle]
pub unsafe extern "C" fn cano_candidates_len(set: *const CanoCandidateSet) -> usize {
    set.as_ref().map_or(0, |s| s.set.candidates.len())
}

/// Tag and `wxyz` quaternion of candidate `index`.
#[no_mangle]
pub unsafe extern "C" fn cano_candidates_get(
    set: *const CanoCandidateSet,
    index: usize,
    out_tag: *mut CanoTag,
    out_quaternion: *mut f64,
) -> CanoStatus {
    guard(|| {
        let s = deref(set, "set")?;
        let out_tag = out(out_tag, "out_tag")?;
        if out_quaternion.is_null() {
            return Err(null("out_quaternion"));
        }
        let c = s.set.candidates.get(index).ok_or_else(|| {
            Failure(
                CanoStatus::InvalidInput,
                format!("candidate index {index} out of range (have {})", s.set.candidates.len()),
            )
        })?;
        *out_tag = tag_of(c.tag);
        std::slice::from_raw_parts_mut(out_quaternion, 4).copy_from_slice(&c.rotation.to_quaternion_wxyz());
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn cano_candidates_free(set: *mut CanoCandidateSet) {
    if !set.is_null() {
        drop(Box::from_raw(set));
    }
}

/// Symmetry-aware angle in degrees between two poses given as `wxyz`
/// quaternions.
#[no_mangle]
pub unsafe extern "C" fn cano_sym_aware_angle(
    predicted: *const f64,
    ground_truth: *const f64,
    symmetry_kind: CanoSymmetry,
    axis: *const f64,
    angle_deg: f64,
    out_degrees: *mut f64,
) -> CanoStatus {
    guard(|| {
        let out_degrees = out(out_degrees, "out_degrees")?;
        let pred = quaternion(predicted, "predicted")?;
        let gt = quaternion(ground_truth, "ground_truth")?;
        *out_degrees = sym_aware_angle(&pred, &gt, &symmetry(symmetry_kind, axis, angle_deg)?);
        Ok(())
    })
}
