//! Canonicalization consistency under random re-orientation of one instance.
//!
//! For trial `j` the instance is rotated by `R_j`, the canonicalizer returns
//! `C_j`, and `O_j = C_j · R_j` is the orientation the canonicalizer assigns
//! to the original instance frame. A perfect canonicalizer makes every `O_j`
//! equal (up to symmetry).

use rand::SeedableRng;
use rand::RngExt;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::symmetry::{sym_aware_canonical_angle, SymmetrySpec};
use crate::error::{Error, Result};
use crate::geometry::{rotate, LabeledCloud, Rotation};
use crate::stability::Mesh;

pub trait Canonicalizer: Sync {
    /// Rotation taking the given object into the canonical frame.
    fn canonicalize(&self, cloud: &LabeledCloud, mesh: Option<&Mesh>) -> Result<Rotation>;
}

impl<F> Canonicalizer for F
where
    F: Fn(&LabeledCloud, Option<&Mesh>) -> Result<Rotation> + Sync,
{
    fn canonicalize(&self, cloud: &LabeledCloud, mesh: Option<&Mesh>) -> Result<Rotation> {
        self(cloud, mesh)
    }
}

#[derive(Debug, Clone)]
pub struct Instance {
    pub cloud: LabeledCloud,
    pub mesh: Option<Mesh>,
    pub symmetry: SymmetrySpec,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Perturbation {
    /// Uniform over SO(3).
    #[default]
    Haar,
    /// Uniform rotation about the vertical axis only.
    Yaw,
}

impl Perturbation {
    pub fn sample(&self, rng: &mut ChaCha8Rng) -> Rotation {
        match self {
            Perturbation::Haar => Rotation::random(rng),
            Perturbation::Yaw => Rotation::about_z(rng.random::<f64>() * std::f64::consts::TAU),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ConsistencyReport {
    /// Mean distance in radians.
    pub value: f64,
    pub trials: usize,
    pub failures: usize,
    /// Per-trial `O_j` for successful trials, in trial order.
    #[serde(skip)]
    pub orientations: Vec<Rotation>,
    /// GEC only: per-trial distance to the ground truth, radians.
    pub per_trial: Vec<f64>,
}

fn run_trials(
    canonicalizer: &dyn Canonicalizer,
    instance: &Instance,
    n_trials: usize,
    seed: u64,
    perturbation: Perturbation,
) -> Result<(Vec<Rotation>, usize)> {
    if n_trials < 2 {
        return Err(Error::InvalidInput("consistency needs at least 2 trials".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let perturbations: Vec<Rotation> = (0..n_trials).map(|_| perturbation.sample(&mut rng)).collect();
    let mut orientations = Vec::with_capacity(n_trials);
    let mut failures = 0;
    for r in &perturbations {
        let cloud = rotate(&instance.cloud, r);
        let mesh = instance.mesh.as_ref().map(|m| m.rotated(r));
        match canonicalizer.canonicalize(&cloud, mesh.as_ref()) {
            Ok(c) => orientations.push(c * *r),
            Err(e) => {
                tracing::debug!("canonicalizer failed on a trial: {e}");
                failures += 1;
            }
        }
    }
    Ok((orientations, failures))
}

/// Instance-level consistency: mean symmetry-aware distance (radians) over
/// all unordered pairs of trial orientations.
pub fn instance_consistency(
    canonicalizer: &dyn Canonicalizer,
    instance: &Instance,
    n_trials: usize,
    seed: u64,
    perturbation: Perturbation,
) -> Result<ConsistencyReport> {
    let (orientations, failures) = run_trials(canonicalizer, instance, n_trials, seed, perturbation)?;
    if orientations.len() < 2 {
        return Err(Error::InvalidInput(format!(
            "only {} of {n_trials} trials succeeded",
            orientations.len()
        )));
    }
    let mut sum = 0.0;
    let mut pairs = 0usize;
    for j in 0..orientations.len() {
        for l in j + 1..orientations.len() {
            sum += sym_aware_canonical_angle(&orientations[j], &orientations[l], &instance.symmetry).to_radians();
            pairs += 1;
        }
    }
    Ok(ConsistencyReport {
        value: sum / pairs as f64,
        trials: n_trials,
        failures,
        orientations,
        per_trial: Vec::new(),
    })
}

/// Ground-truth equivariance consistency: mean symmetry-aware distance
/// (radians) from each trial orientation to the instance's known
/// canonicalizing rotation.
pub fn gt_equivariance_consistency(
    canonicalizer: &dyn Canonicalizer,
    instance: &Instance,
    gt_canonical: &Rotation,
    n_trials: usize,
    seed: u64,
    perturbation: Perturbation,
) -> Result<ConsistencyReport> {
    let (orientations, failures) = run_trials(canonicalizer, instance, n_trials, seed, perturbation)?;
    if orientations.is_empty() {
        return Err(Error::InvalidInput(format!("all {n_trials} trials failed")));
    }
    let per_trial: Vec<f64> = orientations
        .iter()
        .map(|o| sym_aware_canonical_angle(o, gt_canonical, &instance.symmetry).to_radians())
        .collect();
    Ok(ConsistencyReport {
        value: per_trial.iter().sum::<f64>() / per_trial.len() as f64,
        trials: n_trials,
        failures,
        orientations,
        per_trial,
    })
}
