use std::f64::consts::PI;

use super::config::CriterionConfig;
use super::energy::{
    extrema_of_energy, golden_section_min, EnergyProfile, SemanticYawEnergy, YawEnergy,
    FLAT_TOLERANCE,
};
use crate::error::Result;
use crate::geometry::{wrap_angle, wrapped_distance, LabeledCloud, Rotation};
use crate::template::CategoryTemplate;

#[derive(Debug, Clone)]
pub struct HorizontalGeometric {
    /// Refined minimizer of the geometric energy, in `[0, 2π)`.
    pub theta: f64,
    pub r_g: Rotation,
    /// `R_z(θ + π)`.
    pub r_invg: Rotation,
    pub energy: f64,
    /// The energy is flat in yaw; `theta` is then 0.
    pub continuous_symmetry: bool,
    pub profile: EnergyProfile,
}

#[derive(Debug, Clone)]
pub struct HorizontalSemantic {
    pub theta: f64,
    pub r_s: Rotation,
    /// Objective `J` at `theta`.
    pub objective: f64,
    /// Mean per-part energy at `theta`.
    pub semantic_energy: f64,
    /// Names of the parts present on both sides.
    pub shared_parts: Vec<String>,
    /// Profile with `e_s` filled in.
    pub profile: EnergyProfile,
}

/// Yaw `θ` minimizing `CD(template, R_z(θ) object)`.
pub fn horizontal_geometric(
    object: &LabeledCloud,
    template: &CategoryTemplate,
    cfg: &CriterionConfig,
) -> Result<HorizontalGeometric> {
    cfg.validate()?;
    let energy = YawEnergy::new(template.cloud.points(), object.points())?;
    let thetas = cfg.grid();
    let e_g = energy.sweep(&thetas);
    let mut profile = EnergyProfile {
        thetas,
        e_g,
        e_s: None,
        extrema: Vec::new(),
    };
    profile.extrema = extrema_of_energy(&profile);

    let (lo, hi) = min_max(&profile.e_g);
    if hi - lo < FLAT_TOLERANCE {
        return Ok(HorizontalGeometric {
            theta: 0.0,
            r_g: Rotation::identity(),
            r_invg: Rotation::about_z(PI),
            energy: profile.e_g[0],
            continuous_symmetry: true,
            profile,
        });
    }

    let best = argmin(&profile.e_g);
    let (mut theta, mut value) = (profile.thetas[best], profile.e_g[best]);
    if cfg.refine {
        let (t, v) = golden_section_min(
            |t| energy.eval(t),
            theta - cfg.grid_step,
            theta + cfg.grid_step,
            cfg.refine_tolerance,
        );
        if v <= value {
            theta = t;
            value = v;
        }
    }
    let theta = wrap_angle(theta);
    Ok(HorizontalGeometric {
        theta,
        r_g: Rotation::about_z(theta),
        r_invg: Rotation::about_z(theta + PI),
        energy: value,
        continuous_symmetry: false,
        profile,
    })
}

/// Yaw maximizing `exp(-E_s(θ)) · Σ_k G(θ; ω_k, σ)`, where the `ω_k` are
/// the minima of the geometric energy.
pub fn horizontal_semantic(
    object: &LabeledCloud,
    template: &CategoryTemplate,
    cfg: &CriterionConfig,
) -> Result<HorizontalSemantic> {
    let geometric = horizontal_geometric(object, template, cfg)?;
    horizontal_semantic_with(object, template, &geometric.profile, cfg)
}

/// As [`horizontal_semantic`], reusing an already computed geometric profile.
pub fn horizontal_semantic_with(
    object: &LabeledCloud,
    template: &CategoryTemplate,
    geometric: &EnergyProfile,
    cfg: &CriterionConfig,
) -> Result<HorizontalSemantic> {
    cfg.validate()?;
    let energy = SemanticYawEnergy::new(&template.cloud, object)?;
    let e_s = energy.sweep(&geometric.thetas);
    let omega: Vec<f64> = geometric.extrema.iter().map(|&i| geometric.thetas[i]).collect();
    let objective = |t: f64, es: f64| semantic_objective(t, es, &omega, cfg);

    let j: Vec<f64> = geometric
        .thetas
        .iter()
        .zip(&e_s)
        .map(|(&t, &es)| objective(t, es))
        .collect();
    let best = argmax(&j);
    let (mut theta, mut value) = (geometric.thetas[best], j[best]);
    if cfg.refine {
        let (t, neg) = golden_section_min(
            |t| -objective(t, energy.eval(t)),
            theta - cfg.grid_step,
            theta + cfg.grid_step,
            cfg.refine_tolerance,
        );
        if -neg >= value {
            theta = t;
            value = -neg;
        }
    }
    let theta = wrap_angle(theta);
    let mut profile = geometric.clone();
    profile.e_s = Some(e_s);
    Ok(HorizontalSemantic {
        theta,
        r_s: Rotation::about_z(theta),
        objective: value,
        semantic_energy: energy.eval(theta),
        shared_parts: energy.names.clone(),
        profile,
    })
}

/// The semantic objective at `theta` given the semantic energy there.
pub fn semantic_objective(theta: f64, semantic_energy: f64, omega: &[f64], cfg: &CriterionConfig) -> f64 {
    let s2 = cfg.gaussian_sigma * cfg.gaussian_sigma;
    let norm = 1.0 / (cfg.gaussian_sigma * (2.0 * PI).sqrt());
    let mass: f64 = omega
        .iter()
        .map(|&w| {
            let d = wrapped_distance(theta, w);
            norm * (-0.5 * d * d / s2).exp()
        })
        .sum();
    ((-semantic_energy).exp() * mass).max(cfg.semantic_weight_floor)
}

fn min_max(v: &[f64]) -> (f64, f64) {
    v.iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)))
}

/// First index of the smallest value.
fn argmin(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate() {
        if x < v[best] {
            best = i;
        }
    }
    best
}

fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate() {
        if x > v[best] {
            best = i;
        }
    }
    best
}
