use nalgebra::Point3;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{ChamferPair, LabeledCloud, PairHints, Rotation};

/// Energies sampled on a uniform yaw grid.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergyProfile {
    /// Ascending grid over `[0, 2π)`.
    pub thetas: Vec<f64>,
    /// Geometric energy `CD(template, R_z(θ) object)`.
    pub e_g: Vec<f64>,
    /// Mean per-part semantic energy, when computed.
    pub e_s: Option<Vec<f64>>,
    /// Indices of the cyclic local minima of the smoothed `e_g`.
    pub extrema: Vec<usize>,
}

/// Values whose spread is below this are treated as constant.
pub const FLAT_TOLERANCE: f64 = 1e-9;

/// Chamfer distance between the template and the object yawed by θ.
#[derive(Debug, Clone)]
pub(crate) struct YawEnergy {
    pair: ChamferPair,
}

impl YawEnergy {
    pub fn new(template: &[Point3<f64>], object: &[Point3<f64>]) -> Result<Self> {
        Ok(YawEnergy {
            pair: ChamferPair::new(template, object)?,
        })
    }

    pub fn eval(&self, theta: f64) -> f64 {
        let fwd = Rotation::about_z(theta);
        let inv = Rotation::about_z(-theta);
        self.pair.eval(|p| fwd.apply(p), |p| inv.apply(p))
    }

    fn eval_hinted(&self, theta: f64, hints: &mut PairHints) -> f64 {
        let fwd = Rotation::about_z(theta);
        let inv = Rotation::about_z(-theta);
        self.pair.eval_hinted(|p| fwd.apply(p), |p| inv.apply(p), hints)
    }

    /// [`YawEnergy::eval`] at every grid angle. Neighbouring angles reuse
    /// each other's nearest neighbours as search bounds.
    pub fn sweep(&self, thetas: &[f64]) -> Vec<f64> {
        sweep_chunks(thetas, |chunk| {
            let mut hints = self.pair.hints();
            chunk.iter().map(|&t| self.eval_hinted(t, &mut hints)).collect()
        })
    }
}

/// Mean over shared semantic parts of the per-part yaw energy.
#[derive(Debug, Clone)]
pub(crate) struct SemanticYawEnergy {
    parts: Vec<YawEnergy>,
    pub names: Vec<String>,
}

impl SemanticYawEnergy {
    pub fn new(template: &LabeledCloud, object: &LabeledCloud) -> Result<Self> {
        let mut parts = Vec::new();
        let mut names = Vec::new();
        for (name, t, o) in shared_parts(template, object) {
            parts.push(YawEnergy::new(&t, &o)?);
            names.push(name);
        }
        if parts.is_empty() {
            return Err(Error::SemanticUnavailable);
        }
        Ok(SemanticYawEnergy { parts, names })
    }

    pub fn eval(&self, theta: f64) -> f64 {
        self.parts.iter().map(|p| p.eval(theta)).sum::<f64>() / self.parts.len() as f64
    }

    /// [`SemanticYawEnergy::eval`] at every grid angle.
    pub fn sweep(&self, thetas: &[f64]) -> Vec<f64> {
        sweep_chunks(thetas, |chunk| {
            let mut hints: Vec<PairHints> = self.parts.iter().map(|p| p.pair.hints()).collect();
            chunk
                .iter()
                .map(|&t| {
                    self.parts
                        .iter()
                        .zip(&mut hints)
                        .map(|(p, h)| p.eval_hinted(t, h))
                        .sum::<f64>()
                        / self.parts.len() as f64
                })
                .collect()
        })
    }
}

/// Splits the grid into one contiguous run per worker thread.
fn sweep_chunks(thetas: &[f64], run: impl Fn(&[f64]) -> Vec<f64> + Sync) -> Vec<f64> {
    let size = thetas.len().div_ceil(rayon::current_num_threads()).max(1);
    thetas.par_chunks(size).flat_map_iter(|c| run(c)).collect()
}

/// Parts (by name, in template order) with at least one point on both
/// sides, as `(name, template points, object points)`.
pub fn shared_parts(template: &LabeledCloud, object: &LabeledCloud) -> Vec<(String, Vec<Point3<f64>>, Vec<Point3<f64>>)> {
    let (Some(t_names), Some(o_names)) = (template.part_names(), object.part_names()) else {
        return Vec::new();
    };
    t_names
        .iter()
        .filter(|n| o_names.contains(n))
        .filter_map(|n| {
            let t = template.part_points(n);
            let o = object.part_points(n);
            (!t.is_empty() && !o.is_empty()).then(|| (n.clone(), t, o))
        })
        .collect()
}

/// Cyclic 3-tap moving average.
pub fn smooth3(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    if n < 3 {
        return values.to_vec();
    }
    (0..n)
        .map(|i| (values[(i + n - 1) % n] + values[i] + values[(i + 1) % n]) / 3.0)
        .collect()
}

/// Cyclic local minima. A run of equal values counts once, at its middle
/// index, when both neighbours of the run are strictly larger. Returns
/// `[0]` for a flat sequence.
pub fn cyclic_local_minima(values: &[f64]) -> Vec<usize> {
    let n = values.len();
    if n == 0 {
        return Vec::new();
    }
    let (lo, hi) = values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    if hi - lo < FLAT_TOLERANCE {
        return vec![0];
    }
    // Start scanning at a run boundary so no run wraps past the start.
    let start = (0..n).find(|&i| values[i] != values[(i + n - 1) % n]).expect("not flat");
    let mut out = Vec::new();
    let mut k = 0;
    while k < n {
        let s = (start + k) % n;
        let mut len = 1;
        while len < n && values[(s + len) % n] == values[s] {
            len += 1;
        }
        let left = values[(s + n - 1) % n];
        let right = values[(s + len) % n];
        if left > values[s] && right > values[s] {
            out.push((s + (len - 1) / 2) % n);
        }
        k += len;
    }
    out.sort_unstable();
    out
}

/// Indices `Ω` of the geometric energy minima, after 3-tap smoothing.
pub fn extrema_of_energy(profile: &EnergyProfile) -> Vec<usize> {
    cyclic_local_minima(&smooth3(&profile.e_g))
}

const INV_PHI: f64 = 0.618_033_988_749_894_8;

/// Golden-section search for a minimum of `f` on `[a, b]`, stopping once
/// the bracket is narrower than `tol`.
pub(crate) fn golden_section_min(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a).abs() > tol {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    let fx = f(x);
    [(c, fc), (d, fd), (x, fx)]
        .into_iter()
        .min_by(|p, q| p.1.total_cmp(&q.1))
        .expect("three candidates")
}
