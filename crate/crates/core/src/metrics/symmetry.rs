use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{geodesic_angle, Rotation};

/// Rotational symmetry of a category, expressed in its canonical frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum SymmetrySpec {
    None,
    /// Invariant under rotations by multiples of `angle_deg` about `axis`.
    Discrete { axis: [f64; 3], angle_deg: f64 },
    /// Invariant under any rotation about `axis`.
    Continuous { axis: [f64; 3] },
}

impl Default for SymmetrySpec {
    fn default() -> Self {
        SymmetrySpec::None
    }
}

fn unit_axis(axis: [f64; 3]) -> Result<[f64; 3]> {
    let v = Vector3::from(axis);
    let n = v.norm();
    if !(n > 1e-12) || !n.is_finite() {
        return Err(Error::InvalidInput("symmetry axis has zero length".into()));
    }
    let u = v / n;
    Ok([u.x, u.y, u.z])
}

impl SymmetrySpec {
    pub fn discrete(axis: [f64; 3], angle_deg: f64) -> Result<Self> {
        let order = 360.0 / angle_deg;
        if !(angle_deg > 0.0) || (order - order.round()).abs() > 1e-9 || order.round() < 2.0 {
            return Err(Error::InvalidInput(format!(
                "symmetry angle {angle_deg}° must divide 360° into at least 2 parts"
            )));
        }
        Ok(SymmetrySpec::Discrete {
            axis: unit_axis(axis)?,
            angle_deg,
        })
    }

    pub fn continuous(axis: [f64; 3]) -> Result<Self> {
        Ok(SymmetrySpec::Continuous { axis: unit_axis(axis)? })
    }

    /// Checks invariants of a value built directly (e.g. deserialized).
    pub fn validated(self) -> Result<Self> {
        match self {
            SymmetrySpec::None => Ok(self),
            SymmetrySpec::Discrete { axis, angle_deg } => Self::discrete(axis, angle_deg),
            SymmetrySpec::Continuous { axis } => Self::continuous(axis),
        }
    }

    pub fn order(&self) -> Option<usize> {
        match self {
            SymmetrySpec::Discrete { angle_deg, .. } => Some((360.0 / angle_deg).round() as usize),
            _ => None,
        }
    }

    /// The symmetry rotations `S_j` (identity first) of a discrete symmetry;
    /// just the identity otherwise.
    pub fn elements(&self) -> Vec<Rotation> {
        match self {
            SymmetrySpec::Discrete { axis, angle_deg } => {
                let axis = Vector3::from(*axis);
                (0..self.order().expect("discrete"))
                    .map(|j| {
                        Rotation::from_axis_angle(&axis, (j as f64 * angle_deg).to_radians())
                            .expect("validated axis")
                    })
                    .collect()
            }
            _ => vec![Rotation::identity()],
        }
    }
}

/// Angular error in degrees between two poses (canonical → observed frame),
/// ignoring differences explained by the symmetry.
///
/// Discrete: minimum over `S_j` of the geodesic angle between `pred` and
/// `gt · S_j`. Continuous: angle between the images of the symmetry axis.
pub fn sym_aware_angle(pred: &Rotation, gt: &Rotation, sym: &SymmetrySpec) -> f64 {
    match sym {
        SymmetrySpec::None => geodesic_angle(pred, gt),
        SymmetrySpec::Discrete { .. } => sym
            .elements()
            .iter()
            .map(|s| geodesic_angle(pred, &(gt * s)))
            .fold(f64::INFINITY, f64::min),
        SymmetrySpec::Continuous { axis } => {
            let a = Vector3::from(*axis);
            let pa = pred.apply_vector(&a);
            let ga = gt.apply_vector(&a);
            pa.cross(&ga).norm().atan2(pa.dot(&ga)).to_degrees()
        }
    }
}

/// [`sym_aware_angle`] for canonicalizing rotations (observed → canonical
/// frame), which are the inverses of poses.
pub fn sym_aware_canonical_angle(pred: &Rotation, gt: &Rotation, sym: &SymmetrySpec) -> f64 {
    sym_aware_angle(&pred.inverse(), &gt.inverse(), sym)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    const Z: [f64; 3] = [0.0, 0.0, 1.0];

    #[test]
    fn equal_rotations_have_zero_error() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let r = Rotation::random(&mut rng);
        for sym in [SymmetrySpec::None, SymmetrySpec::discrete(Z, 90.0).unwrap(), SymmetrySpec::continuous(Z).unwrap()] {
            assert!(sym_aware_angle(&r, &r, &sym) < 1e-6);
        }
    }

    #[test]
    fn continuous_ignores_spin_about_axis() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let gt = Rotation::random(&mut rng);
        let pred = gt * Rotation::about_z(73f64.to_radians());
        assert!(sym_aware_angle(&pred, &gt, &SymmetrySpec::continuous(Z).unwrap()) < 1e-6);
    }

    #[test]
    fn discrete_quarter_turn_nearest_element() {
        let gt = Rotation::from_axis_angle(&Vector3::new(0.2, 0.5, -0.1), 0.7).unwrap();
        let pred = gt * Rotation::about_z(85f64.to_radians());
        let sym = SymmetrySpec::discrete(Z, 90.0).unwrap();
        // Oracle: enumerate the four elements.
        let brute = (0..4)
            .map(|j| geodesic_angle(&pred, &(gt * Rotation::about_z(j as f64 * PI / 2.0))))
            .fold(f64::INFINITY, f64::min);
        let got = sym_aware_angle(&pred, &gt, &sym);
        assert!((got - 5.0).abs() < 1e-9, "{got}");
        assert!((got - brute).abs() < 1e-9);
    }

    #[test]
    fn never_exceeds_plain_geodesic() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let syms = [SymmetrySpec::discrete(Z, 120.0).unwrap(), SymmetrySpec::continuous([1.0, 1.0, 0.0]).unwrap()];
        for _ in 0..200 {
            let a = Rotation::random(&mut rng);
            let b = Rotation::random(&mut rng);
            for s in &syms {
                assert!(sym_aware_angle(&a, &b, s) <= geodesic_angle(&a, &b) + 1e-9);
            }
        }
    }

    #[test]
    fn invariant_to_symmetry_elements_on_gt() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let sym = SymmetrySpec::discrete([0.0, 1.0, 0.0], 60.0).unwrap();
        for _ in 0..50 {
            let a = Rotation::random(&mut rng);
            let b = Rotation::random(&mut rng);
            let base = sym_aware_angle(&a, &b, &sym);
            for s in sym.elements() {
                assert!((sym_aware_angle(&a, &(b * s), &sym) - base).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn invalid_specs_rejected() {
        assert!(SymmetrySpec::discrete(Z, 70.0).is_err());
        assert!(SymmetrySpec::discrete(Z, 360.0).is_err());
        assert!(SymmetrySpec::continuous([0.0; 3]).is_err());
    }
}
