//! Proper rotations of 3-space.
//!
//! [`Rotation`] stores the 3×3 matrix; quaternions are only an interchange
//! format (`w, x, y, z`, canonical sign `w >= 0`).

use std::f64::consts::PI;
use std::ops::Mul;

use nalgebra::{Matrix3, Point3, Quaternion, Rotation3, Unit, UnitQuaternion, Vector3};
use rand::{Rng, RngExt};

use crate::error::{Error, Result};

/// Tolerance used when accepting externally supplied matrices and quaternions.
const ORTHONORMAL_TOL: f64 = 1e-9;
const UNIT_QUATERNION_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rotation(Rotation3<f64>);

impl Default for Rotation {
    fn default() -> Self {
        Self::identity()
    }
}

impl Rotation {
    pub fn identity() -> Self {
        Rotation(Rotation3::identity())
    }

    /// Horizontal rotation by `theta` radians about the vertical `z` axis.
    pub fn about_z(theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        Rotation(Rotation3::from_matrix_unchecked(Matrix3::new(
            c, -s, 0.0, //
            s, c, 0.0, //
            0.0, 0.0, 1.0,
        )))
    }

    pub fn from_axis_angle(axis: &Vector3<f64>, angle: f64) -> Result<Self> {
        let axis = Unit::try_new(*axis, 1e-12)
            .ok_or_else(|| Error::InvalidInput("rotation axis has zero length".into()))?;
        Ok(Rotation(Rotation3::from_axis_angle(&axis, angle)))
    }

    /// Accepts `m` only if it is orthonormal with determinant +1 (within 1e-9).
    pub fn from_matrix(m: Matrix3<f64>) -> Result<Self> {
        let err = (m.transpose() * m - Matrix3::identity()).abs().max();
        if !err.is_finite() || err > ORTHONORMAL_TOL {
            return Err(Error::InvalidInput(format!(
                "matrix is not orthonormal (max |RᵀR - I| = {err:e})"
            )));
        }
        let det = m.determinant();
        if (det - 1.0).abs() > ORTHONORMAL_TOL {
            return Err(Error::InvalidInput(format!(
                "matrix is not a proper rotation (det = {det})"
            )));
        }
        Ok(Rotation(Rotation3::from_matrix_unchecked(m)))
    }

    /// Builds a rotation from a `(w, x, y, z)` quaternion that must be unit
    /// length within 1e-6; it is renormalized before conversion.
    pub fn from_quaternion_wxyz(q: [f64; 4]) -> Result<Self> {
        let [w, x, y, z] = q;
        let norm = (w * w + x * x + y * y + z * z).sqrt();
        if !norm.is_finite() || (norm - 1.0).abs() > UNIT_QUATERNION_TOL {
            return Err(Error::InvalidInput(format!(
                "quaternion is not unit length (|q| = {norm})"
            )));
        }
        let uq = UnitQuaternion::new_normalize(Quaternion::new(w, x, y, z));
        Ok(Rotation(uq.to_rotation_matrix()))
    }

    /// Quaternion in `(w, x, y, z)` order with `w >= 0`; when `w == 0` the
    /// first nonzero vector component is made positive.
    pub fn to_quaternion_wxyz(&self) -> [f64; 4] {
        let q = UnitQuaternion::from_rotation_matrix(&self.0);
        let mut c = [q.w, q.i, q.j, q.k];
        let flip = match c.iter().find(|v| **v != 0.0) {
            Some(v) => *v < 0.0,
            None => false,
        };
        if flip {
            for v in &mut c {
                *v = -*v;
            }
        }
        // Avoid serializing negative zero.
        for v in &mut c {
            if *v == 0.0 {
                *v = 0.0;
            }
        }
        c
    }

    /// Minimal rotation taking unit direction `from` onto unit direction `to`.
    /// Antiparallel inputs rotate by π about an axis orthogonal to `from`.
    pub fn between(from: &Vector3<f64>, to: &Vector3<f64>) -> Result<Self> {
        let a = from
            .try_normalize(1e-12)
            .ok_or_else(|| Error::InvalidInput("zero direction".into()))?;
        let b = to
            .try_normalize(1e-12)
            .ok_or_else(|| Error::InvalidInput("zero direction".into()))?;
        let cross = a.cross(&b);
        let dot = a.dot(&b).clamp(-1.0, 1.0);
        if cross.norm() < 1e-12 {
            if dot > 0.0 {
                return Ok(Self::identity());
            }
            // Pick the coordinate axis least aligned with `a` to build a perpendicular.
            let helper = if a.x.abs() <= a.y.abs() && a.x.abs() <= a.z.abs() {
                Vector3::x()
            } else if a.y.abs() <= a.z.abs() {
                Vector3::y()
            } else {
                Vector3::z()
            };
            let axis = a.cross(&helper);
            return Self::from_axis_angle(&axis, PI);
        }
        let angle = cross.norm().atan2(dot);
        Self::from_axis_angle(&cross, angle)
    }

    /// Uniform (Haar) random rotation.
    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let u1: f64 = rng.random();
        let u2: f64 = rng.random();
        let u3: f64 = rng.random();
        let a = (1.0 - u1).sqrt();
        let b = u1.sqrt();
        let (w, x) = (a * (2.0 * PI * u2).cos(), a * (2.0 * PI * u2).sin());
        let (y, z) = (b * (2.0 * PI * u3).cos(), b * (2.0 * PI * u3).sin());
        let uq = UnitQuaternion::new_normalize(Quaternion::new(w, x, y, z));
        Rotation(uq.to_rotation_matrix())
    }

    pub fn matrix(&self) -> &Matrix3<f64> {
        self.0.matrix()
    }

    pub fn inner(&self) -> &Rotation3<f64> {
        &self.0
    }

    pub fn inverse(&self) -> Self {
        Rotation(self.0.inverse())
    }

    /// `self · other`: applies `other` first.
    pub fn compose(&self, other: &Rotation) -> Self {
        Rotation(self.0 * other.0)
    }

    pub fn apply(&self, p: &Point3<f64>) -> Point3<f64> {
        self.0 * p
    }

    pub fn apply_vector(&self, v: &Vector3<f64>) -> Vector3<f64> {
        self.0 * v
    }

    /// Largest deviation of `RᵀR` from the identity.
    pub fn orthonormality_error(&self) -> f64 {
        let m = self.matrix();
        (m.transpose() * m - Matrix3::identity()).abs().max()
    }

    /// Rotation angle in radians, in `[0, π]`.
    pub fn angle(&self) -> f64 {
        half_angle_form(self.matrix())
    }
}

impl Mul for Rotation {
    type Output = Rotation;

    fn mul(self, rhs: Rotation) -> Rotation {
        self.compose(&rhs)
    }
}

impl Mul<&Rotation> for &Rotation {
    type Output = Rotation;

    fn mul(self, rhs: &Rotation) -> Rotation {
        self.compose(rhs)
    }
}

/// Angular distance `arccos((tr(r1ᵀ r2) - 1) / 2)` in degrees, in `[0, 180]`.
pub fn geodesic_angle(r1: &Rotation, r2: &Rotation) -> f64 {
    geodesic_angle_rad(r1, r2).to_degrees()
}

pub fn geodesic_angle_rad(r1: &Rotation, r2: &Rotation) -> f64 {
    half_angle_form(&(r1.matrix().transpose() * r2.matrix()))
}

/// Rotation angle of `m` as `2 atan2(|v|, |w|)` of its quaternion. Unlike
/// `acos((tr - 1) / 2)` this keeps full precision near 0 and π.
fn half_angle_form(m: &Matrix3<f64>) -> f64 {
    let q = UnitQuaternion::from_rotation_matrix(&Rotation3::from_matrix_unchecked(*m));
    2.0 * q.imag().norm().atan2(q.w.abs())
}

/// Wraps an angle in radians into `[0, 2π)`.
pub fn wrap_angle(theta: f64) -> f64 {
    let t = theta.rem_euclid(2.0 * PI);
    if t >= 2.0 * PI {
        0.0
    } else {
        t
    }
}

/// Shortest distance between two angles on the circle, in `[0, π]`.
pub fn wrapped_distance(a: f64, b: f64) -> f64 {
    let d = wrap_angle(a - b);
    d.min(2.0 * PI - d)
}
