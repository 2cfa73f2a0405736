use nalgebra::{Matrix3, Point3, SymmetricEigen, Vector3};

use super::cloud::{centroid, LabeledCloud};
use crate::error::{Error, Result};

/// Relative eigengap, `(λa - λb) / λ1`, below which the leading axes are
/// considered ambiguous.
pub const AMBIGUOUS_EIGENGAP: f64 = 1e-3;

/// Leading principal axes of a centered cloud.
///
/// Each axis is oriented so the third central moment of the cloud along it
/// is non-negative; when that moment vanishes (mirror-symmetric extent) the
/// first non-negligible component is made positive instead.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PcaFrame {
    pub v1: Vector3<f64>,
    pub v2: Vector3<f64>,
    /// Covariance eigenvalues, descending.
    pub eigenvalues: [f64; 3],
    /// Set when λ1≈λ2 or λ2≈λ3, i.e. the axes are not uniquely defined.
    pub degenerate: bool,
    /// Whether each axis sign came from the third moment (`true`) or the
    /// component tie-break (`false`).
    pub moment_resolved: [bool; 2],
}

impl PcaFrame {
    pub fn v3(&self) -> Vector3<f64> {
        self.v1.cross(&self.v2)
    }

    /// Matrix with columns `v1, v2, v1 × v2`.
    pub fn basis(&self) -> Matrix3<f64> {
        Matrix3::from_columns(&[self.v1, self.v2, self.v3()])
    }
}

pub fn principal_axes(cloud: &LabeledCloud) -> Result<PcaFrame> {
    principal_axes_of(cloud.points())
}

pub fn principal_axes_of(points: &[Point3<f64>]) -> Result<PcaFrame> {
    if points.len() < 4 {
        return Err(Error::InvalidInput(format!(
            "principal axes need at least 4 points, got {}",
            points.len()
        )));
    }
    let c = centroid(points).expect("non-empty");
    let mut cov = Matrix3::zeros();
    for p in points {
        let d = p - c;
        cov += d * d.transpose();
    }
    cov /= points.len() as f64;

    let eig = SymmetricEigen::new(cov);
    let mut order = [0usize, 1, 2];
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let lambdas = order.map(|i| eig.eigenvalues[i].max(0.0));
    if lambdas[0] <= 0.0 || lambdas[1] <= 1e-12 * lambdas[0] {
        return Err(Error::DegenerateGeometry(
            "points are collinear; second principal axis undefined".into(),
        ));
    }
    let gap12 = (lambdas[0] - lambdas[1]) / lambdas[0];
    let gap23 = (lambdas[1] - lambdas[2]) / lambdas[0];
    let degenerate = gap12 < AMBIGUOUS_EIGENGAP || gap23 < AMBIGUOUS_EIGENGAP;

    let raw1: Vector3<f64> = eig.eigenvectors.column(order[0]).normalize();
    let raw2: Vector3<f64> = eig.eigenvectors.column(order[1]).normalize();
    // Re-orthogonalize v2 against v1 before orienting.
    let raw2 = (raw2 - raw1 * raw1.dot(&raw2)).normalize();
    let (v1, m1) = orient_axis(raw1, points, &c);
    let (v2, m2) = orient_axis(raw2, points, &c);

    Ok(PcaFrame {
        v1,
        v2,
        eigenvalues: lambdas,
        degenerate,
        moment_resolved: [m1, m2],
    })
}

fn orient_axis(v: Vector3<f64>, points: &[Point3<f64>], c: &Point3<f64>) -> (Vector3<f64>, bool) {
    let mut third = 0.0;
    let mut scale = 0.0;
    for p in points {
        let t = v.dot(&(p - c));
        third += t * t * t;
        scale += (t * t * t).abs();
    }
    if third.abs() > 1e-9 * scale {
        return (if third < 0.0 { -v } else { v }, true);
    }
    let first = v.iter().copied().find(|x| x.abs() > 1e-9).unwrap_or(1.0);
    (if first < 0.0 { -v } else { v }, false)
}
