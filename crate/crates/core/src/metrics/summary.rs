use serde::{Deserialize, Serialize};

use super::symmetry::{sym_aware_canonical_angle, SymmetrySpec};
use crate::error::{Error, Result};
use crate::geometry::Rotation;

/// Anything that carries an angular error in degrees.
pub trait AngularError {
    fn error_deg(&self) -> f64;
}

impl AngularError for f64 {
    fn error_deg(&self) -> f64 {
        *self
    }
}

/// One evaluated prediction. Both rotations are canonicalizing rotations
/// (object frame → canonical frame).
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorSample {
    pub object_id: String,
    pub predicted: Rotation,
    pub ground_truth: Rotation,
    pub symmetry: SymmetrySpec,
    pub error_deg: f64,
}

impl ErrorSample {
    pub fn new(object_id: impl Into<String>, predicted: Rotation, ground_truth: Rotation, symmetry: SymmetrySpec) -> Self {
        let error_deg = sym_aware_canonical_angle(&predicted, &ground_truth, &symmetry);
        ErrorSample {
            object_id: object_id.into(),
            predicted,
            ground_truth,
            symmetry,
            error_deg,
        }
    }
}

impl AngularError for ErrorSample {
    fn error_deg(&self) -> f64 {
        self.error_deg
    }
}

fn non_empty<T>(samples: &[T]) -> Result<()> {
    if samples.is_empty() {
        Err(Error::InvalidInput("metric over an empty sample set".into()))
    } else {
        Ok(())
    }
}

/// Fraction of samples with error at most `threshold_deg`.
pub fn accuracy_at<T: AngularError>(samples: &[T], threshold_deg: f64) -> Result<f64> {
    non_empty(samples)?;
    let hits = samples.iter().filter(|s| s.error_deg() <= threshold_deg).count();
    Ok(hits as f64 / samples.len() as f64)
}

pub fn mean_abs_error<T: AngularError>(samples: &[T]) -> Result<f64> {
    non_empty(samples)?;
    Ok(samples.iter().map(|s| s.error_deg()).sum::<f64>() / samples.len() as f64)
}

/// Quantile with linear interpolation between order statistics
/// (`h = (n - 1) p`, the "type 7" rule).
pub fn quantile<T: AngularError>(samples: &[T], p: f64) -> Result<f64> {
    non_empty(samples)?;
    let mut v: Vec<f64> = samples.iter().map(|s| s.error_deg()).collect();
    v.sort_by(f64::total_cmp);
    let h = (v.len() - 1) as f64 * p.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(v.len() - 1);
    Ok(v[lo] + (h - lo as f64) * (v[hi] - v[lo]))
}

/// Interquartile range `Q3 - Q1` of the errors.
pub fn iqr<T: AngularError>(samples: &[T]) -> Result<f64> {
    Ok(quantile(samples, 0.75)? - quantile(samples, 0.25)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub count: usize,
    pub acc_10: f64,
    pub acc_30: f64,
    pub mean_abs_deg: f64,
    pub median_deg: f64,
    pub iqr_deg: f64,
}

impl MetricReport {
    pub fn from_samples<T: AngularError>(samples: &[T]) -> Result<Self> {
        Ok(MetricReport {
            count: samples.len(),
            acc_10: accuracy_at(samples, 10.0)?,
            acc_30: accuracy_at(samples, 30.0)?,
            mean_abs_deg: mean_abs_error(samples)?,
            median_deg: quantile(samples, 0.5)?,
            iqr_deg: iqr(samples)?,
        })
    }
}
