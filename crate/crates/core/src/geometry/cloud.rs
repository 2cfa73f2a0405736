use nalgebra::{Point3, Vector3};

use super::rotation::Rotation;
use crate::error::{Error, Result};

/// Point cloud with optional per-point colors and semantic part labels.
///
/// Labels index into `part_names`; both are present or both absent.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledCloud {
    points: Vec<Point3<f64>>,
    colors: Option<Vec<[f64; 3]>>,
    labels: Option<Vec<u32>>,
    part_names: Option<Vec<String>>,
}

impl LabeledCloud {
    pub fn new(points: Vec<Point3<f64>>) -> Result<Self> {
        if points.iter().any(|p| !p.coords.iter().all(|c| c.is_finite())) {
            return Err(Error::InvalidInput("point cloud contains non-finite coordinates".into()));
        }
        Ok(LabeledCloud {
            points,
            colors: None,
            labels: None,
            part_names: None,
        })
    }

    pub fn with_labels(mut self, labels: Vec<u32>, part_names: Vec<String>) -> Result<Self> {
        if labels.len() != self.points.len() {
            return Err(Error::InvalidInput(format!(
                "{} labels for {} points",
                labels.len(),
                self.points.len()
            )));
        }
        if let Some(bad) = labels.iter().find(|&&l| l as usize >= part_names.len()) {
            return Err(Error::InvalidInput(format!(
                "label {bad} out of range for {} part names",
                part_names.len()
            )));
        }
        self.labels = Some(labels);
        self.part_names = Some(part_names);
        Ok(self)
    }

    pub fn with_colors(mut self, colors: Vec<[f64; 3]>) -> Result<Self> {
        if colors.len() != self.points.len() {
            return Err(Error::InvalidInput(format!(
                "{} colors for {} points",
                colors.len(),
                self.points.len()
            )));
        }
        self.colors = Some(colors);
        Ok(self)
    }

    pub fn points(&self) -> &[Point3<f64>] {
        &self.points
    }

    pub fn colors(&self) -> Option<&[[f64; 3]]> {
        self.colors.as_deref()
    }

    pub fn labels(&self) -> Option<&[u32]> {
        self.labels.as_deref()
    }

    pub fn part_names(&self) -> Option<&[String]> {
        self.part_names.as_deref()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn centroid(&self) -> Option<Point3<f64>> {
        centroid(&self.points)
    }

    /// Points carrying the part called `name`, in cloud order.
    pub fn part_points(&self, name: &str) -> Vec<Point3<f64>> {
        let (Some(labels), Some(names)) = (&self.labels, &self.part_names) else {
            return Vec::new();
        };
        let Some(idx) = names.iter().position(|n| n == name) else {
            return Vec::new();
        };
        self.points
            .iter()
            .zip(labels)
            .filter(|(_, &l)| l as usize == idx)
            .map(|(p, _)| *p)
            .collect()
    }

    /// Same cloud with every point replaced by `f(point)`.
    pub fn map_points(&self, f: impl Fn(&Point3<f64>) -> Point3<f64>) -> Self {
        LabeledCloud {
            points: self.points.iter().map(f).collect(),
            colors: self.colors.clone(),
            labels: self.labels.clone(),
            part_names: self.part_names.clone(),
        }
    }

    /// Keeps at most `max_points` points by uniform striding (first point always kept).
    pub fn decimated(&self, max_points: usize) -> Self {
        if self.points.len() <= max_points || max_points == 0 {
            return self.clone();
        }
        let n = self.points.len();
        let idx: Vec<usize> = (0..max_points).map(|i| i * n / max_points).collect();
        LabeledCloud {
            points: idx.iter().map(|&i| self.points[i]).collect(),
            colors: self.colors.as_ref().map(|c| idx.iter().map(|&i| c[i]).collect()),
            labels: self.labels.as_ref().map(|l| idx.iter().map(|&i| l[i]).collect()),
            part_names: self.part_names.clone(),
        }
    }
}

pub(crate) fn centroid(points: &[Point3<f64>]) -> Option<Point3<f64>> {
    if points.is_empty() {
        return None;
    }
    let sum = points.iter().fold(Vector3::zeros(), |acc, p| acc + p.coords);
    Some(Point3::from(sum / points.len() as f64))
}

/// Maps `p` to `(p + translation) * scale`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalizationTransform {
    pub translation: Vector3<f64>,
    pub scale: f64,
}

impl NormalizationTransform {
    pub fn identity() -> Self {
        NormalizationTransform {
            translation: Vector3::zeros(),
            scale: 1.0,
        }
    }

    pub fn apply(&self, p: &Point3<f64>) -> Point3<f64> {
        Point3::from((p.coords + self.translation) * self.scale)
    }

    pub fn invert(&self, p: &Point3<f64>) -> Point3<f64> {
        Point3::from(p.coords / self.scale - self.translation)
    }
}

/// Centers the cloud on its centroid and scales it so the farthest point has radius 1.
pub fn normalize_to_unit_sphere(cloud: &LabeledCloud) -> Result<(LabeledCloud, NormalizationTransform)> {
    let c = cloud
        .centroid()
        .ok_or_else(|| Error::InvalidInput("cannot normalize an empty cloud".into()))?;
    let radius = cloud
        .points()
        .iter()
        .map(|p| (p - c).norm())
        .fold(0.0_f64, f64::max);
    let extent = 1.0 + c.coords.amax();
    if radius <= 1e-12 * extent {
        return Err(Error::DegenerateGeometry(
            "all points coincide; cloud has zero extent".into(),
        ));
    }
    let transform = NormalizationTransform {
        translation: -c.coords,
        scale: 1.0 / radius,
    };
    Ok((cloud.map_points(|p| transform.apply(p)), transform))
}

/// Applies `r` to every point; labels and colors are carried unchanged.
pub fn rotate(cloud: &LabeledCloud, r: &Rotation) -> LabeledCloud {
    cloud.map_points(|p| r.apply(p))
}
