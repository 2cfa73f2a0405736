use nalgebra::Point3;

use super::kdtree::{PointIndex, NO_HINT};
use crate::error::{Error, Result};

/// Symmetric squared Chamfer distance: the mean squared nearest-neighbor
/// distance from `a` to `b` plus the same from `b` to `a`.
pub fn chamfer_distance(a: &[Point3<f64>], b: &[Point3<f64>]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::InvalidInput("chamfer distance of an empty point set".into()));
    }
    let index_a = PointIndex::build(a);
    let index_b = PointIndex::build(b);
    Ok(mean_nearest_squared(a.iter().copied(), &index_b) + mean_nearest_squared(b.iter().copied(), &index_a))
}

/// Mean over `queries` of the squared distance to the nearest point in `index`.
///
/// Sums in iteration order, then divides once by the count.
pub fn mean_nearest_squared(queries: impl IntoIterator<Item = Point3<f64>>, index: &PointIndex) -> f64 {
    let mut sum = 0.0;
    let mut n = 0usize;
    for q in queries {
        sum += index.nearest_squared(&q);
        n += 1;
    }
    if n == 0 {
        0.0
    } else {
        sum / n as f64
    }
}

/// Chamfer distance between a fixed pair of point sets under a family of
/// transforms of `b`, with both indices built once.
///
/// `eval(fwd, inv)` needs `fwd` (applied to points of `b`) and its inverse
/// `inv` (applied to points of `a`), which for rigid transforms gives the
/// same distances as transforming `b` directly.
#[derive(Debug, Clone)]
pub struct ChamferPair {
    a: Vec<Point3<f64>>,
    b: Vec<Point3<f64>>,
    index_a: PointIndex,
    index_b: PointIndex,
}

impl ChamferPair {
    pub fn new(a: &[Point3<f64>], b: &[Point3<f64>]) -> Result<Self> {
        if a.is_empty() || b.is_empty() {
            return Err(Error::InvalidInput("chamfer distance of an empty point set".into()));
        }
        Ok(ChamferPair {
            a: a.to_vec(),
            b: b.to_vec(),
            index_a: PointIndex::build(a),
            index_b: PointIndex::build(b),
        })
    }

    pub fn eval(
        &self,
        fwd: impl Fn(&Point3<f64>) -> Point3<f64>,
        inv: impl Fn(&Point3<f64>) -> Point3<f64>,
    ) -> f64 {
        mean_nearest_squared(self.a.iter().map(inv), &self.index_b)
            + mean_nearest_squared(self.b.iter().map(fwd), &self.index_a)
    }

    /// Same value as [`ChamferPair::eval`], seeding each query with the
    /// neighbour it had in the previous call. Fast when consecutive calls
    /// use nearby transforms.
    pub fn eval_hinted(
        &self,
        fwd: impl Fn(&Point3<f64>) -> Point3<f64>,
        inv: impl Fn(&Point3<f64>) -> Point3<f64>,
        hints: &mut PairHints,
    ) -> f64 {
        hinted_mean(self.a.iter().map(inv), &self.index_b, &mut hints.a)
            + hinted_mean(self.b.iter().map(fwd), &self.index_a, &mut hints.b)
    }

    pub fn hints(&self) -> PairHints {
        PairHints {
            a: vec![NO_HINT; self.a.len()],
            b: vec![NO_HINT; self.b.len()],
        }
    }
}

/// Per-point nearest-neighbour slots carried between hinted evaluations.
#[derive(Debug, Clone)]
pub struct PairHints {
    a: Vec<usize>,
    b: Vec<usize>,
}

fn hinted_mean(queries: impl Iterator<Item = Point3<f64>>, index: &PointIndex, hints: &mut [usize]) -> f64 {
    let mut sum = 0.0;
    for (q, h) in queries.zip(hints.iter_mut()) {
        let (d, slot) = index.nearest_from(&q, *h);
        sum += d;
        *h = slot;
    }
    sum / hints.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::rotation::Rotation;

    #[test]
    fn identical_sets_are_zero() {
        let a = vec![Point3::new(0.1, 0.2, 0.3), Point3::new(-0.4, 0.0, 1.0)];
        assert_eq!(chamfer_distance(&a, &a).unwrap(), 0.0);
    }

    #[test]
    fn one_point_closed_form() {
        let a = [Point3::origin()];
        let b = [Point3::new(1.0, 0.0, 0.0)];
        assert_eq!(chamfer_distance(&a, &b).unwrap(), 2.0);
    }

    #[test]
    fn empty_set_is_rejected() {
        assert!(matches!(chamfer_distance(&[], &[Point3::origin()]), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn pair_matches_direct_rotation() {
        let a: Vec<_> = (0..50).map(|i| Point3::new((i as f64).sin(), (i as f64 * 0.7).cos(), i as f64 / 50.0)).collect();
        let b: Vec<_> = (0..40).map(|i| Point3::new((i as f64 * 1.3).cos(), (i as f64).sin(), -(i as f64) / 40.0)).collect();
        let r = Rotation::about_z(0.8);
        let rinv = r.inverse();
        let pair = ChamferPair::new(&a, &b).unwrap();
        let via_pair = pair.eval(|p| r.apply(p), |p| rinv.apply(p));
        let mut hints = pair.hints();
        for _ in 0..2 {
            let hinted = pair.eval_hinted(|p| r.apply(p), |p| rinv.apply(p), &mut hints);
            assert_eq!(hinted.to_bits(), via_pair.to_bits());
        }
        let rb: Vec<_> = b.iter().map(|p| r.apply(p)).collect();
        let direct = chamfer_distance(&a, &rb).unwrap();
        assert!((via_pair - direct).abs() < 1e-12);
    }
}
