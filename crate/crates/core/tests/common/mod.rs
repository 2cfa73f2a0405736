#![allow(dead_code)]

pub mod service;
pub mod solids;

use cano_core::geometry::{squared_distance, LabeledCloud, Rotation};
use cano_core::synthetic::{self, SyntheticObject};
use cano_core::CategoryTemplate;
use nalgebra::Point3;

/// Brute-force symmetric Chamfer distance.
pub fn brute_chamfer(a: &[Point3<f64>], b: &[Point3<f64>]) -> f64 {
    let one_way = |x: &[Point3<f64>], y: &[Point3<f64>]| {
        let mut sum = 0.0;
        for p in x {
            let mut best = f64::INFINITY;
            for q in y {
                let d = squared_distance(p, q);
                if d < best {
                    best = d;
                }
            }
            sum += best;
        }
        sum / x.len() as f64
    };
    one_way(a, b) + one_way(b, a)
}

pub fn templates(points: usize) -> Vec<(SyntheticObject, CategoryTemplate)> {
    synthetic::catalogue()
        .into_iter()
        .map(|o| {
            let t = o.template(points, 11).unwrap();
            (o, t)
        })
        .collect()
}

pub fn rotated(cloud: &LabeledCloud, r: &Rotation) -> LabeledCloud {
    cano_core::geometry::rotate(cloud, r)
}

/// Signed difference `a - b` wrapped into `(-180, 180]` degrees.
pub fn angle_diff_deg(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(360.0);
    if d > 180.0 {
        d - 360.0
    } else {
        d
    }
}
