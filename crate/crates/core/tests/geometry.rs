mod common;

use std::f64::consts::PI;

use cano_core::geometry::{
    chamfer_distance, geodesic_angle, normalize_to_unit_sphere, principal_axes, rotate, LabeledCloud, Rotation,
};
use cano_core::Error;
use common::brute_chamfer;
use nalgebra::{Point3, Vector3};
use proptest::prelude::*;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_cloud(rng: &mut ChaCha8Rng, n: usize) -> Vec<Point3<f64>> {
    (0..n)
        .map(|_| Point3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect()
}

fn point() -> impl Strategy<Value = Point3<f64>> {
    (-2.0..2.0f64, -2.0..2.0f64, -2.0..2.0f64).prop_map(|(x, y, z)| Point3::new(x, y, z))
}

fn rotation() -> impl Strategy<Value = Rotation> {
    any::<u64>().prop_map(|s| Rotation::random(&mut ChaCha8Rng::seed_from_u64(s)))
}

/// `2 acos |q1 · q2|` in degrees.
fn quaternion_angle(a: &Rotation, b: &Rotation) -> f64 {
    let (p, q) = (a.to_quaternion_wxyz(), b.to_quaternion_wxyz());
    let dot: f64 = p.iter().zip(&q).map(|(x, y)| x * y).sum();
    (2.0 * dot.abs().min(1.0).acos()).to_degrees()
}

#[test]
fn indexed_chamfer_equals_brute_force_bit_for_bit() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for n in [1, 7, 100, 1000] {
        let a = random_cloud(&mut rng, n);
        let b = random_cloud(&mut rng, n + 13);
        assert_eq!(chamfer_distance(&a, &b).unwrap().to_bits(), brute_chamfer(&a, &b).to_bits(), "n = {n}");
    }
}

#[test]
fn offset_cube_normalizes_to_closed_form() {
    let pts: Vec<Point3<f64>> = (0..8)
        .map(|i| Point3::new(5.0 + (i & 1) as f64 - 0.5, 5.0 + ((i >> 1) & 1) as f64 - 0.5, 5.0 + (i >> 2) as f64 - 0.5))
        .collect();
    let (c, t) = normalize_to_unit_sphere(&LabeledCloud::new(pts).unwrap()).unwrap();
    assert!((t.scale - 1.0 / (3f64.sqrt() * 0.5)).abs() < 1e-12);
    assert!((t.scale - 1.1547).abs() < 1e-4);
    assert!(c.centroid().unwrap().coords.norm() < 1e-12);
    let max = c.points().iter().map(|p| p.coords.norm()).fold(0.0, f64::max);
    assert!((max - 1.0).abs() < 1e-12);
}

#[test]
fn repeated_point_is_degenerate() {
    let c = LabeledCloud::new(vec![Point3::new(0.3, 0.3, 0.3); 100]).unwrap();
    assert!(matches!(normalize_to_unit_sphere(&c), Err(Error::DegenerateGeometry(_))));
}

#[test]
fn closed_form_angles() {
    assert_eq!(geodesic_angle(&Rotation::identity(), &Rotation::identity()), 0.0);
    assert!((geodesic_angle(&Rotation::identity(), &Rotation::about_z(PI)) - 180.0).abs() < 1e-12);
    let p = Rotation::about_z(PI / 2.0).apply(&Point3::new(1.0, 0.0, 0.0));
    assert!((p - Point3::new(0.0, 1.0, 0.0)).norm() < 1e-12);
}

#[test]
fn principal_axes_follow_fifty_rotations() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    // Stretched and skewed so eigenvalues and third moments are distinct.
    let pts: Vec<Point3<f64>> = (0..600)
        .map(|_| {
            let u: f64 = rng.random();
            Point3::new(3.0 * u * u, rng.random_range(-1.0..1.0) * (1.0 + u), rng.random_range(-0.3..0.3))
        })
        .collect();
    let cloud = LabeledCloud::new(pts).unwrap();
    let base = principal_axes(&cloud).unwrap();
    assert!(!base.degenerate);
    for _ in 0..50 {
        let r = Rotation::random(&mut rng);
        let f = principal_axes(&rotate(&cloud, &r)).unwrap();
        for (got, want) in [(f.v1, base.v1), (f.v2, base.v2)] {
            assert!((got - r.apply_vector(&want)).norm() < 1e-6, "{got} vs {}", r.apply_vector(&want));
        }
        assert!(f.v1.dot(&f.v2).abs() < 1e-6);
        assert!((f.v1.norm() - 1.0).abs() < 1e-9 && (f.v2.norm() - 1.0).abs() < 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn chamfer_is_symmetric_and_matches_oracle(
        a in prop::collection::vec(point(), 1..200),
        b in prop::collection::vec(point(), 1..200),
    ) {
        let ab = chamfer_distance(&a, &b).unwrap();
        prop_assert_eq!(ab.to_bits(), chamfer_distance(&b, &a).unwrap().to_bits());
        prop_assert_eq!(ab.to_bits(), brute_chamfer(&a, &b).to_bits());
        prop_assert!(ab >= 0.0);
    }

    #[test]
    fn chamfer_is_rigid_invariant(
        a in prop::collection::vec(point(), 1..150),
        b in prop::collection::vec(point(), 1..150),
        r in rotation(),
    ) {
        let ra: Vec<_> = a.iter().map(|p| r.apply(p)).collect();
        let rb: Vec<_> = b.iter().map(|p| r.apply(p)).collect();
        let d = chamfer_distance(&a, &b).unwrap() - chamfer_distance(&ra, &rb).unwrap();
        prop_assert!(d.abs() < 1e-9, "{}", d);
    }

    #[test]
    fn normalization_contract(pts in prop::collection::vec(point(), 2..200), shift in point(), s in 0.1..10.0f64) {
        let moved: Vec<_> = pts.iter().map(|p| Point3::from(p.coords * s + shift.coords)).collect();
        let cloud = LabeledCloud::new(moved).unwrap();
        prop_assume!(normalize_to_unit_sphere(&cloud).is_ok());
        let (n, t) = normalize_to_unit_sphere(&cloud).unwrap();
        prop_assert!(n.centroid().unwrap().coords.norm() < 1e-9);
        let max = n.points().iter().map(|p| p.coords.norm()).fold(0.0, f64::max);
        prop_assert!((max - 1.0).abs() < 1e-9);
        for (orig, p) in cloud.points().iter().zip(n.points()) {
            prop_assert!((t.invert(p) - orig).norm() < 1e-9 * s.max(1.0) * 10.0);
        }
        let (_, again) = normalize_to_unit_sphere(&n).unwrap();
        prop_assert!(again.translation.norm() < 1e-9 && (again.scale - 1.0).abs() < 1e-9);
    }

    #[test]
    fn geodesic_is_a_metric_and_matches_quaternions(a in rotation(), b in rotation(), c in rotation()) {
        let ab = geodesic_angle(&a, &b);
        prop_assert!((ab - geodesic_angle(&b, &a)).abs() < 1e-9);
        prop_assert!((0.0..=180.0).contains(&ab));
        prop_assert!((ab - quaternion_angle(&a, &b)).abs() < 1e-6);
        prop_assert!(geodesic_angle(&a, &c) <= ab + geodesic_angle(&b, &c) + 1e-9);
        prop_assert!(geodesic_angle(&a, &a) < 1e-12);
    }

    #[test]
    fn yaw_composition_adds_angles(t1 in -10.0..10.0f64, t2 in -10.0..10.0f64) {
        let lhs = Rotation::about_z(t1) * Rotation::about_z(t2);
        prop_assert!(geodesic_angle(&lhs, &Rotation::about_z((t1 + t2).rem_euclid(2.0 * PI))) < 1e-9);
    }

    #[test]
    fn rotation_round_trip_and_labels(pts in prop::collection::vec(point(), 4..100), r in rotation()) {
        let n = pts.len();
        let cloud = LabeledCloud::new(pts)
            .unwrap()
            .with_labels((0..n as u32).map(|i| i % 3).collect(), vec!["a".into(), "b".into(), "c".into()])
            .unwrap();
        let back = rotate(&rotate(&cloud, &r), &r.inverse());
        prop_assert_eq!(back.labels(), cloud.labels());
        for (p, q) in back.points().iter().zip(cloud.points()) {
            prop_assert!((p - q).norm() < 1e-9);
        }
        prop_assert!((r.apply_vector(&Vector3::x()).norm() - 1.0).abs() < 1e-12);
    }
}
