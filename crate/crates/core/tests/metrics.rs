mod common;

use std::f64::consts::PI;
use std::sync::Mutex;

use cano_core::criteria::{horizontal_geometric, CriterionConfig};
use cano_core::geometry::{geodesic_angle, LabeledCloud, Rotation};
use cano_core::metrics::{
    accuracy_at, gt_equivariance_consistency, instance_consistency, iqr, mean_abs_error, quantile,
    sym_aware_angle, Instance, Perturbation, SymmetrySpec,
};
use cano_core::stability::Mesh;
use cano_core::{Error, Result};
use proptest::prelude::*;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

const Z: [f64; 3] = [0.0, 0.0, 1.0];

fn instance(symmetry: SymmetrySpec) -> Instance {
    let (_, t) = common::templates(256).swap_remove(0);
    Instance {
        cloud: t.cloud,
        mesh: None,
        symmetry,
    }
}

/// Replays the perturbations a seeded run will draw, so it can return their exact inverses.
fn inverse_oracle(seed: u64, n: usize, p: Perturbation) -> impl Fn(&LabeledCloud, Option<&Mesh>) -> Result<Rotation> + Sync {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let draws: Vec<Rotation> = (0..n).map(|_| p.sample(&mut rng)).collect();
    let next = Mutex::new(draws.into_iter());
    move |_: &LabeledCloud, _: Option<&Mesh>| Ok(next.lock().unwrap().next().expect("one call per trial").inverse())
}

/// Haar mean of the relative angle between independent random rotations,
/// estimated from its own sample with the quaternion formula.
fn haar_pairwise_mean(n: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let qs: Vec<[f64; 4]> = (0..n).map(|_| Rotation::random(&mut rng).to_quaternion_wxyz()).collect();
    let mut sum = 0.0;
    let mut pairs = 0;
    for i in 0..n {
        for j in i + 1..n {
            let dot: f64 = qs[i].iter().zip(&qs[j]).map(|(a, b)| a * b).sum();
            sum += 2.0 * dot.abs().min(1.0).acos();
            pairs += 1;
        }
    }
    sum / pairs as f64
}

#[test]
fn metric_fixtures() {
    assert_eq!(accuracy_at(&[5.0, 15.0, 25.0, 35.0], 10.0).unwrap(), 0.25);
    assert_eq!(accuracy_at(&[5.0, 15.0, 25.0, 35.0], 30.0).unwrap(), 0.75);
    assert_eq!(accuracy_at(&[0.0; 7], 0.0).unwrap(), 1.0);
    let e = [1.0, 2.0, 3.0, 4.0];
    assert_eq!(mean_abs_error(&e).unwrap(), 2.5);
    assert_eq!(quantile(&e, 0.75).unwrap(), 3.25);
    assert_eq!(quantile(&e, 0.25).unwrap(), 1.75);
    assert_eq!(iqr(&e).unwrap(), 1.5);
    assert_eq!((mean_abs_error(&[4.5; 9]).unwrap(), iqr(&[4.5; 9]).unwrap()), (4.5, 0.0));
    assert_eq!(iqr(&[17.0]).unwrap(), 0.0);
    assert!(matches!(mean_abs_error::<f64>(&[]), Err(Error::InvalidInput(_))));
    assert!(matches!(accuracy_at::<f64>(&[], 10.0), Err(Error::InvalidInput(_))));
}

#[test]
fn random_rotation_accuracy_matches_cap_measure() {
    // P(angle <= e) for a Haar rotation is (e - sin e) / pi.
    let eps = 30f64.to_radians();
    let expected = (eps - eps.sin()) / PI;
    let mut rng = ChaCha8Rng::seed_from_u64(30);
    let errors: Vec<f64> = (0..1000)
        .map(|_| sym_aware_angle(&Rotation::random(&mut rng), &Rotation::identity(), &SymmetrySpec::None))
        .collect();
    let got = accuracy_at(&errors, 30.0).unwrap();
    assert!((got - expected).abs() < 0.02, "{got} vs {expected}");
}

#[test]
fn symmetry_fixtures() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let quarter = SymmetrySpec::discrete(Z, 90.0).unwrap();
    let gt = Rotation::random(&mut rng);
    let e = sym_aware_angle(&(gt * Rotation::about_z(85f64.to_radians())), &gt, &quarter);
    assert!((e - 5.0).abs() < 1e-9, "{e}");
    let oracle = (0..4)
        .map(|k| geodesic_angle(&(gt * Rotation::about_z(85f64.to_radians())), &(gt * Rotation::about_z(k as f64 * PI / 2.0))))
        .fold(f64::INFINITY, f64::min);
    assert!((e - oracle).abs() < 1e-9);

    let round = SymmetrySpec::continuous(Z).unwrap();
    for _ in 0..50 {
        let gt = Rotation::random(&mut rng);
        let phi = rng.random_range(0.0..2.0 * PI);
        assert!(sym_aware_angle(&(gt * Rotation::about_z(phi)), &gt, &round) < 1e-9);
    }
    assert!(sym_aware_angle(&(gt * Rotation::about_z(73f64.to_radians())), &gt, &round) < 1e-9);
}

#[test]
fn exact_inverse_gives_zero_consistency() {
    for (seed, p) in [(1, Perturbation::Haar), (2, Perturbation::Yaw), (3, Perturbation::Haar)] {
        let inst = instance(SymmetrySpec::None);
        let ic = instance_consistency(&inverse_oracle(seed, 12, p), &inst, 12, seed, p).unwrap();
        let gec = gt_equivariance_consistency(&inverse_oracle(seed, 12, p), &inst, &Rotation::identity(), 12, seed, p)
            .unwrap();
        assert!(ic.value < 1e-12 && gec.value < 1e-12, "{} {}", ic.value, gec.value);
        assert_eq!((ic.failures, gec.failures), (0, 0));
    }
}

#[test]
fn identity_canonicalizer_matches_haar_oracle() {
    let identity = |_: &LabeledCloud, _: Option<&Mesh>| Ok(Rotation::identity());
    let ic = instance_consistency(&identity, &instance(SymmetrySpec::None), 200, 8, Perturbation::Haar).unwrap();
    let oracle = haar_pairwise_mean(200, 1234);
    let analytic = PI / 2.0 + 2.0 / PI;
    println!("identity IC {:.4} rad, Monte-Carlo oracle {oracle:.4}, analytic {analytic:.4}", ic.value);
    assert!((ic.value - oracle).abs() < 0.05);
    assert!((oracle - analytic).abs() < 0.05);
}

#[test]
fn constant_yaw_bias_gives_matching_gec_and_triangle_inequality() {
    let bias = Rotation::about_z(0.1);
    let seed = 5;
    let inner = inverse_oracle(seed, 16, Perturbation::Haar);
    let biased = move |c: &LabeledCloud, m: Option<&Mesh>| Ok(bias * inner(c, m)?);
    let inst = instance(SymmetrySpec::None);
    let gec = gt_equivariance_consistency(&biased, &inst, &Rotation::identity(), 16, seed, Perturbation::Haar).unwrap();
    assert!((gec.value - 0.1).abs() < 1e-9, "{}", gec.value);

    let fixed = Rotation::random(&mut ChaCha8Rng::seed_from_u64(0));
    let constant = move |_: &LabeledCloud, _: Option<&Mesh>| Ok(fixed);
    let r = gt_equivariance_consistency(&constant, &inst, &Rotation::identity(), 10, 9, Perturbation::Haar).unwrap();
    for j in 0..r.orientations.len() {
        for l in 0..r.orientations.len() {
            let d = geodesic_angle(&r.orientations[j], &r.orientations[l]).to_radians();
            assert!(d <= r.per_trial[j] + r.per_trial[l] + 1e-9);
        }
    }
}

#[test]
fn failing_trials_are_counted() {
    let calls = Mutex::new(0);
    let flaky = |_: &LabeledCloud, _: Option<&Mesh>| {
        let mut n = calls.lock().unwrap();
        *n += 1;
        if *n % 3 == 0 { Err(Error::NoStablePose) } else { Ok(Rotation::identity()) }
    };
    let r = instance_consistency(&flaky, &instance(SymmetrySpec::None), 9, 1, Perturbation::Haar).unwrap();
    assert_eq!((r.trials, r.failures, r.orientations.len()), (9, 3, 6));
    assert!(instance_consistency(&flaky, &instance(SymmetrySpec::None), 1, 1, Perturbation::Haar).is_err());
}

#[test]
fn geometric_canonicalizer_is_consistent_under_yaw() {
    let cfg = CriterionConfig::default();
    for (o, template) in common::templates(512).into_iter().filter(|(o, _)| o.category != "desk").take(2) {
        let inst = Instance {
            cloud: template.cloud.clone(),
            mesh: None,
            symmetry: SymmetrySpec::None,
        };
        let hg = |c: &LabeledCloud, _: Option<&Mesh>| Ok(horizontal_geometric(c, &template, &cfg)?.r_g);
        let ic = instance_consistency(&hg, &inst, 6, 21, Perturbation::Yaw).unwrap();
        println!("{} HG IC {:.5} rad", o.category, ic.value);
        assert!(ic.value <= 0.004, "{}: {}", o.category, ic.value);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn symmetry_never_increases_error(seed in any::<u64>(), order in 2usize..8) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (p, g) = (Rotation::random(&mut rng), Rotation::random(&mut rng));
        let plain = geodesic_angle(&p, &g);
        let d = SymmetrySpec::discrete([0.0, 1.0, 0.0], 360.0 / order as f64).unwrap();
        prop_assert!(sym_aware_angle(&p, &g, &d) <= plain + 1e-9);
        prop_assert!(sym_aware_angle(&p, &g, &SymmetrySpec::continuous(Z).unwrap()) <= plain + 1e-9);
        for s in d.elements() {
            prop_assert!((sym_aware_angle(&p, &(g * s), &d) - sym_aware_angle(&p, &g, &d)).abs() < 1e-9);
        }
    }

    #[test]
    fn metrics_ignore_sample_order(mut v in prop::collection::vec(0.0..180.0f64, 1..40), seed in any::<u64>()) {
        let before = (mean_abs_error(&v).unwrap(), iqr(&v).unwrap(), accuracy_at(&v, 30.0).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for i in (1..v.len()).rev() {
            v.swap(i, rng.random_range(0..=i));
        }
        let after = (mean_abs_error(&v).unwrap(), iqr(&v).unwrap(), accuracy_at(&v, 30.0).unwrap());
        prop_assert!((before.0 - after.0).abs() < 1e-9);
        prop_assert_eq!((before.1, before.2), (after.1, after.2));
    }
}
