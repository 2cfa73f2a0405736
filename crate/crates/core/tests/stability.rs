use std::f64::consts::TAU;

use cano_core::geometry::Rotation;
use cano_core::stability::{
    box_mesh, center_of_mass, cylinder_mesh, select_upright, support_candidates, ExternalCommandScorer,
    MassEstimator, Mesh, StabilityHeuristic, SupportCandidate, UprightContext,
};
use cano_core::synthetic;
use nalgebra::{Point2, Point3, Vector3};
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

mod common;

use common::solids::{cantilever, inside_polygon, p, tetrahedron};

/// Parity of crossings of a ray along a generic direction.
fn inside_solid(mesh: &Mesh, q: &Point3<f64>) -> bool {
    let dir = Vector3::new(1.0, 0.1234, 0.0571);
    let mut hits = 0;
    for f in 0..mesh.faces().len() {
        let [a, b, c] = mesh.triangle(f);
        let (e1, e2) = (b - a, c - a);
        let h = dir.cross(&e2);
        let det = e1.dot(&h);
        if det.abs() < 1e-14 {
            continue;
        }
        let s = q - a;
        let u = s.dot(&h) / det;
        let qv = s.cross(&e1);
        let v = dir.dot(&qv) / det;
        let t = e2.dot(&qv) / det;
        if u >= 0.0 && v >= 0.0 && u + v <= 1.0 && t > 0.0 {
            hits += 1;
        }
    }
    hits % 2 == 1
}

fn monte_carlo_centroid(mesh: &Mesh, n: usize, seed: u64) -> Point3<f64> {
    let (mut lo, mut hi) = (p(f64::MAX, f64::MAX, f64::MAX), p(f64::MIN, f64::MIN, f64::MIN));
    for v in mesh.vertices() {
        lo = lo.inf(v);
        hi = hi.sup(v);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut sum, mut count) = (Vector3::zeros(), 0usize);
    for _ in 0..n {
        let q = p(
            rng.random_range(lo.x..hi.x),
            rng.random_range(lo.y..hi.y),
            rng.random_range(lo.z..hi.z),
        );
        if inside_solid(mesh, &q) {
            sum += q.coords;
            count += 1;
        }
    }
    Point3::from(sum / count as f64)
}

fn facing_down<'a>(cands: &'a [SupportCandidate], normal: &Vector3<f64>) -> &'a SupportCandidate {
    cands
        .iter()
        .find(|c| (c.facet_normal - normal).norm() < 1e-9)
        .expect("facet present")
}

#[test]
fn cube_has_six_valid_facets_with_half_unit_margin() {
    let cands = support_candidates(&box_mesh(p(-0.5, -0.5, -0.5), p(0.5, 0.5, 0.5))).unwrap();
    assert_eq!(cands.len(), 6);
    for c in &cands {
        assert!(c.valid);
        assert!((c.com_margin - 0.5).abs() < 1e-6, "{}", c.com_margin);
        assert!((c.rotation.apply_vector(&c.facet_normal) - Vector3::new(0.0, 0.0, -1.0)).norm() < 1e-6);
    }
}

#[test]
fn regular_tetrahedron_rests_on_all_four_faces() {
    let mesh = tetrahedron();
    let cands = support_candidates(&mesh).unwrap();
    assert_eq!(cands.len(), 4);
    assert!(cands.iter().all(|c| c.valid));
    // Inradius of a regular tetrahedron with edge a is a/sqrt(24); the
    // centroid projects to the face centroid, whose distance to each edge is
    // the triangle's inradius a/(2 sqrt 3).
    let a = 8f64.sqrt();
    for c in &cands {
        assert!((c.com_height - a / 24f64.sqrt()).abs() < 1e-9);
        assert!((c.com_margin - a / (2.0 * 3f64.sqrt())).abs() < 1e-9);
    }
}

#[test]
fn tall_thin_box_is_stable_on_every_face() {
    let cands = support_candidates(&box_mesh(p(0.0, 0.0, 0.0), p(0.2, 0.2, 2.0))).unwrap();
    assert_eq!(cands.len(), 6);
    assert!(cands.iter().all(|c| c.valid));
    assert!((cands[0].polygon_area - 0.4).abs() < 1e-9, "sorted by area");
}

#[test]
fn cantilever_overhang_facet_is_invalid() {
    let (mesh, com) = cantilever();
    let estimated = center_of_mass(&mesh).unwrap();
    assert_eq!(estimated.estimator, MassEstimator::Solid);
    assert!((estimated.point - com).norm() < 1e-9);

    let cands = support_candidates(&mesh).unwrap();
    let foot = facing_down(&cands, &-Vector3::z());
    let projected = foot.rotation.apply(&com);
    let oracle = inside_polygon(&foot.support_polygon, &Point2::new(projected.x, projected.y));
    assert!(!oracle, "center of mass projects outside the foot");
    assert!(foot.com_margin < 0.0);
    assert!(!foot.valid);
    assert!((foot.polygon_area - 0.04).abs() < 1e-9);

    for c in &cands {
        let q = c.rotation.apply(&com);
        let inside = inside_polygon(&c.support_polygon, &Point2::new(q.x, q.y));
        assert_eq!(inside, c.com_margin > 0.0, "margin sign disagrees with point-in-polygon");
    }
    assert!(cands.iter().any(|c| c.valid), "lying on the arm's top is stable");
}

#[test]
fn resting_facet_lies_on_the_ground_plane() {
    for mesh in [tetrahedron(), cantilever().0, synthetic::chair().mesh, synthetic::lamp().mesh] {
        for c in support_candidates(&mesh).unwrap() {
            let zs: Vec<f64> = mesh.vertices().iter().map(|v| c.rotation.apply(v).z).collect();
            let ground = zs.iter().copied().fold(f64::INFINITY, f64::min);
            let touching = zs.iter().filter(|z| (*z - ground).abs() < 1e-6).count();
            assert!(touching >= 3, "facet touches the ground at {touching} vertices");
        }
    }
}

#[test]
fn verdicts_do_not_depend_on_initial_orientation() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for mesh in [synthetic::chair().mesh, cantilever().0] {
        let key = |m: &Mesh| {
            let mut v: Vec<(f64, f64)> = support_candidates(m)
                .unwrap()
                .iter()
                .map(|c| (c.polygon_area, c.com_margin))
                .collect();
            // Facets of equal area may differ in the last bit; sort on a coarse key.
            v.sort_by(|a, b| ((a.0 * 1e6).round(), a.1).partial_cmp(&((b.0 * 1e6).round(), b.1)).unwrap());
            v
        };
        let base = key(&mesh);
        for _ in 0..5 {
            let turned = key(&mesh.rotated(&Rotation::random(&mut rng)));
            assert_eq!(base.len(), turned.len());
            for (a, b) in base.iter().zip(&turned) {
                assert!((a.0 - b.0).abs() < 1e-6 && (a.1 - b.1).abs() < 1e-6, "{a:?} vs {b:?}");
            }
        }
    }
}

#[test]
fn l_shape_center_of_mass_is_volume_weighted() {
    let lower = box_mesh(p(0.0, 0.0, 0.0), p(1.0, 1.0, 1.0));
    let upper = box_mesh(p(1.0, 0.0, 0.0), p(2.0, 1.0, 1.0));
    let c = center_of_mass(&Mesh::merge(&[lower, upper])).unwrap();
    assert!((c.point - p(1.0, 0.5, 0.5)).norm() < 1e-12);

    let small = box_mesh(p(0.0, 0.0, 0.0), p(1.0, 1.0, 1.0));
    let big = box_mesh(p(1.0, 0.0, 0.0), p(3.0, 2.0, 2.0));
    let expected = (Vector3::new(0.5, 0.5, 0.5) * 1.0 + Vector3::new(2.0, 1.0, 1.0) * 8.0) / 9.0;
    let c = center_of_mass(&Mesh::merge(&[small, big])).unwrap();
    assert!((c.point.coords - expected).norm() < 1e-12);
}

#[test]
fn solid_centroid_agrees_with_point_in_solid_sampling() {
    let wedge = Mesh::new(
        vec![p(0.0, 0.0, 0.0), p(2.0, 0.0, 0.0), p(0.0, 1.0, 0.0), p(0.0, 0.0, 1.0), p(2.0, 0.0, 1.0), p(0.0, 1.0, 1.0)],
        vec![[0, 2, 1], [3, 4, 5], [0, 1, 4], [0, 4, 3], [1, 2, 5], [1, 5, 4], [2, 0, 3], [2, 3, 5]],
    )
    .unwrap();
    let meshes = [
        box_mesh(p(-0.5, -0.5, -0.5), p(0.5, 0.5, 0.5)),
        box_mesh(p(1.0, 2.0, 3.0), p(1.3, 2.2, 5.0)),
        cylinder_mesh(p(0.0, 0.0, 0.0), 0.7, -0.2, 1.1, 24),
        tetrahedron().map_vertices(|v| p(v.x * 0.5 + 0.3, v.y, v.z * 2.0)),
        wedge,
    ];
    for (i, mesh) in meshes.iter().enumerate() {
        assert!(mesh.is_watertight());
        let c = center_of_mass(mesh).unwrap();
        assert_eq!(c.estimator, MassEstimator::Solid);
        let mc = monte_carlo_centroid(mesh, 20_000, i as u64);
        let tol = 0.01 * mesh.bounding_diagonal();
        assert!((c.point - mc).norm() < tol, "mesh {i}: {} vs {}", c.point, mc);
    }
}

#[test]
fn heuristic_stands_a_solid_mug_on_its_base() {
    let (r, h, n) = (0.4, 0.9, 32);
    let body = cylinder_mesh(p(0.0, 0.0, 0.0), r, 0.0, h, n);
    let handle = box_mesh(p(0.4, -0.05, 0.1), p(0.65, 0.05, 0.6));
    let mesh = Mesh::merge(&[body, handle]);

    let disc = 0.5 * n as f64 * r * r * (TAU / n as f64).sin();
    let (vb, zb) = (disc * h, h / 2.0);
    let (vh, zh) = (0.25 * 0.1 * 0.5, 0.35);
    let com_z = (vb * zb + vh * zh) / (vb + vh);
    let by_hand = disc - com_z;

    let cands = support_candidates(&mesh).unwrap();
    let scorer = StabilityHeuristic::default();
    let ctx = UprightContext {
        points: mesh.vertices(),
        mesh: Some(&mesh),
    };
    let choice = select_upright(&cands, &scorer, &ctx).unwrap();
    let chosen = &cands[choice.index];
    assert!((chosen.facet_normal + Vector3::z()).norm() < 1e-9, "bottom disc chosen");
    assert!((choice.score - by_hand).abs() < 1e-9, "{} vs {by_hand}", choice.score);
    let bottom = facing_down(&cands, &-Vector3::z());
    assert!((bottom.polygon_area - disc).abs() < 1e-9);
}

#[test]
fn cube_tie_goes_to_first_candidate_every_time() {
    let mesh = box_mesh(p(-0.5, -0.5, -0.5), p(0.5, 0.5, 0.5));
    let ctx = UprightContext {
        points: mesh.vertices(),
        mesh: Some(&mesh),
    };
    for _ in 0..3 {
        let cands = support_candidates(&mesh).unwrap();
        let choice = select_upright(&cands, &StabilityHeuristic::default(), &ctx).unwrap();
        assert_eq!(choice.index, 0);
        assert_eq!(choice.rotation, cands[0].rotation);
    }
}

#[test]
#[cfg(unix)]
fn external_scorer_argmax() {
    let mesh = box_mesh(p(-0.5, -0.5, -0.5), p(0.5, 0.5, 0.5));
    let cands: Vec<_> = support_candidates(&mesh).unwrap().into_iter().take(3).collect();
    let scorer = ExternalCommandScorer {
        program: "/bin/sh".into(),
        args: vec![
            "-c".into(),
            r#"test -f "$1/candidate_2.ply" || exit 3; awk 'BEGIN{split("0.1 0.9 0.3",s," ")} {print $1, s[NR]}' "$2""#.into(),
            "scorer".into(),
        ],
    };
    let ctx = UprightContext {
        points: mesh.vertices(),
        mesh: Some(&mesh),
    };
    let choice = select_upright(&cands, &scorer, &ctx).unwrap();
    assert_eq!(choice.index, 1);
    assert_eq!(choice.score, 0.9);

    let broken = ExternalCommandScorer {
        program: "/bin/sh".into(),
        args: vec!["-c".into(), "echo 0 1.0".into(), "scorer".into()],
    };
    assert!(select_upright(&cands, &broken, &ctx).is_err(), "missing scores are an error");
}
