mod common;

use nearstokes::geom::{Chart, Pose, StandardEllipsoid};
use nearstokes::gmres::{gmres, GmresConfig};
use nearstokes::scene::Scene;
use nearstokes::solve::SolveConfig;
use nearstokes::stokes::{Body, EvalOptions};
use nearstokes::{expand::LayerSet, Error, Vec3};

#[test]
fn gmres_solves_a_small_nonsymmetric_system() {
    let a = [[4.0, 1.0, 0.0, 0.5], [-1.0, 3.0, 1.0, 0.0], [0.0, 2.0, 5.0, -1.0], [0.3, 0.0, 1.0, 2.0]];
    let want = [1.0, -2.0, 0.5, 3.0];
    let b: Vec<f64> = a.iter().map(|r| r.iter().zip(&want).map(|(x, y)| x * y).sum()).collect();
    let mut x = vec![0.0; 4];
    let out = gmres(
        |v, out| {
            for (i, r) in a.iter().enumerate() {
                out[i] = r.iter().zip(v).map(|(p, q)| p * q).sum();
            }
            Ok(())
        },
        &b,
        &mut x,
        &GmresConfig { restart: 10, max_iters: 20, tol: 1e-13 },
    )
    .unwrap();
    assert!(out.iterations <= 4);
    for (p, q) in x.iter().zip(want) {
        assert!((p - q).abs() < 1e-11);
    }
}

#[test]
fn gmres_reports_stagnation() {
    // A rotation by 90 degrees makes no progress with restart 1.
    let r = gmres(
        |v, out| {
            out[0] = -v[1];
            out[1] = v[0];
            Ok(())
        },
        &[1.0, 0.0],
        &mut [0.0, 0.0],
        &GmresConfig { restart: 1, max_iters: 10, tol: 1e-12 },
    );
    assert!(matches!(r, Err(Error::GmresStagnation { .. })));
}

#[test]
fn solved_sphere_recovers_stokes_flow() {
    let u = Vec3::new(0.2, -0.5, 1.0);
    let b = Body::new(StandardEllipsoid::sphere(1.0), Pose::new([0.3, 0.1, -0.4], [0.0; 3]), (24, 12), (24, 12)).unwrap();
    let mut scene = Scene::new(vec![b], u, LayerSet::BOTH).unwrap();
    let rep = scene.solve(&SolveConfig::default()).unwrap();
    assert!(rep.residual <= 1e-10);
    for f in scene.bodies[0].density(Chart::Grid1) {
        assert!((scene.bodies[0].frame.to_world(f) + u * 1.5).norm() < 1e-4);
    }
    for x in [Vec3::new(0.0, 0.0, 1.01), Vec3::new(1.3, -0.4, 0.2), Vec3::new(-2.0, 1.0, 3.0)] {
        let v = scene.velocity(&x, &EvalOptions::default()).unwrap();
        let want = Vec3::from(common::sphere_flow(1.0, u.into(), x.into()));
        assert!((v - want).norm() < 1e-4, "{x:?}: {v:?} vs {want:?}");
    }
}

#[test]
fn ellipsoid_surface_is_no_slip() {
    let ell = StandardEllipsoid::new(1.6, 1.0, 0.7).unwrap();
    let b = Body::new(ell, Pose::new([0.5, 0.7, 0.0], [0.0, 0.0, 0.0]), (40, 10), (30, 20)).unwrap();
    let mut scene = Scene::new(vec![b], Vec3::new(1.0, 0.0, 0.0), LayerSet::BOTH).unwrap();
    let rep = scene.solve(&SolveConfig::default()).unwrap();
    assert!(rep.residual <= 1e-10 && rep.iterations > 1);
    assert_eq!(rep.unknowns, 40 * 9 + 2);
    let body = &scene.bodies[0];
    for (a, be) in [(0.3, 0.2), (-2.0, -1.0), (1.4, 1.2)] {
        let xs = ell.point(Chart::Grid1, a, be);
        let x = body.frame.to_world_point(&(xs + ell.unit_normal(&xs) * 1e-3));
        let v = scene.velocity(&x, &EvalOptions::default()).unwrap();
        assert!(v.norm() < 1e-2, "({a}, {be}): {v:?}");
    }
}
