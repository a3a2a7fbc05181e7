//! Uniform flow past the (3,2,1) ellipsoid: solve for the density, then sample the
//! velocity on a normal line down to the surface, where it must vanish.

use std::path::PathBuf;

use nearstokes::geom::Chart;
use nearstokes::scene::SceneConfig;
use nearstokes::stokes::EvalOptions;

fn main() -> nearstokes::Result<()> {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("scenes/ellipsoid_321.toml");
    let cfg = SceneConfig::load(&path)?;
    let (scene, report) = cfg.prepare(1.0)?;
    if let Some(r) = report {
        println!("GMRES: {} iterations, residual {:.2e}, {} nodes", r.iterations, r.residual, r.unknowns);
    }
    let body = &scene.bodies[0];
    let x = body.ellipsoid.point(Chart::Grid1, 0.9, 0.4);
    let n = body.ellipsoid.unit_normal(&x);
    let plain = EvalOptions { correct: false, ..EvalOptions::default() };
    println!("{:>8} {:>14} {:>14}", "d", "|u| corrected", "|u| plain");
    for d in [1.0, 1e-1, 1e-2, 1e-3, 1e-4] {
        let y = body.frame.to_world_point(&(x + n * d));
        let c = scene.velocity(&y, &EvalOptions::default())?;
        let p = scene.velocity(&y, &plain)?;
        println!("{d:>8.0e} {:>14.3e} {:>14.3e}", c.norm(), p.norm());
    }
    Ok(())
}
