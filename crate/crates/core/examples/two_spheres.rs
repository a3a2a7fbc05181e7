//! Two spheres 0.05 apart: solve, probe the gap, trace streamlines.

use std::path::PathBuf;

use nearstokes::flowsim::{streamlines, SceneField, TraceStatus};
use nearstokes::scene::SceneConfig;
use nearstokes::stokes::EvalOptions;
use nearstokes::Vec3;

fn main() -> nearstokes::Result<()> {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("scenes/two_spheres.toml");
    let cfg = SceneConfig::load(&path)?;
    let (scene, report) = cfg.prepare(0.5)?;
    if let Some(r) = report {
        println!("GMRES: {} iterations, residual {:.2e}", r.iterations, r.residual);
    }
    let (a, b) = (scene.bodies[0].pose.center(), scene.bodies[1].pose.center());
    let mid = (a + b) * 0.5;
    let axis = (b - a).normalize();
    let side = axis.cross(&Vec3::x()).try_normalize(1e-8).unwrap_or_else(|| axis.cross(&Vec3::y()).normalize());
    for s in [0.0, 0.1, 0.2, 0.3] {
        let x = mid + side * s;
        let u = scene.velocity(&x, &EvalOptions::default())?;
        println!("gap offset {s:.1}: u = [{:+.5}, {:+.5}, {:+.5}]", u.x, u.y, u.z);
    }
    let field = SceneField { scene: &scene, opts: EvalOptions::default() };
    let lines = streamlines(&field, cfg.streamlines.as_ref().unwrap(), cfg.trace.dt, cfg.trace.t_max)?;
    let bad = lines.iter().filter(|l| l.status == TraceStatus::EnteredBody).count();
    println!("{} streamlines, {bad} entered a body", lines.len());
    Ok(())
}
