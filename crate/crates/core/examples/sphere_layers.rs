//! Both layer potentials of a constant density near the unit sphere.
//!
//! Outside, the single layer has a closed form; the double layer of a constant density
//! is `-f` inside and zero outside. The corrected errors stay flat as the target closes in.

use nearstokes::geom::{Chart, Pose, StandardEllipsoid};
use nearstokes::stokes::{eval_layer, Body, EvalOptions, LayerKind};
use nearstokes::Vec3;

fn slp_outside(f: &Vec3, x: &Vec3) -> Vec3 {
    let r = x.norm();
    let fr = f.dot(x);
    (f / r + x * fr / r.powi(3)) * 0.5 + (f / r.powi(3) - x * (3.0 * fr / r.powi(5))) / 6.0
}

fn main() -> nearstokes::Result<()> {
    let ell = StandardEllipsoid::sphere(1.0);
    let mut body = Body::new(ell, Pose::default(), (40, 20), (40, 20))?;
    let f = Vec3::new(1.0, 0.0, 0.0);
    body.set_density_fn(|_| f);

    let on = ell.point(Chart::Grid1, 0.4, 0.3);
    let plain = EvalOptions { correct: false, ..EvalOptions::default() };
    println!("{:>8} {:>12} {:>12} {:>12} {:>12}", "d", "S plain", "S corr", "D in plain", "D in corr");
    for d in [1e-1, 1e-2, 1e-3, 1e-4] {
        let out = on * (1.0 + d);
        let inn = on * (1.0 - d);
        let s_exact = slp_outside(&f, &out);
        let err = |kind, x: &Vec3, opts: &EvalOptions, want: &Vec3| -> nearstokes::Result<f64> {
            Ok((eval_layer(&body, kind, x, opts)?.value - want).norm())
        };
        println!(
            "{d:>8.0e} {:>12.3e} {:>12.3e} {:>12.3e} {:>12.3e}",
            err(LayerKind::Single, &out, &plain, &s_exact)?,
            err(LayerKind::Single, &out, &EvalOptions::default(), &s_exact)?,
            err(LayerKind::Double, &inn, &plain, &-f)?,
            err(LayerKind::Double, &inn, &EvalOptions::default(), &-f)?,
        );
    }
    Ok(())
}
