//! The work behind each CLI subcommand, callable from library code.

use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::flowsim::{shadow_experiment, streamlines, SceneField, ShadowSetup, Streamline, TraceRecord};
use crate::geom::Chart;
use crate::io;
use crate::scene::{Scene, SceneConfig, Side};
use crate::solve::SolveReport;
use crate::stokes::{EvalFlags, EvalOptions};
use crate::{Error, Result, Vec3};

/// Settings shared by the subcommands; `None` fields fall back to the scene file.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub no_correction: bool,
    pub dt: Option<f64>,
    pub tol: Option<f64>,
    pub t_max: Option<f64>,
    /// Checkpoint to read densities from instead of solving.
    pub density: Option<PathBuf>,
}

impl RunOptions {
    pub fn eval_options(&self) -> EvalOptions {
        EvalOptions { correct: !self.no_correction, ..EvalOptions::default() }
    }
}

fn config_with(cfg: &SceneConfig, run: &RunOptions) -> SceneConfig {
    let mut c = cfg.clone();
    if let Some(t) = run.tol {
        c.solver.tol = t;
    }
    if let Some(dt) = run.dt {
        c.trace.dt = dt;
    }
    if let Some(t) = run.t_max {
        c.trace.t_max = t;
    }
    c
}

/// Build the scene at `scale` with densities from the checkpoint, the solver or the closed form.
pub fn scene_with_densities(cfg: &SceneConfig, scale: f64, run: &RunOptions) -> Result<(Scene, Option<SolveReport>)> {
    let cfg = config_with(cfg, run);
    match &run.density {
        Some(p) => {
            let bodies = io::load_checkpoint(p)?;
            Ok((Scene::new(bodies, cfg.u_inf(), cfg.layers.set())?, None))
        }
        None => cfg.prepare(scale),
    }
}

/// Solve the densities, write the checkpoint to `out` and the residual log next to it.
///
/// Here `no_correction` applies to the solve itself.
pub fn cmd_solve(cfg: &SceneConfig, scale: f64, run: &RunOptions, out: &Path) -> Result<SolveReport> {
    let mut c = config_with(cfg, run);
    if run.no_correction {
        c.solver.correct = false;
    }
    let mut scene = c.build(scale)?;
    let report = scene.solve(&c.solve_config())?;
    io::save_checkpoint(out, &scene.bodies)?;
    let log = residual_log_path(out);
    io::write_csv(
        Some(&log),
        &["iteration", "residual"],
        report.history.iter().enumerate().map(|(i, r)| vec![(i + 1).to_string(), io::fmt(*r)]),
    )?;
    Ok(report)
}

pub fn residual_log_path(checkpoint: &Path) -> PathBuf {
    let mut s = checkpoint.as_os_str().to_owned();
    s.push(".residuals.csv");
    PathBuf::from(s)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceRow {
    /// `n1` of the first body.
    pub n: usize,
    pub d: f64,
    pub err_corrected: f64,
    pub err_uncorrected: f64,
}

/// Targets at distance `d` from the first body, over a `samples²` patch of its first chart.
pub fn patch_targets(scene: &Scene, cfg: &crate::scene::ConvergenceConfig, d: f64) -> Result<Vec<Vec3>> {
    let body = scene.bodies.first().ok_or_else(|| Error::Invalid("the sweep needs a body".into()))?;
    let ell = &body.ellipsoid;
    let s = match cfg.side {
        Side::Exterior => 1.0,
        Side::Interior => -1.0,
    };
    let k = cfg.samples.max(1);
    let lin = |r: [f64; 2], i: usize| if k == 1 { r[0] } else { r[0] + (r[1] - r[0]) * i as f64 / (k - 1) as f64 };
    let mut out = Vec::with_capacity(k * k);
    for ib in 0..k {
        for ia in 0..k {
            let (a, b) = (lin(cfg.alpha, ia), lin(cfg.beta, ib));
            let x = ell.point(Chart::Grid1, a, b);
            let n = ell.unit_normal(&x);
            out.push(body.frame.to_world_point(&(x + n * (s * d))));
        }
    }
    Ok(out)
}

fn max_error(scene: &Scene, xs: &[Vec3], exact: &[Vec3], opts: &EvalOptions) -> Result<f64> {
    let u = scene.velocities(xs, opts)?;
    Ok(u.iter().zip(exact).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max))
}

/// Maximum velocity error against the closed form (one sphere, constant density) or a reference checkpoint.
pub fn cmd_convergence(
    cfg: &SceneConfig,
    scales: &[f64],
    reference: Option<&Path>,
    run: &RunOptions,
) -> Result<Vec<ConvergenceRow>> {
    let conv = cfg.convergence.as_ref().ok_or_else(|| Error::Invalid("scene has no [convergence] table".into()))?;
    let reference = match reference {
        Some(p) => Some(Scene::new(io::load_checkpoint(p)?, cfg.u_inf(), cfg.layers.set())?),
        None => None,
    };
    let mut rows = Vec::new();
    for &scale in scales {
        let (scene, _) = scene_with_densities(cfg, scale, &RunOptions { density: None, ..run.clone() })?;
        let n = scene.bodies[0].grid(Chart::Grid1).n;
        for &d in &conv.distances {
            if !(d > 0.0) {
                return Err(Error::Invalid(format!("distance {d} must be positive")));
            }
            let xs = patch_targets(&scene, conv, d)?;
            let exact: Vec<Vec3> = match &reference {
                Some(r) => r.velocities(&xs, &EvalOptions::default())?,
                None => xs
                    .iter()
                    .map(|x| scene.analytic_velocity(x))
                    .collect::<Option<Vec<_>>>()
                    .ok_or_else(|| Error::Invalid("no closed form for this scene; pass a reference checkpoint".into()))?,
            };
            let unc = max_error(&scene, &xs, &exact, &EvalOptions { correct: false, ..EvalOptions::default() })?;
            let cor = if run.no_correction { unc } else { max_error(&scene, &xs, &exact, &EvalOptions::default())? };
            rows.push(ConvergenceRow { n, d, err_corrected: cor, err_uncorrected: unc });
        }
    }
    Ok(rows)
}

pub fn write_convergence(out: Option<&Path>, rows: &[ConvergenceRow]) -> Result<()> {
    io::write_csv(
        out,
        &io::CONVERGENCE_HEADER,
        rows.iter().map(|r| vec![r.n.to_string(), io::fmt(r.d), io::fmt(r.err_corrected), io::fmt(r.err_uncorrected)]),
    )
}

pub fn cmd_streamlines(cfg: &SceneConfig, scale: f64, run: &RunOptions) -> Result<Vec<Streamline>> {
    let sl = cfg.streamlines.as_ref().ok_or_else(|| Error::Invalid("scene has no [streamlines] table".into()))?;
    let (scene, _) = scene_with_densities(cfg, scale, run)?;
    let c = config_with(cfg, run);
    let field = SceneField { scene: &scene, opts: run.eval_options() };
    streamlines(&field, sl, c.trace.dt, c.trace.t_max)
}

/// Traversal experiment; `reference` is a trace CSV from a finer run.
pub fn cmd_shadow(cfg: &SceneConfig, scale: f64, reference: Option<&Path>, run: &RunOptions) -> Result<Vec<TraceRecord>> {
    let sh = cfg.shadow.as_ref().ok_or_else(|| Error::Invalid("scene has no [shadow] table".into()))?;
    let setup = ShadowSetup::from_config(sh)?;
    let reference = reference.map(io::read_trace_csv).transpose()?;
    let (scene, _) = scene_with_densities(cfg, scale, run)?;
    let c = config_with(cfg, run);
    let field = SceneField { scene: &scene, opts: run.eval_options() };
    shadow_experiment(&field, &setup, c.trace.dt, c.trace.t_max, reference.as_deref())
}

/// Per-body evaluation report at one target.
#[derive(Debug, Clone)]
pub struct Probe {
    pub body: usize,
    pub flags: EvalFlags,
    pub single: Vec3,
    pub double: Vec3,
}

pub fn cmd_eval(cfg: &SceneConfig, scale: f64, x: Vec3, run: &RunOptions) -> Result<(Vec3, Vec<Probe>)> {
    let (scene, _) = scene_with_densities(cfg, scale, run)?;
    let opts = run.eval_options();
    let probes = scene
        .bodies
        .par_iter()
        .enumerate()
        .map(|(i, b)| {
            let prep = b.prepare(&x, scene.layers, &opts)?;
            let (s, d) = b.evaluate(&prep, scene.layers)?;
            Ok(Probe { body: i, flags: prep.flags, single: s, double: d })
        })
        .collect::<Result<Vec<_>>>()?;
    let u = probes.iter().fold(scene.u_inf, |acc, p| acc + p.single + p.double);
    Ok((u, probes))
}
