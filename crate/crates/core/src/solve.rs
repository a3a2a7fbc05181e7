//! Second-kind boundary integral equation for bodies held fixed in a uniform stream.
//!
//! The velocity is `u = U∞ + Σ_b (S_b[f_b] + D_b[f_b])`. No-slip on every surface gives
//! `½ f + Σ_b (S_b + D_b^{pv})[f_b] = -U∞` at the primary-chart nodes.

use rayon::prelude::*;

use crate::expand::LayerSet;
use crate::gmres::{gmres, GmresConfig};
use crate::stokes::{Body, EvalOptions, Prepared};
use crate::{Result, Vec3};

#[derive(Debug, Clone, Copy)]
pub struct SolveConfig {
    pub gmres: GmresConfig,
    /// Correct near-singular interactions between different bodies.
    pub correct: bool,
}

impl Default for SolveConfig {
    fn default() -> Self {
        Self { gmres: GmresConfig::default(), correct: true }
    }
}

#[derive(Debug, Clone)]
pub struct SolveReport {
    pub iterations: usize,
    pub residual: f64,
    pub history: Vec<f64>,
    pub unknowns: usize,
}

/// Cross-body targets prepared once; `[target body][source body][node]`.
struct Layout {
    nodes: Vec<Vec<(usize, usize)>>,
    offsets: Vec<usize>,
    targets: Vec<Vec<Vec3>>,
    cross: Vec<Vec<Vec<Prepared>>>,
}

fn layout(bodies: &[Body], correct: bool) -> Result<Layout> {
    let nodes: Vec<Vec<(usize, usize)>> = bodies.iter().map(|b| b.primary_nodes()).collect();
    let mut offsets = vec![0];
    for n in &nodes {
        offsets.push(offsets.last().unwrap() + n.len());
    }
    let targets: Vec<Vec<Vec3>> = bodies
        .iter()
        .zip(&nodes)
        .map(|(b, ns)| {
            let g = &b.charts[0];
            ns.iter().map(|&(j, k)| b.frame.to_world_point(&g.pos[g.grid.index(j, k)])).collect()
        })
        .collect();
    let opts = EvalOptions { correct, ..EvalOptions::default() };
    let mut cross = Vec::with_capacity(bodies.len());
    for (ti, tpts) in targets.iter().enumerate() {
        let mut row = Vec::with_capacity(bodies.len());
        for (si, src) in bodies.iter().enumerate() {
            if si == ti {
                row.push(Vec::new());
                continue;
            }
            let prepared: Result<Vec<Prepared>> =
                tpts.par_iter().map(|x| src.prepare(x, LayerSet::BOTH, &opts)).collect();
            row.push(prepared?);
        }
        cross.push(row);
    }
    Ok(Layout { nodes, offsets, targets, cross })
}

/// Write unknowns (world frame) into the bodies' lattices.
fn scatter(bodies: &mut [Body], lay: &Layout, x: &[f64]) -> Result<()> {
    for (bi, body) in bodies.iter_mut().enumerate() {
        let g = body.charts[0].grid;
        let base = lay.offsets[bi];
        let last = lay.nodes[bi].len() - 1;
        let unknown = |i: usize| Vec3::new(x[3 * (base + i)], x[3 * (base + i) + 1], x[3 * (base + i) + 2]);
        let mut lat = Vec::with_capacity(g.len());
        for k in 0..=g.m {
            for j in 0..g.n {
                let i = if k == 0 {
                    0
                } else if k == g.m {
                    last
                } else {
                    1 + (k - 1) * g.n + j
                };
                lat.push(body.frame.to_standard(&unknown(i)));
            }
        }
        body.set_density_standard(lat)?;
    }
    Ok(())
}

fn apply(bodies: &[Body], lay: &Layout, x: &[f64], y: &mut [f64]) -> Result<()> {
    for (bi, body) in bodies.iter().enumerate() {
        let g = &body.charts[0];
        let base = lay.offsets[bi];
        let vals: Result<Vec<Vec3>> = lay.nodes[bi]
            .par_iter()
            .enumerate()
            .map(|(i, &(j, k))| {
                let idx = g.grid.index(j, k);
                let f_std = body.density(crate::geom::Chart::Grid1)[idx];
                let (s, d) = body.onsurface_standard(&g.pos[idx], &f_std, LayerSet::BOTH);
                let mut v = body.frame.to_world(&(s + d));
                for (si, src) in bodies.iter().enumerate() {
                    if si != bi {
                        let (s, d) = src.evaluate(&lay.cross[bi][si][i], LayerSet::BOTH)?;
                        v += s + d;
                    }
                }
                let f = Vec3::new(x[3 * (base + i)], x[3 * (base + i) + 1], x[3 * (base + i) + 2]);
                Ok(f * 0.5 + v)
            })
            .collect();
        for (i, v) in vals?.into_iter().enumerate() {
            y[3 * (base + i)..3 * (base + i) + 3].copy_from_slice(v.as_slice());
        }
    }
    let _ = &lay.targets;
    Ok(())
}

/// Solve for the densities of all bodies and leave them set on the bodies.
pub fn solve_densities(bodies: &mut [Body], u_inf: Vec3, cfg: &SolveConfig) -> Result<SolveReport> {
    let lay = layout(bodies, cfg.correct)?;
    let total = *lay.offsets.last().unwrap();
    let b: Vec<f64> = (0..total).flat_map(|_| [-u_inf.x, -u_inf.y, -u_inf.z]).collect();
    // Start from the single-sphere density -3U/(2a) with a the mean semi-axis.
    let mut x = Vec::with_capacity(3 * total);
    for (bi, body) in bodies.iter().enumerate() {
        let a = body.ellipsoid.axes().iter().sum::<f64>() / 3.0;
        for _ in 0..lay.nodes[bi].len() {
            x.extend_from_slice((u_inf * (-1.5 / a)).as_slice());
        }
    }
    let out = {
        let bodies_cell = std::cell::RefCell::new(&mut *bodies);
        gmres(
            |v, y| {
                let mut guard = bodies_cell.borrow_mut();
                scatter(&mut guard, &lay, v)?;
                apply(&guard, &lay, v, y)
            },
            &b,
            &mut x,
            &cfg.gmres,
        )?
    };
    scatter(bodies, &lay, &x)?;
    Ok(SolveReport { iterations: out.iterations, residual: out.residual, history: out.history, unknowns: total })
}
