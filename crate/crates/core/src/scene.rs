//! Scene files and the assembled velocity field `u = U∞ + Σ (S_k + D_k)[f_k]`.

use std::path::Path;

use rayon::prelude::*;
use serde::Deserialize;

use crate::expand::LayerSet;
use crate::geom::{Pose, StandardEllipsoid};
use crate::gmres::GmresConfig;
use crate::solve::{solve_densities, SolveConfig, SolveReport};
use crate::stokes::{Body, EvalOptions};
use crate::{Error, Result, Vec3};

/// An angle written either as a number or as `"pi/3"`, `"-7pi/8"`, `"2*pi/5"`.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(try_from = "AngleRepr")]
pub struct Angle(pub f64);

#[derive(Deserialize)]
#[serde(untagged)]
enum AngleRepr {
    Number(f64),
    Text(String),
}

impl TryFrom<AngleRepr> for Angle {
    type Error = String;

    fn try_from(r: AngleRepr) -> std::result::Result<Self, String> {
        match r {
            AngleRepr::Number(v) => Ok(Angle(v)),
            AngleRepr::Text(s) => parse_angle(&s).map(Angle).ok_or_else(|| format!("cannot read angle {s:?}")),
        }
    }
}

fn parse_angle(s: &str) -> Option<f64> {
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    let (sign, t) = match t.strip_prefix('-') {
        Some(rest) => (-1.0, rest.to_string()),
        None => (1.0, t.trim_start_matches('+').to_string()),
    };
    let (num, den) = match t.split_once('/') {
        Some((a, b)) => (a.to_string(), b.parse::<f64>().ok()?),
        None => (t.clone(), 1.0),
    };
    let value = match num.strip_suffix("pi") {
        Some(coef) => {
            let coef = coef.trim_end_matches('*');
            let c = if coef.is_empty() { 1.0 } else { coef.parse::<f64>().ok()? };
            c * std::f64::consts::PI
        }
        None => num.parse::<f64>().ok()?,
    };
    Some(sign * value / den)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Layers {
    #[default]
    Both,
    Single,
    Double,
}

impl Layers {
    pub fn set(self) -> LayerSet {
        match self {
            Layers::Both => LayerSet::BOTH,
            Layers::Single => LayerSet::SINGLE,
            Layers::Double => LayerSet::DOUBLE,
        }
    }
}

/// Where the densities come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum DensitySource {
    /// GMRES solve of the no-slip system.
    #[default]
    Solve,
    /// `f = -3 U∞ / (2a)` on a single sphere of radius `a`, used with the single layer.
    SphereAnalytic,
    /// The world-frame vector `density_value` at every node.
    Constant,
}

/// One row of the body table: semi-axes, center, orientation and chart resolutions.
#[derive(Debug, Clone, Deserialize)]
pub struct BodyConfig {
    pub axes: [f64; 3],
    pub center: [f64; 3],
    #[serde(default = "zero_angles")]
    pub angles: [Angle; 3],
    pub m1: usize,
    pub n1: usize,
    pub m2: usize,
    pub n2: usize,
}

fn zero_angles() -> [Angle; 3] {
    [Angle(0.0); 3]
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    pub tol: f64,
    pub restart: usize,
    pub max_iters: usize,
    /// Correct near-singular interactions between bodies during the solve.
    pub correct: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self { tol: 1e-10, restart: 50, max_iters: 500, correct: true }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default)]
pub struct TraceConfig {
    pub dt: f64,
    pub t_max: f64,
}

impl Default for TraceConfig {
    fn default() -> Self {
        Self { dt: 0.02, t_max: 1e4 }
    }
}

/// Seeds on a lower-left corner plus two in-plane axes; traced from one plane to another.
#[derive(Debug, Clone, Deserialize)]
pub struct ShadowConfig {
    /// Normal of both planes.
    pub normal: [f64; 3],
    /// `normal · x` on the entry plane.
    pub entry: f64,
    /// `normal · x` on the exit plane.
    pub exit: f64,
    pub e1: [f64; 3],
    pub e2: [f64; 3],
    /// Lower corner of the square in `(e1, e2)` coordinates.
    pub corner: [f64; 2],
    pub side: f64,
    /// Particles per side, placed at cell centers.
    pub count: usize,
    /// Score exits against mirrored entries (symmetric single body).
    #[serde(default)]
    pub reversible: bool,
}

/// Seeds spaced evenly on a segment, traced until a plane is crossed.
#[derive(Debug, Clone, Deserialize)]
pub struct StreamlineConfig {
    pub start: [f64; 3],
    pub end: [f64; 3],
    pub count: usize,
    pub normal: [f64; 3],
    pub stop: f64,
    /// Keep every `stride`-th RK4 point.
    #[serde(default = "one")]
    pub stride: usize,
}

fn one() -> usize {
    1
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    #[default]
    Exterior,
    Interior,
}

/// Error sweep over distances on a chart patch of the first body.
#[derive(Debug, Clone, Deserialize)]
pub struct ConvergenceConfig {
    pub distances: Vec<f64>,
    #[serde(default)]
    pub side: Side,
    /// Targets per side of the `(α, β)` patch.
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default = "default_patch")]
    pub alpha: [f64; 2],
    #[serde(default = "default_patch")]
    pub beta: [f64; 2],
}

// Spacing π/320 on the default patch puts targets over every node of lattices up to n = 160.
fn default_samples() -> usize {
    81
}

fn default_patch() -> [f64; 2] {
    [0.0, std::f64::consts::FRAC_PI_4]
}

#[derive(Debug, Clone, Deserialize)]
pub struct SceneConfig {
    pub u_inf: [f64; 3],
    #[serde(default)]
    pub layers: Layers,
    #[serde(default)]
    pub density: DensitySource,
    pub density_value: Option<[f64; 3]>,
    #[serde(default)]
    pub bodies: Vec<BodyConfig>,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub trace: TraceConfig,
    pub shadow: Option<ShadowConfig>,
    pub streamlines: Option<StreamlineConfig>,
    pub convergence: Option<ConvergenceConfig>,
}

impl SceneConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        Ok(toml::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn u_inf(&self) -> Vec3 {
        Vec3::from(self.u_inf)
    }

    /// Build the bodies with every chart resolution multiplied by `scale`.
    pub fn build(&self, scale: f64) -> Result<Scene> {
        if !(scale > 0.0) {
            return Err(Error::Invalid(format!("resolution multiplier {scale} must be positive")));
        }
        let sc = |v: usize| ((v as f64 * scale).round() as usize).max(1);
        let bodies = self
            .bodies
            .iter()
            .map(|b| {
                let [a, bb, c] = b.axes;
                let ell = StandardEllipsoid::new(a, bb, c)?;
                let pose = Pose::new([b.angles[0].0, b.angles[1].0, b.angles[2].0], b.center);
                Body::new(ell, pose, (sc(b.n1), sc(b.m1)), (sc(b.n2), sc(b.m2)))
            })
            .collect::<Result<Vec<_>>>()?;
        Scene::new(bodies, self.u_inf(), self.layers.set())
    }

    pub fn solve_config(&self) -> SolveConfig {
        SolveConfig {
            gmres: GmresConfig { restart: self.solver.restart, max_iters: self.solver.max_iters, tol: self.solver.tol },
            correct: self.solver.correct,
        }
    }

    /// Build at `scale` and populate the densities as the file asks.
    pub fn prepare(&self, scale: f64) -> Result<(Scene, Option<SolveReport>)> {
        if self.density == DensitySource::Solve && self.layers != Layers::Both {
            return Err(Error::Invalid("solved densities are evaluated with both layers".into()));
        }
        let mut scene = self.build(scale)?;
        let report = match self.density {
            DensitySource::Solve => Some(scene.solve(&self.solve_config())?),
            DensitySource::SphereAnalytic => {
                scene.set_sphere_analytic()?;
                None
            }
            DensitySource::Constant => {
                let f = self
                    .density_value
                    .ok_or_else(|| Error::Invalid("density = \"constant\" needs density_value".into()))?;
                scene.set_constant(Vec3::from(f));
                None
            }
        };
        Ok((scene, report))
    }
}

/// Bodies with densities in a uniform stream.
#[derive(Debug, Clone)]
pub struct Scene {
    pub bodies: Vec<Body>,
    pub u_inf: Vec3,
    pub layers: LayerSet,
    /// The density when it is the same vector on every body.
    pub constant: Option<Vec3>,
}

impl Scene {
    /// Rejects overlapping bodies: no lattice node of one body may lie inside another.
    pub fn new(bodies: Vec<Body>, u_inf: Vec3, layers: LayerSet) -> Result<Self> {
        for (i, a) in bodies.iter().enumerate() {
            for (j, b) in bodies.iter().enumerate() {
                if i == j {
                    continue;
                }
                let overlap = a.charts.iter().flat_map(|c| c.pos.iter()).any(|x| {
                    let w = a.frame.to_world_point(x);
                    b.ellipsoid.level(&b.frame.standardize(&w)) <= 1.0
                });
                if overlap {
                    return Err(Error::Invalid(format!("bodies {i} and {j} overlap")));
                }
            }
        }
        Ok(Self { bodies, u_inf, layers, constant: None })
    }

    pub fn solve(&mut self, cfg: &SolveConfig) -> Result<SolveReport> {
        self.constant = None;
        solve_densities(&mut self.bodies, self.u_inf, cfg)
    }

    pub fn set_constant(&mut self, f: Vec3) {
        for b in &mut self.bodies {
            b.set_density_fn(|_| f);
        }
        self.constant = Some(f);
    }

    /// Closed-form velocity for one sphere carrying a constant density.
    pub fn analytic_velocity(&self, x: &Vec3) -> Option<Vec3> {
        let f = self.constant?;
        let [body] = self.bodies.as_slice() else { return None };
        let [a, b, c] = body.ellipsoid.axes();
        if a != b || b != c {
            return None;
        }
        let r = x - body.pose.center();
        let rn = r.norm();
        let mut u = self.u_inf;
        if self.layers.single {
            u += if rn < a {
                f * (2.0 * a / 3.0)
            } else {
                let fr = f.dot(&r);
                (f / rn + r * (fr / rn.powi(3))) * (0.5 * a * a)
                    + (f / rn.powi(3) - r * (3.0 * fr / rn.powi(5))) * (a.powi(4) / 6.0)
            };
        }
        if self.layers.double && rn < a {
            u -= f;
        }
        Some(u)
    }

    /// The exact density for a single sphere, `f = -3 U∞ / (2a)`.
    pub fn set_sphere_analytic(&mut self) -> Result<()> {
        let [body] = self.bodies.as_mut_slice() else {
            return Err(Error::Invalid("the analytic density needs exactly one body".into()));
        };
        let [a, b, c] = body.ellipsoid.axes();
        if a != b || b != c {
            return Err(Error::Invalid("the analytic density needs a sphere".into()));
        }
        let f = self.u_inf * (-1.5 / a);
        body.set_density_fn(|_| f);
        self.constant = Some(f);
        Ok(())
    }

    /// Index of a body whose interior (`λ < 1`) contains `x`.
    pub fn inside(&self, x: &Vec3) -> Option<usize> {
        self.bodies.iter().position(|b| b.ellipsoid.level(&b.frame.standardize(x)) < 1.0)
    }

    pub fn velocity(&self, x: &Vec3, opts: &EvalOptions) -> Result<Vec3> {
        let mut u = self.u_inf;
        for b in &self.bodies {
            let prep = b.prepare(x, self.layers, opts)?;
            let (s, d) = b.evaluate(&prep, self.layers)?;
            u += s + d;
        }
        Ok(u)
    }

    pub fn velocities(&self, xs: &[Vec3], opts: &EvalOptions) -> Result<Vec<Vec3>> {
        xs.par_iter().map(|x| self.velocity(x, opts)).collect()
    }
}
