//! RK4 particle tracing, streamlines and plane-to-plane traversal experiments.

use rayon::prelude::*;

use crate::scene::{Scene, ShadowConfig, StreamlineConfig};
use crate::stokes::EvalOptions;
use crate::{Error, Result, Vec3};

/// A velocity field with a notion of solid interior.
pub trait Field: Sync {
    fn velocity(&self, x: &Vec3) -> Result<Vec3>;

    fn inside(&self, _x: &Vec3) -> bool {
        false
    }
}

/// A scene evaluated with fixed options.
pub struct SceneField<'a> {
    pub scene: &'a Scene,
    pub opts: EvalOptions,
}

impl Field for SceneField<'_> {
    fn velocity(&self, x: &Vec3) -> Result<Vec3> {
        self.scene.velocity(x, &self.opts)
    }

    fn inside(&self, x: &Vec3) -> bool {
        self.scene.inside(x).is_some()
    }
}

/// Any closure `x -> u`, with no solid interior.
pub struct FnField<F>(pub F);

impl<F: Fn(&Vec3) -> Vec3 + Sync> Field for FnField<F> {
    fn velocity(&self, x: &Vec3) -> Result<Vec3> {
        Ok((self.0)(x))
    }
}

/// The set `normal · x = offset`, stored with a unit normal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Plane {
    pub normal: Vec3,
    pub offset: f64,
}

impl Plane {
    pub fn new(normal: Vec3, offset: f64) -> Result<Self> {
        let n = normal.norm();
        if !(n > 0.0) {
            return Err(Error::Invalid("plane normal must be nonzero".into()));
        }
        Ok(Self { normal: normal / n, offset: offset / n })
    }

    pub fn signed(&self, x: &Vec3) -> f64 {
        self.normal.dot(x) - self.offset
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TraceStatus {
    Crossed,
    TimedOut,
    EnteredBody,
}

impl TraceStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            TraceStatus::Crossed => "crossed",
            TraceStatus::TimedOut => "timed_out",
            TraceStatus::EnteredBody => "entered_body",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub status: TraceStatus,
    /// Crossing time, or the time the trace stopped.
    pub t: f64,
    /// Crossing point, or the last position.
    pub x: Vec3,
    /// Every accepted RK4 position, when requested.
    pub path: Vec<Vec3>,
}

fn rk4_step(field: &dyn Field, x: &Vec3, dt: f64) -> Result<Vec3> {
    let k1 = field.velocity(x)?;
    let k2 = field.velocity(&(x + k1 * (0.5 * dt)))?;
    let k3 = field.velocity(&(x + k2 * (0.5 * dt)))?;
    let k4 = field.velocity(&(x + k3 * dt))?;
    Ok(x + (k1 + 2.0 * k2 + 2.0 * k3 + k4) * (dt / 6.0))
}

/// Classical RK4 from `x0` until `stop` changes sign, `t_max` passes, or a body is entered.
///
/// The crossing is located on the cubic Hermite interpolant of the step that straddles the plane.
/// A failed velocity evaluation (a stage point inside a body) counts as entering it.
pub fn rk4_trace(field: &dyn Field, x0: Vec3, dt: f64, stop: Option<&Plane>, t_max: f64, keep_path: bool) -> Trace {
    assert!(dt > 0.0, "time step must be positive");
    let mut x = x0;
    let mut t = 0.0;
    let mut path = if keep_path { vec![x0] } else { Vec::new() };
    let steps = (t_max / dt).ceil() as u64;
    for _ in 0..steps {
        let next = match rk4_step(field, &x, dt) {
            Ok(v) if !field.inside(&v) => v,
            _ => return Trace { status: TraceStatus::EnteredBody, t, x, path },
        };
        if let Some(p) = stop {
            let (a, b) = (p.signed(&x), p.signed(&next));
            if (a < 0.0) != (b < 0.0) {
                let (w, xc) = match (field.velocity(&x), field.velocity(&next)) {
                    (Ok(u0), Ok(u1)) => hermite_crossing(p, &x, &next, &u0, &u1, dt),
                    _ => {
                        let w = a / (a - b);
                        (w, x + (next - x) * w)
                    }
                };
                if keep_path {
                    path.push(xc);
                }
                return Trace { status: TraceStatus::Crossed, t: t + w * dt, x: xc, path };
            }
        }
        x = next;
        t += dt;
        if keep_path {
            path.push(x);
        }
    }
    Trace { status: TraceStatus::TimedOut, t, x, path }
}

/// Root of the plane's signed distance along the cubic Hermite path over one step, as
/// `(fraction of the step, point)`.
fn hermite_crossing(p: &Plane, x0: &Vec3, x1: &Vec3, u0: &Vec3, u1: &Vec3, dt: f64) -> (f64, Vec3) {
    let at = |s: f64| {
        let (s2, s3) = (s * s, s * s * s);
        x0 * (2.0 * s3 - 3.0 * s2 + 1.0)
            + u0 * (dt * (s3 - 2.0 * s2 + s))
            + x1 * (-2.0 * s3 + 3.0 * s2)
            + u1 * (dt * (s3 - s2))
    };
    // Bisection keeps the bracket; the cubic is monotone enough at these step sizes.
    let (mut lo, mut hi) = (0.0, 1.0);
    let neg_lo = p.signed(x0) < 0.0;
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if (p.signed(&at(mid)) < 0.0) == neg_lo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let w = 0.5 * (lo + hi);
    (w, at(w))
}

/// One polyline per seed, evenly spaced on the configured segment.
#[derive(Debug, Clone)]
pub struct Streamline {
    pub seed: usize,
    pub points: Vec<Vec3>,
    pub status: TraceStatus,
}

pub fn streamlines(field: &dyn Field, cfg: &StreamlineConfig, dt: f64, t_max: f64) -> Result<Vec<Streamline>> {
    let plane = Plane::new(Vec3::from(cfg.normal), cfg.stop)?;
    let (a, b) = (Vec3::from(cfg.start), Vec3::from(cfg.end));
    let stride = cfg.stride.max(1);
    let seeds: Vec<Vec3> = (0..cfg.count)
        .map(|i| a + (b - a) * if cfg.count == 1 { 0.5 } else { i as f64 / (cfg.count - 1) as f64 })
        .collect();
    if let Some(i) = seeds.iter().position(|x| field.inside(x)) {
        return Err(Error::Invalid(format!("streamline seed {i} at {:?} lies inside a body", seeds[i].as_slice())));
    }
    Ok(seeds
        .into_par_iter()
        .enumerate()
        .map(|(i, x0)| {
            let tr = rk4_trace(field, x0, dt, Some(&plane), t_max, true);
            let last = tr.path.len().saturating_sub(1);
            let points = tr.path.iter().enumerate().filter(|(k, _)| k % stride == 0 || *k == last).map(|(_, p)| *p).collect();
            Streamline { seed: i, points, status: tr.status }
        })
        .collect())
}

/// Outcome of one particle in a traversal experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRecord {
    pub y0: f64,
    pub z0: f64,
    pub t_fin: f64,
    /// Exit point in the in-plane coordinates.
    pub y_fin: [f64; 2],
    pub status: TraceStatus,
    pub error: Option<f64>,
}

/// Entry and exit planes with in-plane axes and a square particle lattice.
#[derive(Debug, Clone)]
pub struct ShadowSetup {
    pub entry: Plane,
    pub exit: Plane,
    pub e1: Vec3,
    pub e2: Vec3,
    pub corner: [f64; 2],
    pub side: f64,
    pub count: usize,
    pub reversible: bool,
}

impl ShadowSetup {
    pub fn from_config(cfg: &ShadowConfig) -> Result<Self> {
        let n = Vec3::from(cfg.normal);
        let e1 = Vec3::from(cfg.e1).normalize();
        let e2 = Vec3::from(cfg.e2).normalize();
        if cfg.count == 0 || !(cfg.side > 0.0) {
            return Err(Error::Invalid("shadow lattice needs count > 0 and side > 0".into()));
        }
        if n.normalize().dot(&e1).abs() > 1e-12 || n.normalize().dot(&e2).abs() > 1e-12 {
            return Err(Error::Invalid("shadow axes must lie in the planes".into()));
        }
        Ok(Self {
            entry: Plane::new(n, cfg.entry)?,
            exit: Plane::new(n, cfg.exit)?,
            e1,
            e2,
            corner: cfg.corner,
            side: cfg.side,
            count: cfg.count,
            reversible: cfg.reversible,
        })
    }

    /// Cell-centered in-plane coordinates, row-major in `e2`.
    pub fn seeds(&self) -> Vec<[f64; 2]> {
        let cell = self.side / self.count as f64;
        let mut out = Vec::with_capacity(self.count * self.count);
        for iz in 0..self.count {
            for iy in 0..self.count {
                out.push([self.corner[0] + (iy as f64 + 0.5) * cell, self.corner[1] + (iz as f64 + 0.5) * cell]);
            }
        }
        out
    }

    fn point(&self, plane: &Plane, c: [f64; 2]) -> Vec3 {
        plane.normal * plane.offset + self.e1 * c[0] + self.e2 * c[1]
    }

    fn coords(&self, plane: &Plane, x: &Vec3) -> [f64; 2] {
        let r = x - plane.normal * plane.offset;
        [r.dot(&self.e1), r.dot(&self.e2)]
    }
}

/// Trace every lattice particle from the entry plane to the exit plane.
///
/// With `reference` the error is the exit-point distance to the reference record;
/// otherwise reversible setups score against the entry coordinates.
pub fn shadow_experiment(
    field: &dyn Field,
    setup: &ShadowSetup,
    dt: f64,
    t_max: f64,
    reference: Option<&[TraceRecord]>,
) -> Result<Vec<TraceRecord>> {
    let seeds = setup.seeds();
    if let Some(c) = seeds.iter().find(|c| field.inside(&setup.point(&setup.entry, **c))) {
        return Err(Error::Invalid(format!("particle seed {c:?} lies inside a body")));
    }
    if let Some(r) = reference {
        if r.len() != seeds.len() {
            return Err(Error::Invalid(format!("reference has {} records, lattice has {}", r.len(), seeds.len())));
        }
    }
    Ok(seeds
        .par_iter()
        .enumerate()
        .map(|(i, c)| {
            let x0 = setup.point(&setup.entry, *c);
            let tr = rk4_trace(field, x0, dt, Some(&setup.exit), t_max, false);
            let y_fin = setup.coords(&setup.exit, &tr.x);
            let error = if tr.status != TraceStatus::Crossed {
                None
            } else if let Some(r) = reference {
                let r = &r[i];
                (r.status == TraceStatus::Crossed).then(|| (y_fin[0] - r.y_fin[0]).hypot(y_fin[1] - r.y_fin[1]))
            } else if setup.reversible {
                Some((y_fin[0] - c[0]).hypot(y_fin[1] - c[1]))
            } else {
                None
            };
            TraceRecord { y0: c[0], z0: c[1], t_fin: tr.t, y_fin, status: tr.status, error }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_field_crosses_in_exact_time() {
        let f = FnField(|_: &Vec3| Vec3::new(1.0, 0.0, 0.0));
        let p = Plane::new(Vec3::x(), 1.0).unwrap();
        let tr = rk4_trace(&f, Vec3::new(-1.0, 0.0, 0.0), 0.03, Some(&p), 10.0, false);
        assert_eq!(tr.status, TraceStatus::Crossed);
        assert!((tr.t - 2.0).abs() < 1e-12);
        assert!((tr.x - Vec3::new(1.0, 0.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn times_out_without_a_crossing() {
        let f = FnField(|_: &Vec3| Vec3::new(0.0, 1.0, 0.0));
        let p = Plane::new(Vec3::x(), 1.0).unwrap();
        let tr = rk4_trace(&f, Vec3::zeros(), 0.1, Some(&p), 1.0, false);
        assert_eq!(tr.status, TraceStatus::TimedOut);
    }
}
