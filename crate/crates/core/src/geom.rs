//! Ellipsoid geometry: charts, jets, projection, curvature and poses.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::{Error, Mat3, Result, Vec3};

/// Highest total derivative order carried by [`SurfaceJet`].
pub const JET_ORDER: usize = 6;

/// Ellipsoid `x²/a² + y²/b² + z²/c² = 1` centered at the origin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StandardEllipsoid {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

/// The two latitude-longitude parametrizations of an ellipsoid.
///
/// `Grid1` has its poles at `(0, 0, ±c)`, `Grid2` at `(±a, 0, 0)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Chart {
    Grid1,
    Grid2,
}

impl Chart {
    pub fn index(self) -> usize {
        match self {
            Chart::Grid1 => 0,
            Chart::Grid2 => 1,
        }
    }
}

/// `cos(t + i*pi/2)` without rounding the shift.
#[inline]
pub(crate) fn cos_shift(c: f64, s: f64, i: usize) -> f64 {
    match i % 4 {
        0 => c,
        1 => -s,
        2 => -c,
        _ => s,
    }
}

/// `sin(t + i*pi/2)`.
#[inline]
pub(crate) fn sin_shift(c: f64, s: f64, i: usize) -> f64 {
    match i % 4 {
        0 => s,
        1 => c,
        2 => -s,
        _ => -c,
    }
}

impl StandardEllipsoid {
    pub fn new(a: f64, b: f64, c: f64) -> Result<Self> {
        if !(a > 0.0 && b > 0.0 && c > 0.0) || !(a.is_finite() && b.is_finite() && c.is_finite()) {
            return Err(Error::Invalid(format!("semi-axes must be positive, got ({a}, {b}, {c})")));
        }
        Ok(Self { a, b, c })
    }

    pub fn sphere(r: f64) -> Self {
        Self { a: r, b: r, c: r }
    }

    pub fn axes(&self) -> [f64; 3] {
        [self.a, self.b, self.c]
    }

    pub fn max_axis(&self) -> f64 {
        self.a.max(self.b).max(self.c)
    }

    pub fn abc(&self) -> f64 {
        self.a * self.b * self.c
    }

    /// λ such that `x` lies on the scaled ellipsoid `λ·E`.
    pub fn level(&self, x: &Vec3) -> f64 {
        ((x.x / self.a).powi(2) + (x.y / self.b).powi(2) + (x.z / self.c).powi(2)).sqrt()
    }

    /// `x²/a² + y²/b² + z²/c² - 1`.
    pub fn implicit(&self, x: &Vec3) -> f64 {
        (x.x / self.a).powi(2) + (x.y / self.b).powi(2) + (x.z / self.c).powi(2) - 1.0
    }

    /// `(x/a², y/b², z/c²)`, proportional to the outward normal.
    pub fn gradient_half(&self, x: &Vec3) -> Vec3 {
        Vec3::new(x.x / (self.a * self.a), x.y / (self.b * self.b), x.z / (self.c * self.c))
    }

    pub fn unit_normal(&self, x: &Vec3) -> Vec3 {
        self.gradient_half(x).normalize()
    }

    pub fn point(&self, chart: Chart, alpha: f64, beta: f64) -> Vec3 {
        let (sa, ca) = alpha.sin_cos();
        let (sb, cb) = beta.sin_cos();
        match chart {
            Chart::Grid1 => Vec3::new(self.a * ca * cb, self.b * sa * cb, self.c * sb),
            Chart::Grid2 => Vec3::new(self.a * sb, self.b * ca * cb, self.c * sa * cb),
        }
    }

    /// Outward `x_α × x_β = abc cosβ (x/a², y/b², z/c²)`.
    pub fn normal_jacobian(&self, chart: Chart, alpha: f64, beta: f64) -> Vec3 {
        let x = self.point(chart, alpha, beta);
        self.gradient_half(&x) * (self.abc() * beta.cos())
    }

    /// Unit outward normal and surface element `J = |x_α × x_β|`.
    pub fn surface_element(&self, chart: Chart, alpha: f64, beta: f64) -> (Vec3, f64) {
        let nj = self.normal_jacobian(chart, alpha, beta);
        let j = nj.norm();
        if j == 0.0 {
            let x = self.point(chart, alpha, beta);
            (self.unit_normal(&x), 0.0)
        } else {
            (nj / j, j)
        }
    }

    /// Chart angles of a point on the surface.
    pub fn angles(&self, chart: Chart, x: &Vec3) -> (f64, f64) {
        let (u, v, w) = (x.x / self.a, x.y / self.b, x.z / self.c);
        match chart {
            Chart::Grid1 => (v.atan2(u), w.atan2(u.hypot(v))),
            Chart::Grid2 => (w.atan2(v), u.atan2(v.hypot(w))),
        }
    }

    /// South and north poles of a chart.
    pub fn poles(&self, chart: Chart) -> [Vec3; 2] {
        match chart {
            Chart::Grid1 => [Vec3::new(0.0, 0.0, -self.c), Vec3::new(0.0, 0.0, self.c)],
            Chart::Grid2 => [Vec3::new(-self.a, 0.0, 0.0), Vec3::new(self.a, 0.0, 0.0)],
        }
    }

    /// Unit outward normals at the south and north poles.
    pub fn pole_normals(&self, chart: Chart) -> [Vec3; 2] {
        match chart {
            Chart::Grid1 => [-Vec3::z(), Vec3::z()],
            Chart::Grid2 => [-Vec3::x(), Vec3::x()],
        }
    }

    /// Limit of `J / (distance in β from the pole)`; the same at both poles.
    pub fn pole_jacobian_rate(&self, chart: Chart) -> f64 {
        match chart {
            Chart::Grid1 => self.a * self.b,
            Chart::Grid2 => self.b * self.c,
        }
    }

    /// All partial derivatives `∂^i_α ∂^j_β x` with `i + j <= 6`.
    pub fn jet(&self, chart: Chart, alpha: f64, beta: f64) -> SurfaceJet {
        let (sa, ca) = alpha.sin_cos();
        let (sb, cb) = beta.sin_cos();
        let mut d = [[Vec3::zeros(); JET_ORDER + 1]; JET_ORDER + 1];
        for i in 0..=JET_ORDER {
            for j in 0..=JET_ORDER - i {
                let cai = cos_shift(ca, sa, i);
                let sai = sin_shift(ca, sa, i);
                let cbj = cos_shift(cb, sb, j);
                let sbj = sin_shift(cb, sb, j);
                let lone = if i == 0 { 1.0 } else { 0.0 };
                d[i][j] = match chart {
                    Chart::Grid1 => Vec3::new(self.a * cai * cbj, self.b * sai * cbj, self.c * sbj * lone),
                    Chart::Grid2 => Vec3::new(self.a * sbj * lone, self.b * cai * cbj, self.c * sai * cbj),
                };
            }
        }
        SurfaceJet { chart, alpha, beta, d }
    }
}

/// Chart derivatives at one point.
#[derive(Debug, Clone)]
pub struct SurfaceJet {
    pub chart: Chart,
    pub alpha: f64,
    pub beta: f64,
    d: [[Vec3; JET_ORDER + 1]; JET_ORDER + 1],
}

impl SurfaceJet {
    /// `∂^i_α ∂^j_β x`, requires `i + j <= JET_ORDER`.
    #[inline]
    pub fn deriv(&self, i: usize, j: usize) -> Vec3 {
        debug_assert!(i + j <= JET_ORDER);
        self.d[i][j]
    }

    pub fn x(&self) -> Vec3 {
        self.d[0][0]
    }
}

/// Lattice `α_j = -π + jΔα`, `β_k = -π/2 + kΔβ` on a chart.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChartGrid {
    pub chart: Chart,
    pub n: usize,
    pub m: usize,
}

impl ChartGrid {
    pub fn new(chart: Chart, n: usize, m: usize) -> Result<Self> {
        if n < 4 || m < 2 {
            return Err(Error::Invalid(format!("grid needs n >= 4 and m >= 2, got n = {n}, m = {m}")));
        }
        Ok(Self { chart, n, m })
    }

    pub fn d_alpha(&self) -> f64 {
        2.0 * PI / self.n as f64
    }

    pub fn d_beta(&self) -> f64 {
        PI / self.m as f64
    }

    pub fn h(&self) -> f64 {
        self.d_alpha().max(self.d_beta())
    }

    pub fn alpha(&self, j: i64) -> f64 {
        -PI + j as f64 * self.d_alpha()
    }

    pub fn beta(&self, k: usize) -> f64 {
        if k == self.m {
            FRAC_PI_2
        } else {
            -FRAC_PI_2 + k as f64 * self.d_beta()
        }
    }

    /// Number of stored lattice values, `n (m + 1)`; column `j = n` repeats `j = 0`.
    pub fn len(&self) -> usize {
        self.n * (self.m + 1)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn index(&self, j: usize, k: usize) -> usize {
        k * self.n + j
    }

    pub fn wrap(&self, j: i64) -> usize {
        j.rem_euclid(self.n as i64) as usize
    }
}

/// Rotation `B(φ) C(θ) D(ψ)` and translation `s` of a posed ellipsoid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pose {
    pub phi: f64,
    pub theta: f64,
    pub psi: f64,
    pub center: [f64; 3],
}

impl Default for Pose {
    fn default() -> Self {
        Self { phi: 0.0, theta: 0.0, psi: 0.0, center: [0.0; 3] }
    }
}

impl Pose {
    pub fn new(angles: [f64; 3], center: [f64; 3]) -> Self {
        Self { phi: angles[0], theta: angles[1], psi: angles[2], center }
    }

    pub fn rotation(&self) -> Mat3 {
        let (sp, cp) = self.phi.sin_cos();
        let (st, ct) = self.theta.sin_cos();
        let (ss, cs) = self.psi.sin_cos();
        let b = Mat3::new(cp, -sp, 0.0, sp, cp, 0.0, 0.0, 0.0, 1.0);
        let c = Mat3::new(1.0, 0.0, 0.0, 0.0, ct, -st, 0.0, st, ct);
        let d = Mat3::new(cs, -ss, 0.0, ss, cs, 0.0, 0.0, 0.0, 1.0);
        b * c * d
    }

    pub fn center(&self) -> Vec3 {
        Vec3::from(self.center)
    }

    pub fn is_identity(&self) -> bool {
        self.phi == 0.0 && self.theta == 0.0 && self.psi == 0.0 && self.center == [0.0; 3]
    }
}

/// Maps between world coordinates and the standard frame of a posed body.
#[derive(Debug, Clone, Copy)]
pub struct Frame {
    pub rot: Mat3,
    pub center: Vec3,
    identity: bool,
}

impl Frame {
    pub fn new(pose: &Pose) -> Self {
        Self { rot: pose.rotation(), center: pose.center(), identity: pose.is_identity() }
    }

    /// `Rᵀ (x - s)`.
    pub fn standardize(&self, x: &Vec3) -> Vec3 {
        if self.identity {
            *x
        } else {
            self.rot.tr_mul(&(x - self.center))
        }
    }

    pub fn to_world_point(&self, x: &Vec3) -> Vec3 {
        if self.identity {
            *x
        } else {
            self.rot * x + self.center
        }
    }

    /// Rotate a standard-frame vector to world coordinates.
    pub fn to_world(&self, v: &Vec3) -> Vec3 {
        if self.identity {
            *v
        } else {
            self.rot * v
        }
    }

    pub fn to_standard(&self, v: &Vec3) -> Vec3 {
        if self.identity {
            *v
        } else {
            self.rot.tr_mul(v)
        }
    }
}

/// Chart whose poles are farther from `x`; ties go to `Grid1`.
pub fn select_chart(ell: &StandardEllipsoid, x: &Vec3) -> Chart {
    let pole_dist = |chart| {
        let [s, n] = ell.poles(chart);
        (x - s).norm().min((x - n).norm())
    };
    if pole_dist(Chart::Grid1) >= pole_dist(Chart::Grid2) {
        Chart::Grid1
    } else {
        Chart::Grid2
    }
}

/// Cheap bound on the distance from `x` to the surface: `|λ - 1| max(a, b, c)`.
///
/// The point `x/λ` lies on the surface at distance `|λ - 1| |x|/λ`, which this bounds.
pub fn distance_upper_bound(ell: &StandardEllipsoid, x: &Vec3) -> f64 {
    (ell.level(x) - 1.0).abs() * ell.max_axis()
}

/// Closest surface point to a target, in chart angles.
#[derive(Debug, Clone, Copy)]
pub struct ProjectionResult {
    pub alpha: f64,
    pub beta: f64,
    pub point: Vec3,
    /// Signed distance, positive outside.
    pub d: f64,
    pub iterations: usize,
    pub residual: f64,
}

/// Newton minimisation of `½|x(α, β) - x_o|²` from a seed in chart angles.
pub fn project(ell: &StandardEllipsoid, chart: Chart, x_o: &Vec3, seed: (f64, f64)) -> Result<ProjectionResult> {
    let scale = ell.max_axis();
    let tol = 1e-13 * scale * scale.max(1.0);
    let (mut al, mut be) = seed;
    let objective = |al: f64, be: f64| (ell.point(chart, al, be) - x_o).norm_squared();
    let mut phi = objective(al, be);
    let mut residual = f64::INFINITY;
    let mut iterations = 0;
    let mut best = (al, be, f64::INFINITY);
    for it in 0..60 {
        iterations = it + 1;
        let jet = ell.jet(chart, al, be);
        let r = jet.x() - x_o;
        let (xa, xb) = (jet.deriv(1, 0), jet.deriv(0, 1));
        let g = [r.dot(&xa), r.dot(&xb)];
        residual = g[0].hypot(g[1]);
        if residual < best.2 {
            best = (al, be, residual);
        }
        if residual <= tol {
            break;
        }
        let h11 = xa.dot(&xa) + r.dot(&jet.deriv(2, 0));
        let h12 = xa.dot(&xb) + r.dot(&jet.deriv(1, 1));
        let h22 = xb.dot(&xb) + r.dot(&jet.deriv(0, 2));
        let det = h11 * h22 - h12 * h12;
        let (mut da, mut db) = if det > 0.0 && h11 > 0.0 {
            (-(h22 * g[0] - h12 * g[1]) / det, -(h11 * g[1] - h12 * g[0]) / det)
        } else {
            // Gauss-Newton fallback away from convexity.
            let e = xa.dot(&xa);
            let f = xa.dot(&xb);
            let gg = xb.dot(&xb);
            let det = e * gg - f * f;
            if det <= 0.0 {
                return Err(Error::DegenerateChart(det));
            }
            (-(gg * g[0] - f * g[1]) / det, -(e * g[1] - f * g[0]) / det)
        };
        let mut step_ok = false;
        for _ in 0..30 {
            let trial = objective(al + da, be + db);
            if trial <= phi || (da.abs() + db.abs()) < 1e-15 {
                al += da;
                be += db;
                phi = trial;
                step_ok = true;
                break;
            }
            da *= 0.5;
            db *= 0.5;
        }
        if !step_ok {
            break;
        }
        if be > FRAC_PI_2 {
            be = PI - be;
            al += PI;
        } else if be < -FRAC_PI_2 {
            be = -PI - be;
            al += PI;
        }
        if (da.abs() + db.abs()) < 1e-16 {
            let jet = ell.jet(chart, al, be);
            let r = jet.x() - x_o;
            residual = r.dot(&jet.deriv(1, 0)).hypot(r.dot(&jet.deriv(0, 1)));
            break;
        }
    }
    if residual > tol {
        if best.2 < 1e-7 * scale * scale.max(1.0) {
            al = best.0;
            be = best.1;
            residual = best.2;
        } else {
            return Err(Error::ProjectionFailed { residual });
        }
    }
    let al = (al + PI).rem_euclid(2.0 * PI) - PI;
    let point = ell.point(chart, al, be);
    let diff = x_o - point;
    let dist = diff.norm();
    let sign = if diff.dot(&ell.gradient_half(&point)) >= 0.0 { 1.0 } else { -1.0 };
    Ok(ProjectionResult { alpha: al, beta: be, point, d: sign * dist, iterations, residual })
}

/// `ρ_o² = d² + A α̂² + 2B α̂β̂ + C β̂²` at a base point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadraticCoeffs {
    /// Distance `|x_b - x_o|`, unsigned.
    pub d: f64,
    /// `(x_b - x_o)·x_αα + x_α·x_α`
    pub a: f64,
    /// `(x_b - x_o)·x_αβ + x_α·x_β`
    pub b: f64,
    /// `(x_b - x_o)·x_ββ + x_β·x_β`
    pub c: f64,
}

impl QuadraticCoeffs {
    pub fn from_jet(jet: &SurfaceJet, x_o: &Vec3) -> Result<Self> {
        let xa = jet.deriv(1, 0);
        let xb = jet.deriv(0, 1);
        let x0 = jet.x() - x_o;
        let q = Self {
            d: x0.norm(),
            a: x0.dot(&jet.deriv(2, 0)) + xa.dot(&xa),
            b: x0.dot(&jet.deriv(1, 1)) + xa.dot(&xb),
            c: x0.dot(&jet.deriv(0, 2)) + xb.dot(&xb),
        };
        if !(q.a > 0.0 && q.c > 0.0 && q.a * q.c - q.b * q.b > 0.0) {
            return Err(Error::NotPositiveDefinite { a: q.a, b: q.b, c: q.c });
        }
        Ok(q)
    }

    pub fn eval(&self, ah: f64, bh: f64) -> f64 {
        self.d * self.d + self.a * ah * ah + 2.0 * self.b * ah * bh + self.c * bh * bh
    }
}

/// First and second fundamental forms with derived curvatures.
#[derive(Debug, Clone, Copy)]
pub struct CurvatureData {
    pub e: f64,
    pub f: f64,
    pub g: f64,
    pub l: f64,
    pub m: f64,
    pub n: f64,
    pub mean: f64,
    pub gauss: f64,
    pub kappa1: f64,
    pub kappa2: f64,
    /// `1 / max |κ|`
    pub r_osc: f64,
}

impl CurvatureData {
    /// Curvatures with respect to the outward unit normal (negative on a convex body).
    pub fn from_jet(jet: &SurfaceJet) -> Result<Self> {
        let xa = jet.deriv(1, 0);
        let xb = jet.deriv(0, 1);
        let nrm = xa.cross(&xb);
        let e = xa.dot(&xa);
        let f = xa.dot(&xb);
        let g = xb.dot(&xb);
        let det = e * g - f * f;
        let nlen = nrm.norm();
        if !(det > 0.0) || nlen == 0.0 {
            return Err(Error::DegenerateChart(det));
        }
        let unit = nrm / nlen;
        let l = jet.deriv(2, 0).dot(&unit);
        let m = jet.deriv(1, 1).dot(&unit);
        let n = jet.deriv(0, 2).dot(&unit);
        let mean = (e * n - 2.0 * f * m + g * l) / (2.0 * det);
        let gauss = (l * n - m * m) / det;
        let disc = (mean * mean - gauss).max(0.0).sqrt();
        let kappa1 = mean - disc;
        let kappa2 = mean + disc;
        let kmax = kappa1.abs().max(kappa2.abs());
        let r_osc = if kmax > 0.0 { 1.0 / kmax } else { f64::INFINITY };
        Ok(Self { e, f, g, l, m, n, mean, gauss, kappa1, kappa2, r_osc })
    }
}

/// `1 - 2dH + d²K > 0`, the condition for `ρ_o²` to stay positive definite.
pub fn is_positive_definite(d: f64, mean: f64, gauss: f64) -> bool {
    1.0 - 2.0 * d * mean + d * d * gauss > 0.0
}
