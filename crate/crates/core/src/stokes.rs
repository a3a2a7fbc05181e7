//! Stokes single and double layer potentials over posed ellipsoids.
//!
//! With viscosity 1 the layers are
//! `S[f](x_o) = 1/(8π) ∫ (f/ρ + (f·x̂) x̂/ρ³) dS` and
//! `D[f](x_o) = -3/(4π) ∫ (f·x̂) x̂ (x̂·n)/ρ⁵ dS`, where `x̂ = x - x_o`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::expand::{
    apply_correction, assemble_coefficients, basis_window_errors, inventory, window_half_width, DensityJet,
    LayerSet, TargetSeries, Window,
};
use crate::geom::{
    distance_upper_bound, is_positive_definite, project, select_chart, Chart, ChartGrid, CurvatureData, Frame, Pose,
    QuadraticCoeffs, StandardEllipsoid,
};
use crate::interp::{interpolate, interpolate_jet, Stencil};
use crate::{Error, Result, Vec3};

const SLP_PREF: f64 = 1.0 / (8.0 * PI);
const DLP_PREF: f64 = -3.0 / (4.0 * PI);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LayerKind {
    Single,
    Double,
}

impl LayerKind {
    pub fn set(self) -> LayerSet {
        match self {
            LayerKind::Single => LayerSet::SINGLE,
            LayerKind::Double => LayerSet::DOUBLE,
        }
    }
}

/// Integrand contributions `(SLP, DLP)` of one source point, including the surface element.
///
/// `nj` is the outward normal scaled by `J`.
pub fn kernel_terms(x: &Vec3, x_o: &Vec3, f: &Vec3, nj: &Vec3) -> Result<(Vec3, Vec3)> {
    let xh = x - x_o;
    let r2 = xh.norm_squared();
    if r2 == 0.0 {
        return Err(Error::Coincident);
    }
    let inv = 1.0 / r2.sqrt();
    let inv3 = inv * inv * inv;
    let fx = f.dot(&xh);
    let slp = (f * inv + xh * (fx * inv3)) * (SLP_PREF * nj.norm());
    let dlp = xh * (DLP_PREF * fx * xh.dot(nj) * inv3 * inv * inv);
    Ok((slp, dlp))
}

/// Node positions, scaled normals and surface elements on one chart lattice.
#[derive(Debug, Clone)]
pub struct ChartData {
    pub grid: ChartGrid,
    pub pos: Vec<Vec3>,
    pub nj: Vec<Vec3>,
    pub jac: Vec<f64>,
}

impl ChartData {
    fn new(ell: &StandardEllipsoid, grid: ChartGrid) -> Self {
        let mut pos = Vec::with_capacity(grid.len());
        let mut nj = Vec::with_capacity(grid.len());
        let mut jac = Vec::with_capacity(grid.len());
        for k in 0..=grid.m {
            for j in 0..grid.n {
                let (a, b) = (grid.alpha(j as i64), grid.beta(k));
                let x = ell.point(grid.chart, a, b);
                let v = if k == 0 || k == grid.m { Vec3::zeros() } else { ell.normal_jacobian(grid.chart, a, b) };
                pos.push(x);
                jac.push(v.norm());
                nj.push(v);
            }
        }
        Self { grid, pos, nj, jac }
    }

    fn nearest_node(&self, x: &Vec3) -> (usize, f64) {
        let mut best = (0, f64::INFINITY);
        for (i, p) in self.pos.iter().enumerate() {
            let d = (p - x).norm_squared();
            if d < best.1 {
                best = (i, d);
            }
        }
        (best.0, best.1.sqrt())
    }
}

/// Options for a single layer evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalOptions {
    /// Apply near-singular corrections where needed.
    pub correct: bool,
    /// Override the window half-width.
    pub n_w: Option<usize>,
    /// Force a chart instead of the pole-distance rule.
    pub chart: Option<Chart>,
}

impl Default for EvalOptions {
    fn default() -> Self {
        Self { correct: true, n_w: None, chart: None }
    }
}

/// What an evaluation did.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalFlags {
    pub corrected: bool,
    pub roundoff: bool,
    pub chart: Chart,
    /// Signed distance to the surface when the projection was computed.
    pub d: Option<f64>,
    pub d_up: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LayerResult {
    pub value: Vec3,
    pub flags: EvalFlags,
}

/// Geometry-only data for a corrected evaluation at one target.
#[derive(Debug, Clone)]
struct NearData {
    alpha_b: f64,
    beta_b: f64,
    /// Global lattice node dropped from the trapezoidal sum.
    puncture: Option<usize>,
    series: TargetSeries,
    errors: Vec<f64>,
    slots: Vec<usize>,
}

/// A target prepared against one body; reusable while the geometry is fixed.
#[derive(Debug, Clone)]
pub struct Prepared {
    x_std: Vec3,
    pub flags: EvalFlags,
    near: Option<Box<NearData>>,
}

/// A posed ellipsoid with its two chart lattices and a density.
#[derive(Debug, Clone)]
pub struct Body {
    pub ellipsoid: StandardEllipsoid,
    pub pose: Pose,
    pub frame: Frame,
    pub charts: [ChartData; 2],
    /// Density in the standard frame on each chart lattice.
    density: [Vec<Vec3>; 2],
    /// Bicubic stencils of the primary chart for every secondary node.
    transfer: Vec<([usize; 16], [f64; 16])>,
    /// Resolution `(n', m')` of the rotated chart used for on-surface targets.
    pub rotated: (usize, usize),
}

impl Body {
    /// `grid1 = (n1, m1)`, `grid2 = (n2, m2)`.
    pub fn new(ell: StandardEllipsoid, pose: Pose, grid1: (usize, usize), grid2: (usize, usize)) -> Result<Self> {
        let g1 = ChartGrid::new(Chart::Grid1, grid1.0, grid1.1)?;
        let g2 = ChartGrid::new(Chart::Grid2, grid2.0, grid2.1)?;
        if g1.m < 3 || g2.m < 3 {
            return Err(Error::Invalid("each chart needs m >= 3 for bicubic interpolation".into()));
        }
        let charts = [ChartData::new(&ell, g1), ChartData::new(&ell, g2)];
        let transfer = charts[1]
            .pos
            .iter()
            .map(|x| {
                let (a, b) = ell.angles(Chart::Grid1, x);
                let st = Stencil::locate(&g1, a, b);
                let w = st.weights();
                let idx = st.indices(&g1);
                let mut iw = ([0usize; 16], [0.0; 16]);
                for r in 0..4 {
                    for c in 0..4 {
                        iw.0[4 * r + c] = idx[r][c];
                        iw.1[4 * r + c] = w[r][c];
                    }
                }
                iw
            })
            .collect();
        let density = [vec![Vec3::zeros(); g1.len()], vec![Vec3::zeros(); g2.len()]];
        Ok(Self {
            ellipsoid: ell,
            pose,
            frame: Frame::new(&pose),
            charts,
            density,
            transfer,
            rotated: (g1.n.max(8), g1.m.max(6)),
        })
    }

    pub fn grid(&self, chart: Chart) -> &ChartGrid {
        &self.charts[chart.index()].grid
    }

    pub fn density(&self, chart: Chart) -> &[Vec3] {
        &self.density[chart.index()]
    }

    /// Set the standard-frame density on the primary lattice and transfer it to `Grid2`.
    pub fn set_density_standard(&mut self, grid1: Vec<Vec3>) -> Result<()> {
        if grid1.len() != self.charts[0].grid.len() {
            return Err(Error::Invalid(format!(
                "density has {} values, lattice has {}",
                grid1.len(),
                self.charts[0].grid.len()
            )));
        }
        let second: Vec<Vec3> = self
            .transfer
            .iter()
            .map(|(idx, w)| idx.iter().zip(w).fold(Vec3::zeros(), |acc, (i, w)| acc + grid1[*i] * *w))
            .collect();
        self.density = [grid1, second];
        Ok(())
    }

    /// Sample a world-frame density field at every node of both charts.
    pub fn set_density_fn(&mut self, f: impl Fn(&Vec3) -> Vec3) {
        for c in 0..2 {
            self.density[c] = self.charts[c]
                .pos
                .iter()
                .map(|x| self.frame.to_standard(&f(&self.frame.to_world_point(x))))
                .collect();
        }
    }

    /// Set both chart densities directly (standard frame).
    pub fn set_density_both(&mut self, grid1: Vec<Vec3>, grid2: Vec<Vec3>) -> Result<()> {
        if grid1.len() != self.charts[0].grid.len() || grid2.len() != self.charts[1].grid.len() {
            return Err(Error::Invalid("density length does not match the lattices".into()));
        }
        self.density = [grid1, grid2];
        Ok(())
    }

    /// Primary-lattice nodes carrying one unknown each: south pole, interior rows, north pole.
    pub fn primary_nodes(&self) -> Vec<(usize, usize)> {
        let g = &self.charts[0].grid;
        let mut out = vec![(0, 0)];
        for k in 1..g.m {
            for j in 0..g.n {
                out.push((j, k));
            }
        }
        out.push((0, g.m));
        out
    }

    /// Prepare a world-frame target for repeated evaluation.
    pub fn prepare(&self, x_world: &Vec3, layers: LayerSet, opts: &EvalOptions) -> Result<Prepared> {
        let ell = &self.ellipsoid;
        let x_std = self.frame.standardize(x_world);
        let d_up = distance_upper_bound(ell, &x_std);
        let chart = opts.chart.unwrap_or_else(|| select_chart(ell, &x_std));
        let cd = &self.charts[chart.index()];
        let grid = cd.grid;
        let threshold = 6.0 * ell.max_axis() * grid.h();
        let mut flags = EvalFlags { corrected: false, roundoff: false, chart, d: None, d_up };
        if !opts.correct || d_up > threshold {
            return Ok(Prepared { x_std, flags, near: None });
        }
        let (seed_idx, min_node_dist) = cd.nearest_node(&x_std);
        if min_node_dist == 0.0 {
            return Err(Error::Coincident);
        }
        let (sj, sk) = (seed_idx % grid.n, seed_idx / grid.n);
        let mut seed = (grid.alpha(sj as i64), grid.beta(sk));
        if sk == 0 || sk == grid.m {
            // Pole rows carry no α information; nudge off the pole.
            let (a, b) = ell.angles(chart, &x_std);
            seed = (a, b.clamp(-PI / 2.0 + 0.5 * grid.d_beta(), PI / 2.0 - 0.5 * grid.d_beta()));
        }
        let proj = project(ell, chart, &x_std, seed)?;
        flags.d = Some(proj.d);
        if proj.d.abs() >= threshold {
            return Ok(Prepared { x_std, flags, near: None });
        }
        if proj.d == 0.0 {
            return Err(Error::Coincident);
        }
        let jet = ell.jet(chart, proj.alpha, proj.beta);
        let curv = CurvatureData::from_jet(&jet)?;
        if !is_positive_definite(proj.d, curv.mean, curv.gauss) {
            return Err(Error::InsideOsculating(1.0 - 2.0 * proj.d * curv.mean + proj.d * proj.d * curv.gauss));
        }
        let quad = QuadraticCoeffs::from_jet(&jet, &x_std)?;
        let n_w = opts.n_w.unwrap_or_else(|| window_half_width(grid.h()));
        let win = Window::choose(&grid, proj.alpha, proj.beta, n_w);
        let ds = (jet.deriv(1, 0).norm() * grid.d_alpha()).max(jet.deriv(0, 1).norm() * grid.d_beta());
        let roundoff = proj.d.abs() < 0.25 * ds && min_node_dist < 0.25 * ds;
        let (puncture_local, puncture) = if roundoff {
            (Some(win.center_local()), Some(grid.index(grid.wrap(win.j0), win.k0)))
        } else {
            (None, None)
        };
        let rect = win.rect(&grid, proj.alpha, proj.beta);
        let slots = inventory().slots(layers);
        let errors = basis_window_errors(&quad, &rect, puncture_local, &slots)?;
        let series = TargetSeries::new(ell, &jet, &x_std);
        flags.corrected = true;
        flags.roundoff = roundoff;
        Ok(Prepared {
            x_std,
            flags,
            near: Some(Box::new(NearData { alpha_b: proj.alpha, beta_b: proj.beta, puncture, series, errors, slots })),
        })
    }

    /// `(S[f], D[f])` at a prepared target, rotated to world coordinates.
    pub fn evaluate(&self, prep: &Prepared, layers: LayerSet) -> Result<(Vec3, Vec3)> {
        let chart = prep.flags.chart;
        let cd = &self.charts[chart.index()];
        let dens = &self.density[chart.index()];
        let puncture = prep.near.as_ref().and_then(|n| n.puncture);
        let (mut slp, mut dlp) = self.trapezoid(cd, dens, &prep.x_std, layers, puncture)?;
        if let Some(near) = &prep.near {
            let dj = interpolate_jet(&cd.grid, dens, near.alpha_b, near.beta_b);
            let jet = DensityJet::from_derivatives(&dj);
            if layers.single {
                let c = assemble_coefficients(&near.series, &jet, LayerSet::SINGLE);
                slp += apply_correction(&c, &near.errors);
            }
            if layers.double {
                let c = assemble_coefficients(&near.series, &jet, LayerSet::DOUBLE);
                dlp += apply_correction(&c, &near.errors);
            }
            debug_assert!(near.slots.len() <= inventory().len());
        }
        if !(slp.iter().all(|v| v.is_finite()) && dlp.iter().all(|v| v.is_finite())) {
            return Err(Error::NonFinite("layer value"));
        }
        Ok((self.frame.to_world(&slp), self.frame.to_world(&dlp)))
    }

    /// Order-4 trapezoidal sums of both layers on a chart, in the standard frame.
    fn trapezoid(
        &self,
        cd: &ChartData,
        dens: &[Vec3],
        x_o: &Vec3,
        layers: LayerSet,
        puncture: Option<usize>,
    ) -> Result<(Vec3, Vec3)> {
        let grid = cd.grid;
        let (n, m) = (grid.n, grid.m);
        let mut s = Vec3::zeros();
        let mut d = Vec3::zeros();
        for idx in n..m * n {
            if Some(idx) == puncture {
                continue;
            }
            let xh = cd.pos[idx] - x_o;
            let r2 = xh.norm_squared();
            if r2 == 0.0 {
                return Err(Error::Coincident);
            }
            let f = dens[idx];
            let inv = 1.0 / r2.sqrt();
            let fx = f.dot(&xh);
            if layers.single {
                s += (f + xh * (fx * inv * inv)) * (inv * cd.jac[idx]);
            }
            if layers.double {
                let inv2 = inv * inv;
                d += xh * (fx * xh.dot(&cd.nj[idx]) * inv2 * inv2 * inv);
            }
        }
        let w = grid.d_alpha() * grid.d_beta();
        s *= w;
        d *= w;
        // Pole edge terms: G ≈ J1 t g near each pole, so the β-boundary term is analytic.
        let ell = &self.ellipsoid;
        let j1 = ell.pole_jacobian_rate(grid.chart);
        let poles = ell.poles(grid.chart);
        let normals = ell.pole_normals(grid.chart);
        let edge = 2.0 * PI * grid.d_beta() * grid.d_beta() / 12.0 * j1;
        for (pi, row) in [(0usize, 0usize), (1, m)] {
            let xh = poles[pi] - x_o;
            let r2 = xh.norm_squared();
            if r2 == 0.0 {
                return Err(Error::Coincident);
            }
            let f = dens[row * n];
            let inv = 1.0 / r2.sqrt();
            let fx = f.dot(&xh);
            if layers.single {
                s += (f + xh * (fx * inv * inv)) * (inv * edge);
            }
            if layers.double {
                let inv2 = inv * inv;
                d += xh * (fx * xh.dot(&normals[pi]) * inv2 * inv2 * inv * edge);
            }
        }
        Ok((s * SLP_PREF, d * DLP_PREF))
    }

    /// `(S[f], D[f])` at a standard-frame point on the surface with density `f_t` there.
    ///
    /// Uses a rotated lat-long chart whose north pole sits on the target, so the
    /// integrand is bounded; its pole row takes the analytic limit.
    pub fn onsurface_standard(&self, x_t: &Vec3, f_t: &Vec3, layers: LayerSet) -> (Vec3, Vec3) {
        let ell = &self.ellipsoid;
        let axes = ell.axes();
        let abc = ell.abc();
        let (nr, mr) = self.rotated;
        let g1 = &self.charts[0].grid;
        let dens = &self.density[0];
        let e3 = Vec3::new(x_t.x / axes[0], x_t.y / axes[1], x_t.z / axes[2]).normalize();
        let helper = if e3.x.abs() <= e3.y.abs() && e3.x.abs() <= e3.z.abs() {
            Vec3::x()
        } else if e3.y.abs() <= e3.z.abs() {
            Vec3::y()
        } else {
            Vec3::z()
        };
        let e1 = (helper - e3 * helper.dot(&e3)).normalize();
        let e2 = e3.cross(&e1);
        let scale = |v: Vec3| Vec3::new(v.x * axes[0], v.y * axes[1], v.z * axes[2]);
        let unscale = |v: Vec3| Vec3::new(v.x / axes[0], v.y / axes[1], v.z / axes[2]);
        let da = 2.0 * PI / nr as f64;
        let db = PI / mr as f64;
        let dens_at = |x: &Vec3| {
            let (a, b) = ell.angles(Chart::Grid1, x);
            interpolate(g1, dens, a, b)
        };

        let mut s_sum = Vec3::zeros();
        let mut d_sum = Vec3::zeros();
        let mut s_slope = Vec3::zeros();
        let mut d_slope = Vec3::zeros();
        let nfd = 5.min(mr);
        for j in 0..nr {
            let (sa, ca) = (-PI + j as f64 * da).sin_cos();
            let dir = e1 * ca + e2 * sa;
            let tau = scale(dir);
            let tn = tau.norm();
            // Rows counted from the target pole: r = 0 is the pole, r = i means β' = π/2 - iΔβ.
            let mut s_rows = [Vec3::zeros(); 5];
            let mut d_rows = [Vec3::zeros(); 5];
            let j1t = abc * unscale(e3).norm();
            s_rows[0] = (f_t / tn + tau * (f_t.dot(&tau) / (tn * tn * tn))) * (SLP_PREF * j1t);
            d_rows[0] = tau * (DLP_PREF * f_t.dot(&tau) * abc / (2.0 * tn.powi(5)));
            for r in 1..mr {
                let t = r as f64 * db; // angle from the target
                let (st, ct) = t.sin_cos(); // cosβ' = sin t, sinβ' = cos t
                let half = (0.5 * t).sin();
                let one_minus = 2.0 * half * half; // 1 - sinβ'
                let sp = dir * st + e3 * ct;
                let x = scale(sp);
                let xh = scale(dir * st - e3 * one_minus);
                let r2 = xh.norm_squared();
                let inv = 1.0 / r2.sqrt();
                let f = dens_at(&x);
                let fx = f.dot(&xh);
                let jac = abc * st * unscale(sp).norm();
                let mut gs = Vec3::zeros();
                let mut gd = Vec3::zeros();
                if layers.single {
                    gs = (f + xh * (fx * inv * inv)) * (inv * jac * SLP_PREF);
                    s_sum += gs;
                }
                if layers.double {
                    let xnj = abc * st * one_minus;
                    let inv2 = inv * inv;
                    gd = xh * (DLP_PREF * fx * xnj * inv2 * inv2 * inv);
                    d_sum += gd;
                }
                if r < nfd {
                    s_rows[r] = gs;
                    d_rows[r] = gd;
                }
            }
            s_sum += s_rows[0] * 0.5;
            d_sum += d_rows[0] * 0.5;
            // ∂G/∂β' at the target pole from a one-sided difference in t = π/2 - β'.
            let fd = |rows: &[Vec3; 5]| -> Vec3 {
                match nfd {
                    5 => (rows[0] * 25.0 - rows[1] * 48.0 + rows[2] * 36.0 - rows[3] * 16.0 + rows[4] * 3.0) / (12.0 * db),
                    4 => (rows[0] * 11.0 - rows[1] * 18.0 + rows[2] * 9.0 - rows[3] * 2.0) / (6.0 * db),
                    _ => (rows[0] * 3.0 - rows[1] * 4.0 + rows[2]) / (2.0 * db),
                }
            };
            s_slope += fd(&s_rows);
            d_slope += fd(&d_rows);
        }
        // Antipodal pole: regular, G ≈ J1 t g.
        let xa = -*x_t;
        let xh = xa - x_t;
        let inv = 1.0 / xh.norm();
        let fa = dens_at(&xa);
        let fx = fa.dot(&xh);
        let j1a = abc * unscale(-e3).norm();
        let na = ell.unit_normal(&xa);
        let ga_s = (fa + xh * (fx * inv * inv)) * (inv * SLP_PREF * j1a);
        let ga_d = xh * (DLP_PREF * fx * xh.dot(&na) * inv.powi(5) * j1a);
        let w = da * db;
        let edge = -db * db * da / 12.0;
        // T⁴ = ΔαΔβ Σ' G - Δβ²Δα/12 Σ_j [∂_β G]_{-π/2}^{π/2}; ∂_β = -∂_t at the target.
        let s_val = s_sum * w + (s_slope * -1.0 - ga_s * nr as f64) * edge;
        let d_val = d_sum * w + (d_slope * -1.0 - ga_d * nr as f64) * edge;
        (s_val, d_val)
    }

    /// On-surface layer value at a chart lattice node.
    pub fn eval_onsurface(&self, kind: LayerKind, chart: Chart, j: usize, k: usize) -> Result<LayerResult> {
        let cd = &self.charts[chart.index()];
        let idx = cd.grid.index(j % cd.grid.n, k);
        let x_t = cd.pos[idx];
        let f_t = self.density[chart.index()][idx];
        let (s, d) = self.onsurface_standard(&x_t, &f_t, kind.set());
        let v = match kind {
            LayerKind::Single => s,
            LayerKind::Double => d,
        };
        Ok(LayerResult {
            value: self.frame.to_world(&v),
            flags: EvalFlags { corrected: false, roundoff: false, chart, d: Some(0.0), d_up: 0.0 },
        })
    }
}

/// Evaluate one layer potential of a body at a world-frame target.
pub fn eval_layer(body: &Body, kind: LayerKind, x_o: &Vec3, opts: &EvalOptions) -> Result<LayerResult> {
    let prep = body.prepare(x_o, kind.set(), opts)?;
    let (s, d) = body.evaluate(&prep, kind.set())?;
    let value = match kind {
        LayerKind::Single => s,
        LayerKind::Double => d,
    };
    Ok(LayerResult { value, flags: prep.flags })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kernel_rejects_coincident_points() {
        let x = Vec3::new(1.0, 0.0, 0.0);
        assert!(matches!(kernel_terms(&x, &x, &x, &x), Err(Error::Coincident)));
    }

    #[test]
    fn far_field_slp_of_constant_density_on_sphere() {
        let mut errs = Vec::new();
        for nn in [16usize, 32] {
        let mut body = Body::new(StandardEllipsoid::sphere(1.0), Pose::default(), (2 * nn, nn), (2 * nn, nn)).unwrap();
        let f = Vec3::new(0.3, -0.2, 0.5);
        body.set_density_fn(|_| f);
        let x = Vec3::new(0.0, 0.0, 4.0);
        let r = eval_layer(&body, LayerKind::Single, &x, &EvalOptions::default()).unwrap();
        assert!(!r.flags.corrected);
        // Translating unit sphere with velocity 2f/3.
        let rr = 4.0;
        let exact = (f / rr + x * (f.dot(&x) / rr.powi(3))) * 0.5 + (f / rr.powi(3) - x * (3.0 * f.dot(&x) / rr.powi(5))) / 6.0;
        errs.push((r.value - exact).norm());
        }
        // Fourth order in the mesh.
        assert!(errs[0] / errs[1] > 12.0 && errs[1] < 2e-8, "{errs:?}");
    }
}
