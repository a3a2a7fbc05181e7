//! Exact window integrals of the near-singular basis `α̂^p β̂^q / ρ_o^{2k+1}`.
//!
//! After the substitution `u = c_α α̂ / d`, `v = c_β β̂ / d` every window integral becomes
//! a multiple of `I_pqk = ∫∫ u^p v^q / ρ^{2k+1} du dv` with `ρ² = 1 + u² + 2Cuv + v²`
//! over a rectangle. The `I_pqk` come from one seed value and recursions in `(p, q, k)`.

use crate::gauss::{adaptive_gl, gauss_legendre};
use crate::geom::QuadraticCoeffs;
use crate::{Error, Result};

/// Largest power of `u` or `v`, and largest `p + q`.
pub const P_MAX: usize = 12;
/// Largest `k`.
pub const K_MAX: usize = 5;

const NP: usize = P_MAX + 1;
const NK: usize = K_MAX + 1;

/// A window `[α̂0, α̂1] × [β̂0, β̂1]` in the reduced variables.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReducedWindow {
    pub cross: f64,
    pub u0: f64,
    pub u1: f64,
    pub v0: f64,
    pub v1: f64,
    pub d: f64,
    pub c_alpha: f64,
    pub c_beta: f64,
}

impl ReducedWindow {
    pub fn new(q: &QuadraticCoeffs, alpha: (f64, f64), beta: (f64, f64)) -> Result<Self> {
        if !(q.d > 0.0) {
            return Err(Error::Coincident);
        }
        if !(q.a > 0.0 && q.c > 0.0 && q.a * q.c > q.b * q.b) {
            return Err(Error::NotPositiveDefinite { a: q.a, b: q.b, c: q.c });
        }
        let c_alpha = q.a.sqrt();
        let c_beta = q.c.sqrt();
        Ok(Self {
            cross: q.b / (c_alpha * c_beta),
            u0: c_alpha * alpha.0 / q.d,
            u1: c_alpha * alpha.1 / q.d,
            v0: c_beta * beta.0 / q.d,
            v1: c_beta * beta.1 / q.d,
            d: q.d,
            c_alpha,
            c_beta,
        })
    }

    /// `∫_W α̂^p β̂^q / ρ_o^{2k+1} = scale(p, q, k) · I_pqk`.
    pub fn scale(&self, p: usize, q: usize, k: usize) -> f64 {
        self.d.powi(p as i32 + q as i32 + 1 - 2 * k as i32)
            / (self.c_alpha.powi(p as i32 + 1) * self.c_beta.powi(q as i32 + 1))
    }
}

/// Antiderivatives `F_pk(u; v) = ∫ u^p / ρ^{2k+1} du` at one point, `p <= 12`, `k <= 5`.
///
/// The constant of integration is fixed by `F_0k(-Cv; v) = 0` for `k >= 1`.
pub fn antiderivatives_1d(u: f64, v: f64, c: f64) -> [[f64; NK]; NP] {
    let mut f = [[0.0; NK]; NP];
    let rho2 = 1.0 + u * u + 2.0 * c * u * v + v * v;
    let rho = rho2.sqrt();
    let s = 1.0 + (1.0 - c * c) * v * v;
    let w = u + c * v;
    f[0][0] = if w <= 0.0 { -(rho - w).ln() } else { (rho + w).ln() - s.ln() };
    let mut upow = [1.0; NP];
    for p in 1..NP {
        upow[p] = upow[p - 1] * u;
    }
    for p in 1..NP {
        let prev2 = if p >= 2 { f[p - 2][0] } else { 0.0 };
        f[p][0] = (upow[p - 1] * rho - (2 * p - 1) as f64 * c * v * f[p - 1][0] - (p - 1) as f64 * (v * v + 1.0) * prev2)
            / p as f64;
    }
    let mut rho_odd = rho; // ρ^{2k-1}
    for k in 1..NK {
        let kk = (2 * k - 1) as f64;
        f[0][k] = (w / rho_odd + 2.0 * (k - 1) as f64 * f[0][k - 1]) / (s * kk);
        for p in 1..NP {
            let prev2 = if p >= 2 { f[p - 2][k - 1] } else { 0.0 };
            f[p][k] = (-upow[p - 1] / rho_odd + (p - 1) as f64 * prev2) / kk - c * v * f[p - 1][k];
        }
        rho_odd *= rho2;
    }
    f
}

/// `F_{0,K_MAX}(u; v)` alone, by the same recurrence in `k` as [`antiderivatives_1d`].
fn f0_top(u: f64, v: f64, c: f64) -> f64 {
    let rho2 = 1.0 + u * u + 2.0 * c * u * v + v * v;
    let s = 1.0 + (1.0 - c * c) * v * v;
    let w = u + c * v;
    let mut rho_odd = rho2.sqrt();
    let mut f = w / (rho_odd * s);
    for k in 2..NK {
        rho_odd *= rho2;
        f = (w / rho_odd + 2.0 * (k - 1) as f64 * f) / (s * (2 * k - 1) as f64);
    }
    f
}

/// All `I_pqk` over one reduced window, `p + q <= 12`, `k <= 5`.
#[derive(Debug, Clone)]
pub struct IntegralTable {
    vals: Box<[[[f64; NK]; NP]; NP]>,
}

impl IntegralTable {
    #[inline]
    pub fn get(&self, p: usize, q: usize, k: usize) -> f64 {
        self.vals[p][q][k]
    }
}

/// Nodes per edge when the edge integral is done by quadrature.
const EDGE_NODES: usize = 24;

/// `∫_{a}^{b} x^p / ρ^{2k+1} dx` at fixed `y`, all `p`, `k`, where `ρ² = 1 + x² + 2Cxy + y²`.
///
/// The forward recurrence in `p` amplifies rounding by about `(√s / |x|)^p` with
/// `s = 1 + (1 - C²) y²`. When both ends sit inside `|x| < √s` the integrand's poles are
/// farther off the axis than the half-length and a fixed Gauss-Legendre rule is accurate
/// to rounding, so that branch is used instead.
fn edge_integrals(a: f64, b: f64, y: f64, c: f64) -> [[f64; NK]; NP] {
    let s = 1.0 + (1.0 - c * c) * y * y;
    let mut out = [[0.0; NK]; NP];
    if a.abs().max(b.abs()) >= s.sqrt() {
        let (fa, fb) = (antiderivatives_1d(a, y, c), antiderivatives_1d(b, y, c));
        for p in 0..NP {
            for k in 0..NK {
                out[p][k] = fb[p][k] - fa[p][k];
            }
        }
        return out;
    }
    static RULE: std::sync::OnceLock<(Vec<f64>, Vec<f64>)> = std::sync::OnceLock::new();
    let (xs, ws) = RULE.get_or_init(|| gauss_legendre(EDGE_NODES));
    let (m, h) = (0.5 * (a + b), 0.5 * (b - a));
    for (t, w) in xs.iter().zip(ws) {
        let x = m + h * t;
        let rho2 = 1.0 + x * x + 2.0 * c * x * y + y * y;
        let mut xp = w * h;
        for row in out.iter_mut() {
            let mut r = xp / rho2.sqrt();
            for v in row.iter_mut() {
                *v += r;
                r /= rho2;
            }
            xp *= x;
        }
    }
    out
}

/// Edge integrals of the window, along `u` at `v0`, `v1` and along `v` at `u0`, `u1`.
struct Edges {
    du: [[[f64; NK]; NP]; 2],
    dv: [[[f64; NK]; NP]; 2],
    upow: [[f64; NP + 1]; 2],
    vpow: [[f64; NP + 1]; 2],
}

impl Edges {
    fn new(w: &ReducedWindow) -> Self {
        let mut out = Edges {
            du: [[[0.0; NK]; NP]; 2],
            dv: [[[0.0; NK]; NP]; 2],
            upow: [[1.0; NP + 1]; 2],
            vpow: [[1.0; NP + 1]; 2],
        };
        for (e, (u, v)) in [(w.u0, w.v0), (w.u1, w.v1)].into_iter().enumerate() {
            out.du[e] = edge_integrals(w.u0, w.u1, v, w.cross);
            out.dv[e] = edge_integrals(w.v0, w.v1, u, w.cross);
            for p in 1..=NP {
                out.upow[e][p] = out.upow[e][p - 1] * u;
                out.vpow[e][p] = out.vpow[e][p - 1] * v;
            }
        }
        out
    }

    /// `[v^b ∫ u^p / ρ^{2k+1} du]` taken between `v0` and `v1`.
    #[inline]
    fn cs_f(&self, b: usize, p: usize, k: usize) -> f64 {
        self.vpow[1][b] * self.du[1][p][k] - self.vpow[0][b] * self.du[0][p][k]
    }

    /// `[u^a ∫ v^q / ρ^{2k+1} dv]` taken between `u0` and `u1`.
    #[inline]
    fn cs_g(&self, a: usize, q: usize, k: usize) -> f64 {
        self.upow[1][a] * self.dv[1][q][k] - self.upow[0][a] * self.dv[0][q][k]
    }
}

/// `∫∫_{R²} ρ^{-11} du dv`.
pub fn whole_plane_i005(c: f64) -> f64 {
    2.0 * std::f64::consts::PI / (9.0 * (1.0 - c * c).sqrt())
}

/// `∫_{-∞}^{∞} (1 + w²)^{-11/2} dw`.
const FULL_LINE_5: f64 = 768.0 / 945.0;

/// `∫_x^∞ (1 + γ v²)^{-5} dv`.
fn v_tail(x: f64, gamma: f64) -> f64 {
    // J_k(t) = ∫_0^t (1 + s²)^{-k} ds, J_k(∞) = π/2 Π (2i-3)/(2i-2).
    let sg = gamma.sqrt();
    let t = sg * x;
    if t < 0.0 {
        return 2.0 * v_tail(0.0, gamma) - v_tail(-x, gamma);
    }
    // Upper tail directly: ∫_t^∞ (1+s²)^{-k} ds via the reduction formula.
    let mut tail = std::f64::consts::FRAC_PI_2 - t.atan(); // k = 1
    let one_t2 = 1.0 + t * t;
    for k in 2..=5 {
        let kf = k as f64;
        // ∫_t^∞ (1+s²)^{-k} = -t/(2(k-1)(1+t²)^{k-1}) + (2k-3)/(2k-2) ∫_t^∞ (1+s²)^{-(k-1)}
        tail = -t / (2.0 * (kf - 1.0) * one_t2.powi(k - 1)) + (2.0 * kf - 3.0) / (2.0 * kf - 2.0) * tail;
    }
    tail / sg
}

/// Seed value `I_005` over the window: whole plane minus exterior.
pub fn init_i005(w: &ReducedWindow) -> f64 {
    let c = w.cross;
    let gamma = 1.0 - c * c;
    let full = |v: f64| FULL_LINE_5 * (1.0 + gamma * v * v).powi(-5);
    let outside_v = FULL_LINE_5 * (v_tail(-w.v0, gamma) + v_tail(w.v1, gamma));
    let strip = |v: f64| {
        let lo = f0_top(w.u0, v, c);
        let hi = f0_top(w.u1, v, c);
        let fv = full(v);
        (0.5 * fv + lo) + (0.5 * fv - hi)
    };
    let mut breaks = vec![w.v0];
    let mut scale = 0.5;
    let mut inner = Vec::new();
    while scale < w.v1.abs().max(w.v0.abs()) {
        inner.push(scale);
        inner.push(-scale);
        scale *= 4.0;
    }
    inner.push(0.0);
    inner.retain(|&x| x > w.v0 && x < w.v1);
    inner.sort_by(|a, b| a.partial_cmp(b).unwrap());
    breaks.extend(inner);
    breaks.push(w.v1);
    let strips: f64 = breaks.windows(2).map(|p| adaptive_gl(strip, p[0], p[1], 1e-16 * whole_plane_i005(c))).sum();
    whole_plane_i005(c) - outside_v - strips
}

/// Build the full table of `I_pqk` for a reduced window.
pub fn recursion_table(w: &ReducedWindow) -> IntegralTable {
    let c = w.cross;
    let gamma = 1.0 - c * c;
    let cn = Edges::new(w);
    let mut t = Box::new([[[0.0; NK]; NP]; NP]);

    // Step 0 and Step 1: I_00k, downward in k.
    t[0][0][K_MAX] = init_i005(w);
    for k in (0..K_MAX).rev() {
        t[0][0][k] = ((2 * k + 1) as f64 * t[0][0][k + 1] - cn.cs_g(1, 0, k) - cn.cs_f(1, 0, k))
            / (2.0 * k as f64 - 1.0);
    }

    // Step 2: the diagonal p + q = 2K - 1, built from level K - 1.
    for kk in 1..=K_MAX {
        let k = kk - 1;
        let denom = (2 * k + 1) as f64 * gamma;
        let diag = 2 * kk - 1;
        for q in 0..=diag {
            let p = diag - q;
            if p > P_MAX || q > P_MAX {
                continue;
            }
            t[p][q][kk] = if p >= 1 {
                let a = if p >= 2 { (p - 1) as f64 * t[p - 2][q][k] } else { 0.0 };
                let b = if q >= 1 { c * q as f64 * t[p - 1][q - 1][k] } else { 0.0 };
                (a - b + c * cn.cs_f(q, p - 1, k) - cn.cs_g(p - 1, q, k)) / denom
            } else {
                let a = if q >= 2 { (q - 1) as f64 * t[0][q - 2][k] } else { 0.0 };
                (a + c * cn.cs_g(0, q - 1, k) - cn.cs_f(q - 1, 0, k)) / denom
            };
        }
    }

    // Step 3: everything off the diagonal, q = 0 first.
    for k in 0..=K_MAX {
        for p in 1..=P_MAX {
            if 2 * k == p + 1 {
                continue;
            }
            let denom = gamma * (2.0 * k as f64 - p as f64 - 1.0);
            let a = if p >= 2 { (p - 1) as f64 * t[p - 2][0][k] } else { 0.0 };
            let num = a + c * cn.cs_f(0, p - 1, k)
                - gamma * cn.cs_f(1, p, k)
                - (cn.cs_g(p - 1, 0, k) + gamma * cn.cs_g(p + 1, 0, k));
            t[p][0][k] = num / denom;
        }
        for q in 1..=P_MAX {
            for p in 0..=P_MAX - q {
                if 2 * k == p + q + 1 {
                    continue;
                }
                let denom = gamma * (2.0 * k as f64 - (p + q) as f64 - 1.0);
                let a = if q >= 2 { (q - 1) as f64 * t[p][q - 2][k] } else { 0.0 };
                let b = if p >= 1 { c * p as f64 * t[p - 1][q - 1][k] } else { 0.0 };
                let num = a - b + c * cn.cs_g(p, q - 1, k)
                    - gamma * cn.cs_g(p + 1, q, k)
                    - (cn.cs_f(q - 1, p, k) + gamma * cn.cs_f(q + 1, p, k));
                t[p][q][k] = num / denom;
            }
        }
    }
    IntegralTable { vals: t }
}
