//! Local expansion of the layer integrands and the window corrections `E⁶_W[H]`.
//!
//! Near the base point a kernel term `N / ρ^r` is expanded as
//! `Σ_n binom(r, n) N η^n / ρ_o^{r+2n}`, which is a combination of the basis
//! functions `H_pqk = α̂^p β̂^q / ρ_o^{2k+1}`.

use std::f64::consts::PI;
use std::sync::OnceLock;

use crate::geom::{ChartGrid, QuadraticCoeffs, StandardEllipsoid, SurfaceJet, JET_ORDER};
use crate::nearcore::{recursion_table, ReducedWindow, K_MAX, P_MAX};
use crate::poly::BivariatePoly;
use crate::trapz::{em_weight, end_weight, rule_terms, RuleOrder};
use crate::{Error, Result, Vec3};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BasisIndex {
    pub p: usize,
    pub q: usize,
    pub k: usize,
}

/// A kernel term `N / ρ^r` whose numerator vanishes like `d^m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KernelTerm {
    pub r: u32,
    pub m: u32,
}

pub const SLP_TERMS: [KernelTerm; 2] = [KernelTerm { r: 1, m: 0 }, KernelTerm { r: 3, m: 2 }];
pub const DLP_TERMS: [KernelTerm; 1] = [KernelTerm { r: 5, m: 3 }];

/// Which layer potentials a correction is assembled for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct LayerSet {
    pub single: bool,
    pub double: bool,
}

impl LayerSet {
    pub const SINGLE: LayerSet = LayerSet { single: true, double: false };
    pub const DOUBLE: LayerSet = LayerSet { single: false, double: true };
    pub const BOTH: LayerSet = LayerSet { single: true, double: true };

    fn terms(self) -> impl Iterator<Item = KernelTerm> {
        let s: &[KernelTerm] = if self.single { &SLP_TERMS } else { &[] };
        let d: &[KernelTerm] = if self.double { &DLP_TERMS } else { &[] };
        s.iter().chain(d.iter()).copied()
    }
}

/// Coefficient of `(η/ρ_o²)^n` in `(1 + η/ρ_o²)^{-r/2}`.
pub fn binomial_factor(r: u32, n: u32) -> Result<f64> {
    if n > 3 {
        return Err(Error::UnsupportedBinomial(n));
    }
    let half = r as f64 / 2.0;
    Ok((0..n).fold(1.0, |acc, i| acc * (-half - i as f64) / (i as f64 + 1.0)))
}

fn check_term(t: KernelTerm) -> Result<()> {
    if t.r % 2 == 0 || t.r > 5 || t.m > t.r + 1 {
        return Err(Error::UnsupportedKernel { r: t.r, m: t.m });
    }
    Ok(())
}

fn max_n(t: KernelTerm) -> u32 {
    t.r + 1 - t.m
}

/// Basis functions needed for a kernel term at fourth order.
pub fn basis_set(r: u32, m: u32) -> Result<Vec<BasisIndex>> {
    let t = KernelTerm { r, m };
    check_term(t)?;
    let mut out = Vec::new();
    for n in 0..=max_n(t) {
        let k = ((r + 2 * n - 1) / 2) as usize;
        if k > K_MAX {
            return Err(Error::UnsupportedKernel { r, m });
        }
        let lo = 3 * n as usize;
        let hi = (2 * n + r + 1) as usize;
        for s in lo..=hi {
            for q in 0..=s {
                out.push(BasisIndex { p: s - q, q, k });
            }
        }
    }
    Ok(out)
}

/// The union of the Stokes basis sets with a dense slot numbering.
pub struct Inventory {
    pub list: Vec<BasisIndex>,
    slot: Vec<i32>,
    pub single_slots: Vec<usize>,
    pub double_slots: Vec<usize>,
}

#[inline]
fn key(p: usize, q: usize, k: usize) -> usize {
    (p * (P_MAX + 1) + q) * (K_MAX + 1) + k
}

impl Inventory {
    pub fn len(&self) -> usize {
        self.list.len()
    }

    pub fn is_empty(&self) -> bool {
        self.list.is_empty()
    }

    pub fn slot(&self, p: usize, q: usize, k: usize) -> Option<usize> {
        if p > P_MAX || q > P_MAX || k > K_MAX {
            return None;
        }
        let s = self.slot[key(p, q, k)];
        (s >= 0).then_some(s as usize)
    }

    pub fn slots(&self, layers: LayerSet) -> Vec<usize> {
        let mut out = Vec::new();
        if layers.single {
            out.extend(&self.single_slots);
        }
        if layers.double {
            out.extend(&self.double_slots);
        }
        out.sort_unstable();
        out.dedup();
        out
    }
}

/// Shared inventory of all basis functions used by the Stokes corrections.
pub fn inventory() -> &'static Inventory {
    static INV: OnceLock<Inventory> = OnceLock::new();
    INV.get_or_init(|| {
        let collect = |terms: &[KernelTerm]| {
            let mut v: Vec<BasisIndex> =
                terms.iter().flat_map(|t| basis_set(t.r, t.m).expect("static kernel terms")).collect();
            v.sort();
            v.dedup();
            v
        };
        let single = collect(&SLP_TERMS);
        let double = collect(&DLP_TERMS);
        let mut list: Vec<BasisIndex> = single.iter().chain(&double).copied().collect();
        list.sort();
        list.dedup();
        let mut slot = vec![-1; (P_MAX + 1) * (P_MAX + 1) * (K_MAX + 1)];
        for (i, b) in list.iter().enumerate() {
            slot[key(b.p, b.q, b.k)] = i as i32;
        }
        let find = |b: &BasisIndex| slot[key(b.p, b.q, b.k)] as usize;
        let single_slots = single.iter().map(find).collect();
        let double_slots = double.iter().map(find).collect();
        Inventory { list, slot, single_slots, double_slots }
    })
}

/// Window half-width for a chart spacing `h`: 5 up to 80 points per period, then growing.
pub fn window_half_width(h: f64) -> usize {
    let n_eff = 2.0 * PI / h;
    if n_eff <= 80.0 + 1e-9 {
        5
    } else {
        (5.0 * (n_eff / 80.0).powf(0.8)).round() as usize
    }
}

/// A `2n_w × 2n_w` block of lattice intervals around the node nearest the base point.
///
/// `j` indices are unwrapped so that `α̂` stays continuous across the seam.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Window {
    pub j_lo: i64,
    pub k_lo: usize,
    pub na: usize,
    pub nb: usize,
    pub j0: i64,
    pub k0: usize,
}

impl Window {
    pub fn choose(grid: &ChartGrid, alpha_b: f64, beta_b: f64, n_w: usize) -> Self {
        let j0 = ((alpha_b + PI) / grid.d_alpha()).round() as i64;
        let k0 = (((beta_b + PI / 2.0) / grid.d_beta()).round().max(0.0) as usize).min(grid.m);
        let nwa = n_w.min((grid.n - 1) / 2).max(1);
        let nwb = n_w.min(grid.m / 2).max(1);
        let k_lo = k0.saturating_sub(nwb).min(grid.m - 2 * nwb);
        Self { j_lo: j0 - nwa as i64, k_lo, na: 2 * nwa, nb: 2 * nwb, j0, k0 }
    }

    /// Local node indices of `(j0, k0)`.
    pub fn center_local(&self) -> (usize, usize) {
        ((self.j0 - self.j_lo) as usize, self.k0 - self.k_lo)
    }

    pub fn rect(&self, grid: &ChartGrid, alpha_b: f64, beta_b: f64) -> WindowRect {
        WindowRect {
            alpha0: grid.alpha(self.j_lo) - alpha_b,
            beta0: grid.beta(self.k_lo) - beta_b,
            d_alpha: grid.d_alpha(),
            d_beta: grid.d_beta(),
            na: self.na,
            nb: self.nb,
        }
    }
}

/// Window geometry in base-point coordinates `(α̂, β̂)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindowRect {
    pub alpha0: f64,
    pub beta0: f64,
    pub d_alpha: f64,
    pub d_beta: f64,
    pub na: usize,
    pub nb: usize,
}

impl WindowRect {
    pub fn alpha1(&self) -> f64 {
        self.alpha0 + self.na as f64 * self.d_alpha
    }

    pub fn beta1(&self) -> f64 {
        self.beta0 + self.nb as f64 * self.d_beta
    }
}

fn binom_row(p: usize) -> [f64; 4] {
    let mut out = [0.0; 4];
    let mut c = 1.0;
    for (i, slot) in out.iter_mut().enumerate() {
        if i > p {
            break;
        }
        *slot = c;
        c = c * (p - i) as f64 / (i + 1) as f64;
    }
    out
}

/// Taylor coefficients to `s³` of `(q0 + q1 s + q2 s²)^{-σ}`.
fn inv_pow_series(q0: f64, q1: f64, q2: f64, sigma: f64) -> [f64; 4] {
    let w1 = q1 / q0;
    let w2 = q2 / q0;
    let base = q0.powf(-sigma);
    let s1 = sigma * (sigma + 1.0);
    let s2 = s1 * (sigma + 2.0);
    [
        base,
        base * (-sigma * w1),
        base * (-sigma * w2 + 0.5 * s1 * w1 * w1),
        base * (s1 * w1 * w2 - s2 / 6.0 * w1 * w1 * w1),
    ]
}

/// `E⁶_W[H_pqk] = ∫_W H - T⁶_W[H]` for the requested inventory slots.
///
/// The result has one entry per inventory slot; slots not requested are zero.
pub fn basis_window_errors(
    q: &QuadraticCoeffs,
    rect: &WindowRect,
    puncture: Option<(usize, usize)>,
    slots: &[usize],
) -> Result<Vec<f64>> {
    let inv = inventory();
    let mut out = vec![0.0; inv.len()];
    if slots.is_empty() {
        return Ok(out);
    }
    let rw = ReducedWindow::new(q, (rect.alpha0, rect.alpha1()), (rect.beta0, rect.beta1()))?;
    let table = recursion_table(&rw);
    let basis: Vec<BasisIndex> = slots.iter().map(|&s| inv.list[s]).collect();
    let kmax = basis.iter().map(|b| b.k).max().unwrap_or(0);
    let pmax = basis.iter().map(|b| b.p).max().unwrap_or(0);
    let qmax = basis.iter().map(|b| b.q).max().unwrap_or(0);

    let (na, nb) = (rect.na, rect.nb);
    let (da, db) = (rect.d_alpha, rect.d_beta);
    let alphas: Vec<f64> = (0..=na).map(|i| rect.alpha0 + i as f64 * da).collect();
    let betas: Vec<f64> = (0..=nb).map(|j| rect.beta0 + j as f64 * db).collect();
    let powers = |x: f64, n: usize| {
        let mut v = vec![1.0; n + 1];
        for i in 1..=n {
            v[i] = v[i - 1] * x;
        }
        v
    };
    let apow: Vec<Vec<f64>> = alphas.iter().map(|&a| powers(a, pmax)).collect();
    let bpow: Vec<Vec<f64>> = betas.iter().map(|&b| powers(b, qmax)).collect();
    let (qa, qb, qc, d2) = (q.a, q.b, q.c, q.d * q.d);
    let form = |a: f64, b: f64| d2 + qa * a * a + 2.0 * qb * a * b + qc * b * b;

    let mut t6 = vec![0.0; basis.len()];
    let mut rk = vec![0.0; kmax + 1];
    // Weighted node sum.
    for j in 0..=nb {
        for i in 0..=na {
            if puncture == Some((i, j)) {
                continue;
            }
            let w = end_weight(i, na) * end_weight(j, nb) * da * db;
            let qq = form(alphas[i], betas[j]);
            let inv_q = 1.0 / qq;
            rk[0] = inv_q.sqrt();
            for k in 1..=kmax {
                rk[k] = rk[k - 1] * inv_q;
            }
            for (acc, b) in t6.iter_mut().zip(&basis) {
                *acc += w * apow[i][b.p] * bpow[j][b.q] * rk[b.k];
            }
        }
    }

    // Edge and corner derivative terms of the tensor sixth-order rule.
    let binoms: Vec<[f64; 4]> = (0..=pmax.max(qmax)).map(binom_row).collect();
    // derivative of x^p (x0 + s)^p series, coefficient i: C(p,i) x0^{p-i}
    let mono = |x0pow: &[f64], p: usize| -> [f64; 4] {
        let mut m = [0.0; 4];
        for i in 0..=p.min(3) {
            m[i] = binoms[p][i] * x0pow[p - i];
        }
        m
    };
    let terms = rule_terms(RuleOrder::Sixth);
    for &(ta, tb) in terms.iter().skip(1) {
        let w = em_weight(ta, da) * em_weight(tb, db);
        if tb == 0 {
            // α-edges: Σ''_j [∂^ta_α H]_{α0}^{α1}
            for (side, i) in [(-1.0, 0usize), (1.0, na)] {
                let a0 = alphas[i];
                for j in 0..=nb {
                    let b0 = betas[j];
                    let q0 = form(a0, b0);
                    let q1 = 2.0 * (qa * a0 + qb * b0);
                    let ser: Vec<[f64; 4]> =
                        (0..=kmax).map(|k| inv_pow_series(q0, q1, qa, k as f64 + 0.5)).collect();
                    let ew = side * end_weight(j, nb) * w;
                    for (acc, b) in t6.iter_mut().zip(&basis) {
                        let m = mono(&apow[i], b.p);
                        let r = &ser[b.k];
                        let coef: f64 = (0..=ta).map(|l| m[l] * r[ta - l]).sum();
                        let fact = if ta == 1 { 1.0 } else { 6.0 };
                        *acc += ew * fact * coef * bpow[j][b.q];
                    }
                }
            }
        } else if ta == 0 {
            for (side, j) in [(-1.0, 0usize), (1.0, nb)] {
                let b0 = betas[j];
                for i in 0..=na {
                    let a0 = alphas[i];
                    let q0 = form(a0, b0);
                    let q1 = 2.0 * (qb * a0 + qc * b0);
                    let ser: Vec<[f64; 4]> =
                        (0..=kmax).map(|k| inv_pow_series(q0, q1, qc, k as f64 + 0.5)).collect();
                    let ew = side * end_weight(i, na) * w;
                    for (acc, b) in t6.iter_mut().zip(&basis) {
                        let m = mono(&bpow[j], b.q);
                        let r = &ser[b.k];
                        let coef: f64 = (0..=tb).map(|l| m[l] * r[tb - l]).sum();
                        let fact = if tb == 1 { 1.0 } else { 6.0 };
                        *acc += ew * fact * coef * apow[i][b.p];
                    }
                }
            }
        }
    }
    // Corners: mixed derivatives from a bivariate series of ρ_o^{-(2k+1)}.
    let mixed: Vec<(usize, usize, f64)> = terms
        .iter()
        .filter(|(a, b)| *a > 0 && *b > 0)
        .map(|&(a, b)| (a, b, em_weight(a, da) * em_weight(b, db)))
        .collect();
    for (ci, cj, sign) in [(0usize, 0usize, 1.0), (na, 0, -1.0), (0, nb, -1.0), (na, nb, 1.0)] {
        let (a0, b0) = (alphas[ci], betas[cj]);
        let mut qpoly = BivariatePoly::zeros(6);
        qpoly.set(0, 0, form(a0, b0));
        qpoly.set(1, 0, 2.0 * (qa * a0 + qb * b0));
        qpoly.set(0, 1, 2.0 * (qb * a0 + qc * b0));
        qpoly.set(2, 0, qa);
        qpoly.set(1, 1, 2.0 * qb);
        qpoly.set(0, 2, qc);
        let inv_half = qpoly.powf(-0.5, 6);
        let inv_one = qpoly.powf(-1.0, 6);
        let mut rser = vec![inv_half];
        for k in 1..=kmax {
            let next = rser[k - 1].mul_trunc(&inv_one, 6);
            rser.push(next);
        }
        for (acc, b) in t6.iter_mut().zip(&basis) {
            let ma = mono(&apow[ci], b.p);
            let mb = mono(&bpow[cj], b.q);
            let r = &rser[b.k];
            for &(ta, tb, w) in &mixed {
                let mut coef = 0.0;
                for i1 in 0..=ta {
                    for j1 in 0..=tb {
                        coef += ma[i1] * mb[j1] * r.get(ta - i1, tb - j1);
                    }
                }
                let fact = [1.0, 1.0, 2.0, 6.0][ta] * [1.0, 1.0, 2.0, 6.0][tb];
                *acc += sign * w * fact * coef;
            }
        }
    }

    for ((&s, b), t) in slots.iter().zip(&basis).zip(&t6) {
        let exact = rw.scale(b.p, b.q, b.k) * table.get(b.p, b.q, b.k);
        out[s] = exact - t;
    }
    Ok(out)
}

/// Geometry-only Taylor data at a base point, reusable for any density.
#[derive(Debug, Clone)]
pub struct TargetSeries {
    /// Components of `x - x_o`.
    pub x: [BivariatePoly; 3],
    /// Surface element `J`.
    pub jac: BivariatePoly,
    /// `(x - x_o) · n J`.
    pub xnj: BivariatePoly,
    /// `η^0 .. η^3`.
    pub eta: [BivariatePoly; 4],
}

fn factorials() -> [f64; JET_ORDER + 1] {
    let mut f = [1.0; JET_ORDER + 1];
    for i in 1..=JET_ORDER {
        f[i] = f[i - 1] * i as f64;
    }
    f
}

/// Series of the three components of `x(α_b + α̂, β_b + β̂) - x_o`.
fn position_series(jet: &SurfaceJet, x_o: &Vec3) -> [BivariatePoly; 3] {
    let fact = factorials();
    let mut out = [BivariatePoly::zeros(JET_ORDER), BivariatePoly::zeros(JET_ORDER), BivariatePoly::zeros(JET_ORDER)];
    for s in 0..=JET_ORDER {
        for j in 0..=s {
            let i = s - j;
            let v = jet.deriv(i, j) / (fact[i] * fact[j]);
            for c in 0..3 {
                out[c].set(i, j, v[c]);
            }
        }
    }
    for c in 0..3 {
        let c0 = out[c].get(0, 0) - x_o[c];
        out[c].set(0, 0, c0);
    }
    out
}

/// `η = ρ² - (d² + quadratic form)`: the part of `ρ²` of degree 3 to 6.
pub fn eta_series(jet: &SurfaceJet, x_o: &Vec3) -> BivariatePoly {
    let x = position_series(jet, x_o);
    eta_from_position(&x)
}

fn eta_from_position(x: &[BivariatePoly; 3]) -> BivariatePoly {
    let mut rho2 = x[0].mul_trunc(&x[0], JET_ORDER);
    rho2 += &x[1].mul_trunc(&x[1], JET_ORDER);
    rho2 += &x[2].mul_trunc(&x[2], JET_ORDER);
    rho2.drop_below(3);
    rho2
}

impl TargetSeries {
    pub fn new(ell: &StandardEllipsoid, jet: &SurfaceJet, x_o: &Vec3) -> Self {
        let x = position_series(jet, x_o);
        let fact = factorials();
        // cos(β_b + β̂) series.
        let (sb, cb) = jet.beta.sin_cos();
        let cos_coeffs: Vec<f64> =
            (0..=JET_ORDER).map(|j| crate::geom::cos_shift(cb, sb, j) / fact[j]).collect();
        let cosb = BivariatePoly::from_beta(&cos_coeffs, JET_ORDER);
        // n J = abc cosβ (x/a², y/b², z/c²); uses x itself, not x - x_o.
        let axes = ell.axes();
        let abc = ell.abc();
        let nj: Vec<BivariatePoly> = (0..3)
            .map(|c| {
                let mut xc = x[c].clone();
                xc.set(0, 0, x[c].get(0, 0) + x_o[c]);
                xc.mul_trunc(&cosb, JET_ORDER).scaled(abc / (axes[c] * axes[c]))
            })
            .collect();
        let mut j2 = nj[0].mul_trunc(&nj[0], 4);
        j2 += &nj[1].mul_trunc(&nj[1], 4);
        j2 += &nj[2].mul_trunc(&nj[2], 4);
        let jac = j2.powf(0.5, 4);
        let mut xnj = x[0].mul_trunc(&nj[0], JET_ORDER);
        xnj += &x[1].mul_trunc(&nj[1], JET_ORDER);
        xnj += &x[2].mul_trunc(&nj[2], JET_ORDER);
        let eta1 = eta_from_position(&x);
        let eta2 = eta1.mul_trunc(&eta1, 12);
        let eta3 = eta2.mul_trunc(&eta1, 12);
        let eta = [BivariatePoly::constant(1.0, 0), eta1, eta2, eta3];
        Self { x, jac, xnj, eta }
    }
}

/// Taylor coefficients of the density to total degree 3 at the base point.
#[derive(Debug, Clone)]
pub struct DensityJet {
    pub comps: [BivariatePoly; 3],
}

impl DensityJet {
    /// From partial derivatives `∂^i_α ∂^j_β f`, `i + j <= 3`.
    pub fn from_derivatives(d: &[[Vec3; 4]; 4]) -> Self {
        let fact = [1.0, 1.0, 2.0, 6.0];
        let mut comps = [BivariatePoly::zeros(3), BivariatePoly::zeros(3), BivariatePoly::zeros(3)];
        for i in 0..=3 {
            for j in 0..=3 - i {
                for c in 0..3 {
                    comps[c].set(i, j, d[i][j][c] / (fact[i] * fact[j]));
                }
            }
        }
        Self { comps }
    }

    pub fn constant(f: Vec3) -> Self {
        let mut d = [[Vec3::zeros(); 4]; 4];
        d[0][0] = f;
        Self::from_derivatives(&d)
    }
}

/// Prefactors of the Stokes kernel terms (viscosity 1).
fn prefactor(t: KernelTerm) -> f64 {
    match t.r {
        1 | 3 => 1.0 / (8.0 * PI),
        _ => -3.0 / (4.0 * PI),
    }
}

/// Coefficients `c_pqk` (vector valued) over the inventory slots.
pub fn assemble_coefficients(series: &TargetSeries, f: &DensityJet, layers: LayerSet) -> Vec<Vec3> {
    let inv = inventory();
    let mut c = vec![Vec3::zeros(); inv.len()];
    for term in layers.terms() {
        let top = (term.r + 1) as usize; // cap at n = 0
        let ncap = top;
        // f · X truncated for the numerators.
        let numer: [BivariatePoly; 3] = match term.r {
            1 => std::array::from_fn(|i| f.comps[i].mul_trunc(&series.jac, ncap)),
            3 | 5 => {
                let mut fx = f.comps[0].mul_trunc(&series.x[0], ncap);
                fx += &f.comps[1].mul_trunc(&series.x[1], ncap);
                fx += &f.comps[2].mul_trunc(&series.x[2], ncap);
                let other = if term.r == 3 { &series.jac } else { &series.xnj };
                let fxo = fx.mul_trunc(other, ncap);
                std::array::from_fn(|i| fxo.mul_trunc(&series.x[i], ncap))
            }
            _ => unreachable!("kernel terms are checked"),
        };
        let pref = prefactor(term);
        for n in 0..=max_n(term) as usize {
            let cap = 2 * n + term.r as usize + 1;
            let k = (term.r as usize + 2 * n - 1) / 2;
            let bin = binomial_factor(term.r, n as u32).expect("n <= 3") * pref;
            for comp in 0..3 {
                let num = numer[comp].truncated(cap.saturating_sub(3 * n));
                let s = if n == 0 { num } else { num.mul_trunc(&series.eta[n], cap) };
                for (p, q, v) in s.terms() {
                    if v == 0.0 || p + q < 3 * n || p + q > cap {
                        continue;
                    }
                    if let Some(slot) = inv.slot(p, q, k) {
                        c[slot][comp] += bin * v;
                    }
                }
            }
        }
    }
    c
}

/// `Σ c_pqk E⁶[H_pqk]`.
pub fn apply_correction(coeffs: &[Vec3], errors: &[f64]) -> Vec3 {
    coeffs.iter().zip(errors).fold(Vec3::zeros(), |acc, (c, e)| acc + c * *e)
}
