//! Truncated bivariate power series in `(α̂, β̂)`.

use std::ops::{Add, AddAssign, Mul, Sub};

/// Highest total degree any series may carry.
pub const MAX_DEGREE: usize = 12;

#[inline]
fn idx(i: usize, j: usize) -> usize {
    let s = i + j;
    s * (s + 1) / 2 + j
}

#[inline]
fn len_for(deg: usize) -> usize {
    (deg + 1) * (deg + 2) / 2
}

/// `Σ c_ij α̂^i β̂^j` over `i + j <= deg`.
#[derive(Debug, Clone, PartialEq)]
pub struct BivariatePoly {
    deg: usize,
    c: Vec<f64>,
}

impl BivariatePoly {
    pub fn zeros(deg: usize) -> Self {
        assert!(deg <= MAX_DEGREE, "degree {deg} exceeds {MAX_DEGREE}");
        Self { deg, c: vec![0.0; len_for(deg)] }
    }

    pub fn constant(v: f64, deg: usize) -> Self {
        let mut p = Self::zeros(deg);
        p.c[0] = v;
        p
    }

    /// Series of a function of `β̂` alone from its Taylor coefficients.
    pub fn from_beta(coeffs: &[f64], deg: usize) -> Self {
        let mut p = Self::zeros(deg);
        for (j, &v) in coeffs.iter().enumerate().take(deg + 1) {
            p.c[idx(0, j)] = v;
        }
        p
    }

    pub fn from_alpha(coeffs: &[f64], deg: usize) -> Self {
        let mut p = Self::zeros(deg);
        for (i, &v) in coeffs.iter().enumerate().take(deg + 1) {
            p.c[idx(i, 0)] = v;
        }
        p
    }

    pub fn degree(&self) -> usize {
        self.deg
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        if i + j > self.deg {
            0.0
        } else {
            self.c[idx(i, j)]
        }
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.c[idx(i, j)] = v;
    }

    /// Coefficients of total degree `s`, ordered by the `β̂` power.
    pub fn shell(&self, s: usize) -> &[f64] {
        let start = s * (s + 1) / 2;
        &self.c[start..start + s + 1]
    }

    pub fn truncated(&self, deg: usize) -> Self {
        let deg = deg.min(self.deg);
        Self { deg, c: self.c[..len_for(deg)].to_vec() }
    }

    /// Zero every term of total degree below `s`.
    pub fn drop_below(&mut self, s: usize) {
        let end = (s * (s + 1) / 2).min(self.c.len());
        self.c[..end].iter_mut().for_each(|v| *v = 0.0);
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self { deg: self.deg, c: self.c.iter().map(|v| v * s).collect() }
    }

    /// Product truncated at total degree `cap`.
    pub fn mul_trunc(&self, other: &Self, cap: usize) -> Self {
        let cap = cap.min(self.deg + other.deg).min(MAX_DEGREE);
        let mut out = Self::zeros(cap);
        for s1 in 0..=self.deg.min(cap) {
            let a = self.shell(s1);
            if a.iter().all(|v| *v == 0.0) {
                continue;
            }
            for s2 in 0..=other.deg.min(cap - s1) {
                let b = other.shell(s2);
                let base = (s1 + s2) * (s1 + s2 + 1) / 2;
                for (j1, &av) in a.iter().enumerate() {
                    if av == 0.0 {
                        continue;
                    }
                    for (j2, &bv) in b.iter().enumerate() {
                        out.c[base + j1 + j2] += av * bv;
                    }
                }
            }
        }
        out
    }

    /// `self^e` truncated at `cap`; needs a nonzero constant term.
    pub fn powf(&self, e: f64, cap: usize) -> Self {
        let c0 = self.c[0];
        assert!(c0 != 0.0, "powf needs a nonzero constant term");
        let cap = cap.min(MAX_DEGREE);
        let mut w = self.truncated(cap).scaled(1.0 / c0);
        w.c[0] = 0.0;
        // (1 + w)^e = Σ binom(e, n) w^n, w has no constant term so n <= cap.
        let mut out = Self::constant(1.0, cap);
        let mut term = Self::constant(1.0, cap);
        let mut coef = 1.0;
        for n in 1..=cap {
            term = term.mul_trunc(&w, cap);
            coef *= (e - (n - 1) as f64) / n as f64;
            out += &term.scaled(coef);
        }
        out.scaled(c0.powf(e))
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        let mut total = 0.0;
        for s in 0..=self.deg {
            for j in 0..=s {
                total += self.c[idx(s - j, j)] * x.powi((s - j) as i32) * y.powi(j as i32);
            }
        }
        total
    }

    /// Iterate `(i, j, c_ij)` over stored coefficients.
    pub fn terms(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..=self.deg).flat_map(move |s| (0..=s).map(move |j| (s - j, j, self.c[idx(s - j, j)])))
    }
}

impl AddAssign<&BivariatePoly> for BivariatePoly {
    fn add_assign(&mut self, rhs: &BivariatePoly) {
        if rhs.deg > self.deg {
            self.c.resize(len_for(rhs.deg), 0.0);
            self.deg = rhs.deg;
        }
        for (a, b) in self.c.iter_mut().zip(&rhs.c) {
            *a += b;
        }
    }
}

impl Add<&BivariatePoly> for &BivariatePoly {
    type Output = BivariatePoly;
    fn add(self, rhs: &BivariatePoly) -> BivariatePoly {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl Sub<&BivariatePoly> for &BivariatePoly {
    type Output = BivariatePoly;
    fn sub(self, rhs: &BivariatePoly) -> BivariatePoly {
        let mut out = self.clone();
        out += &rhs.scaled(-1.0);
        out
    }
}

impl Mul<&BivariatePoly> for &BivariatePoly {
    type Output = BivariatePoly;
    fn mul(self, rhs: &BivariatePoly) -> BivariatePoly {
        self.mul_trunc(rhs, self.deg.max(rhs.deg))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product_and_power_agree_with_evaluation() {
        let mut p = BivariatePoly::zeros(4);
        p.set(0, 0, 2.0);
        p.set(1, 0, 0.3);
        p.set(0, 1, -0.2);
        p.set(1, 1, 0.05);
        let sq = p.mul_trunc(&p, 8);
        let (x, y) = (0.01, -0.02);
        assert!((sq.eval(x, y) - p.eval(x, y).powi(2)).abs() < 1e-14);
        let r = p.powf(-1.5, 8);
        assert!((r.eval(x, y) - p.eval(x, y).powf(-1.5)).abs() < 1e-12);
    }

    #[test]
    fn drop_below_keeps_higher_shells() {
        let mut p = BivariatePoly::constant(1.0, 4);
        p.set(2, 1, 3.0);
        p.set(1, 0, 2.0);
        p.drop_below(3);
        assert_eq!(p.get(0, 0), 0.0);
        assert_eq!(p.get(1, 0), 0.0);
        assert_eq!(p.get(2, 1), 3.0);
    }
}
