//! Euler-Maclaurin corrected trapezoidal rules on rectangles and closed lat-long charts.

use std::ops::{Add, Mul};

use crate::{Error, Result, Vec3};

/// Values that a quadrature can accumulate.
pub trait Accum: Copy + Add<Output = Self> + Mul<f64, Output = Self> {
    fn zero() -> Self;
}

impl Accum for f64 {
    fn zero() -> Self {
        0.0
    }
}

impl Accum for Vec3 {
    fn zero() -> Self {
        Vec3::zeros()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RuleOrder {
    Second,
    Fourth,
    Sixth,
}

impl RuleOrder {
    pub fn as_u8(self) -> u8 {
        match self {
            RuleOrder::Second => 2,
            RuleOrder::Fourth => 4,
            RuleOrder::Sixth => 6,
        }
    }
}

/// Nodes `(α0 + iΔα, β0 + jΔβ)`, `0 <= i <= n`, `0 <= j <= m`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RectLattice {
    pub alpha0: f64,
    pub beta0: f64,
    pub d_alpha: f64,
    pub d_beta: f64,
    pub n: usize,
    pub m: usize,
}

impl RectLattice {
    pub fn over(alpha: (f64, f64), beta: (f64, f64), n: usize, m: usize) -> Self {
        Self {
            alpha0: alpha.0,
            beta0: beta.0,
            d_alpha: (alpha.1 - alpha.0) / n as f64,
            d_beta: (beta.1 - beta.0) / m as f64,
            n,
            m,
        }
    }

    pub fn alpha(&self, i: usize) -> f64 {
        self.alpha0 + i as f64 * self.d_alpha
    }

    pub fn beta(&self, j: usize) -> f64 {
        self.beta0 + j as f64 * self.d_beta
    }

    pub fn alpha1(&self) -> f64 {
        self.alpha(self.n)
    }

    pub fn beta1(&self) -> f64 {
        self.beta(self.m)
    }
}

#[inline]
pub(crate) fn end_weight(i: usize, n: usize) -> f64 {
    if i == 0 || i == n {
        0.5
    } else {
        1.0
    }
}

/// Coefficient of `[∂^a f]` in the one-dimensional rule of spacing `h`.
#[inline]
pub(crate) fn em_weight(a: usize, h: f64) -> f64 {
    match a {
        0 => h,
        1 => -h * h / 12.0,
        3 => h.powi(4) / 720.0,
        _ => 0.0,
    }
}

/// `(α-order, β-order)` pairs making up each rule. Order 6 is the full tensor product.
pub(crate) fn rule_terms(order: RuleOrder) -> &'static [(usize, usize)] {
    match order {
        RuleOrder::Second => &[(0, 0)],
        RuleOrder::Fourth => &[(0, 0), (1, 0), (0, 1)],
        RuleOrder::Sixth => &[(0, 0), (1, 0), (0, 1), (3, 0), (0, 3), (1, 1), (1, 3), (3, 1), (3, 3)],
    }
}

/// Corrected trapezoidal rule on a rectangle.
///
/// `derivs(i, j, α, β)` returns `∂^i_α ∂^j_β f`; it is required for orders 4 and 6.
/// A punctured node is dropped from the weighted sum.
pub fn trap_rect(
    lat: &RectLattice,
    values: impl Fn(usize, usize) -> f64,
    derivs: Option<&dyn Fn(usize, usize, f64, f64) -> f64>,
    order: RuleOrder,
    puncture: Option<(usize, usize)>,
) -> Result<f64> {
    let (n, m) = (lat.n, lat.m);
    let mut total = 0.0;
    for j in 0..=m {
        let mut row = 0.0;
        for i in 0..=n {
            if puncture == Some((i, j)) {
                continue;
            }
            row += end_weight(i, n) * values(i, j);
        }
        total += end_weight(j, m) * row;
    }
    total *= lat.d_alpha * lat.d_beta;
    if order == RuleOrder::Second {
        return Ok(total);
    }
    let der = derivs.ok_or(Error::MissingDerivatives(order.as_u8()))?;
    let (a0, a1, b0, b1) = (lat.alpha0, lat.alpha1(), lat.beta0, lat.beta1());
    for &(p, q) in rule_terms(order).iter().skip(1) {
        let w = em_weight(p, lat.d_alpha) * em_weight(q, lat.d_beta);
        let term = if q == 0 {
            (0..=m)
                .map(|j| end_weight(j, m) * (der(p, 0, a1, lat.beta(j)) - der(p, 0, a0, lat.beta(j))))
                .sum::<f64>()
        } else if p == 0 {
            (0..=n)
                .map(|i| end_weight(i, n) * (der(0, q, lat.alpha(i), b1) - der(0, q, lat.alpha(i), b0)))
                .sum::<f64>()
        } else {
            der(p, q, a1, b1) - der(p, q, a1, b0) - der(p, q, a0, b1) + der(p, q, a0, b0)
        };
        total += w * term;
    }
    Ok(total)
}

/// Order-4 rule over a full chart `[-π, π) × [-π/2, π/2]` with `n` columns and `m + 1` rows.
///
/// The α boundary terms cancel by periodicity. `pole_slopes` holds
/// `Σ_j ∂_β G(α_j, ∓π/2)` for the south and north rows.
pub fn trap_closed_surface<T: Accum>(
    n: usize,
    m: usize,
    mut sample: impl FnMut(usize, usize) -> T,
    pole_slopes: [T; 2],
    puncture: Option<(usize, usize)>,
) -> T {
    let da = 2.0 * std::f64::consts::PI / n as f64;
    let db = std::f64::consts::PI / m as f64;
    let mut total = T::zero();
    for k in 0..=m {
        let mut row = T::zero();
        for j in 0..n {
            if puncture == Some((j, k)) {
                continue;
            }
            row = row + sample(j, k);
        }
        total = total + row * end_weight(k, m);
    }
    let [south, north] = pole_slopes;
    total * (da * db) + (north + south * -1.0) * (-db * db * da / 12.0)
}
