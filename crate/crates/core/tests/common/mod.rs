//! Independent reference integrators for the tests.
//!
//! Nothing here calls the crate's quadrature code; the Gauss-Kronrod nodes are
//! the standard tabulated 7/15 pair.

#![allow(dead_code)]

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];

const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];

const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

/// One G7/K15 panel: (Kronrod estimate, |Kronrod - Gauss|, ∫|f|).
fn gk15(f: &mut dyn FnMut(f64) -> f64, a: f64, b: f64) -> (f64, f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = WGK[7] * fc;
    let mut g = WG[3] * fc;
    let mut abs = WGK[7] * fc.abs();
    for i in 0..7 {
        let x = h * XGK[i];
        let (f1, f2) = (f(c - x), f(c + x));
        k += WGK[i] * (f1 + f2);
        abs += WGK[i] * (f1.abs() + f2.abs());
        if i % 2 == 1 {
            g += WG[i / 2] * (f1 + f2);
        }
    }
    (k * h, ((k - g) * h).abs(), abs * h.abs())
}

/// Adaptive Gauss-Kronrod on `[a, b]` with breakpoints; `rel` is relative to `∫|f|`.
pub fn integrate(f: &mut dyn FnMut(f64) -> f64, breaks: &[f64], rel: f64) -> f64 {
    let mut panels: Vec<(f64, f64, f64, f64, f64)> = Vec::new();
    for w in breaks.windows(2) {
        if w[1] > w[0] {
            let (v, e, s) = gk15(f, w[0], w[1]);
            panels.push((w[0], w[1], v, e, s));
        }
    }
    for _ in 0..4000 {
        let total_abs: f64 = panels.iter().map(|p| p.4).sum();
        let err: f64 = panels.iter().map(|p| p.3).sum();
        if err <= rel * total_abs || total_abs == 0.0 {
            break;
        }
        let worst = (0..panels.len()).max_by(|&i, &j| panels[i].3.total_cmp(&panels[j].3)).unwrap();
        let (a, b, ..) = panels.swap_remove(worst);
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        for (x, y) in [(a, m), (m, b)] {
            let (v, e, s) = gk15(f, x, y);
            panels.push((x, y, v, e, s));
        }
    }
    panels.iter().map(|p| p.2).sum()
}

/// Breakpoints for a peak at `c` of unit width inside `[a, b]`.
pub fn peak_breaks(a: f64, b: f64, c: f64) -> Vec<f64> {
    let mut v = vec![a, b];
    for s in [0.0, -1.0, 1.0, -4.0, 4.0, -16.0, 16.0] {
        let x = c + s;
        if x > a && x < b {
            v.push(x);
        }
    }
    v.sort_by(f64::total_cmp);
    v
}

/// `∫∫ f(u, v)` over a rectangle, inner integral in `u` with breakpoints at `peak_u(v)`.
pub fn integrate_2d(
    f: &dyn Fn(f64, f64) -> f64,
    u: (f64, f64),
    v: (f64, f64),
    peak_u: &dyn Fn(f64) -> f64,
    peak_v: f64,
    rel: f64,
) -> f64 {
    let mut outer = |y: f64| {
        let mut inner = |x: f64| f(x, y);
        integrate(&mut inner, &peak_breaks(u.0, u.1, peak_u(y)), rel)
    };
    integrate(&mut outer, &peak_breaks(v.0, v.1, peak_v), rel)
}

/// `I_pqk = ∫∫ u^p v^q (1 + u² + 2Cuv + v²)^{-(2k+1)/2}` over `[u0,u1]×[v0,v1]`, and `∫∫ |·|`.
pub fn reduced_integral(p: usize, q: usize, k: usize, c: f64, u: (f64, f64), v: (f64, f64)) -> (f64, f64) {
    let h = move |x: f64, y: f64| {
        let r2 = 1.0 + x * x + 2.0 * c * x * y + y * y;
        x.powi(p as i32) * y.powi(q as i32) * r2.powf(-((2 * k + 1) as f64) / 2.0)
    };
    let val = integrate_2d(&h, u, v, &|y| -c * y, 0.0, 1e-13);
    let abs = integrate_2d(&|x, y| h(x, y).abs(), u, v, &|y| -c * y, 0.0, 1e-10);
    (val, abs)
}

/// Surface integral `∫∫ g(α, β) dα dβ` over `[-π, π] × [-π/2, π/2]`.
pub fn chart_integral(g: &dyn Fn(f64, f64) -> f64, rel: f64) -> f64 {
    use std::f64::consts::PI;
    let mut outer = |b: f64| {
        let mut inner = |a: f64| g(a, b);
        integrate(&mut inner, &[-PI, -PI / 2.0, 0.0, PI / 2.0, PI], rel)
    };
    integrate(&mut outer, &[-PI / 2.0, 0.0, PI / 2.0], rel)
}

/// Least-squares slope of `log y` against `log x`.
pub fn log_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / n, ly.iter().sum::<f64>() / n);
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

/// Exterior Stokes velocity of uniform flow `u` past a no-slip sphere of radius `a` at the origin.
pub fn sphere_flow(a: f64, u: [f64; 3], x: [f64; 3]) -> [f64; 3] {
    let r2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
    let r = r2.sqrt();
    let ux = u[0] * x[0] + u[1] * x[1] + u[2] * x[2];
    let c1 = 1.0 - 0.75 * a / r - 0.25 * a.powi(3) / r.powi(3);
    let c2 = -0.75 * a / r.powi(3) + 0.75 * a.powi(3) / r.powi(5);
    [0, 1, 2].map(|i| c1 * u[i] + c2 * ux * x[i])
}
