//! Gauss-Legendre rules and an adaptive 1D integrator built on them.

use std::sync::OnceLock;

/// Nodes and weights on `[-1, 1]` for `n` points, by Newton iteration on `P_n`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..(n + 1) / 2 {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            if n == 1 {
                p0 = 1.0;
                p1 = z;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

fn gl20() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(20))
}

fn gl20_panel(f: &mut impl FnMut(f64) -> f64, a: f64, b: f64) -> f64 {
    let (x, w) = gl20();
    let (c, r) = (0.5 * (a + b), 0.5 * (b - a));
    x.iter().zip(w).map(|(xi, wi)| wi * f(c + r * xi)).sum::<f64>() * r
}

/// Adaptive bisection with 20-point panels; `tol` is absolute.
pub fn adaptive_gl(mut f: impl FnMut(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn rec(f: &mut impl FnMut(f64) -> f64, a: f64, b: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let mid = 0.5 * (a + b);
        let left = gl20_panel(f, a, mid);
        let right = gl20_panel(f, mid, b);
        let sum = left + right;
        // Stop once the panels agree to roundoff of their own size.
        if depth == 0 || (sum - whole).abs() <= tol.max(8.0 * f64::EPSILON * (left.abs() + right.abs())) {
            return sum;
        }
        rec(f, a, mid, left, 0.5 * tol, depth - 1) + rec(f, mid, b, right, 0.5 * tol, depth - 1)
    }
    if a == b {
        return 0.0;
    }
    let whole = gl20_panel(&mut f, a, b);
    rec(&mut f, a, b, whole, tol, 40)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gl_integrates_high_degree_polynomials() {
        let (x, w) = gauss_legendre(20);
        let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(38)).sum();
        assert!((s - 2.0 / 39.0).abs() < 1e-15);
    }

    #[test]
    fn adaptive_handles_peaks() {
        let v = adaptive_gl(|x| 1.0 / (1e-4 + x * x), -1.0, 1.0, 1e-13);
        let exact = 2.0 * (1.0f64 / 1e-2).atan() / 1e-2;
        assert!((v - exact).abs() < 1e-10);
    }
}
