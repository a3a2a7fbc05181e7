//! Restarted GMRES for matrix-free operators.

use crate::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct GmresConfig {
    pub restart: usize,
    pub max_iters: usize,
    /// Relative residual `|b - Ax| / |b|`.
    pub tol: f64,
}

impl Default for GmresConfig {
    fn default() -> Self {
        Self { restart: 50, max_iters: 500, tol: 1e-10 }
    }
}

#[derive(Debug, Clone)]
pub struct GmresOutcome {
    pub iterations: usize,
    pub residual: f64,
    /// Relative residual after every inner iteration.
    pub history: Vec<f64>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Solve `A x = b` starting from the contents of `x`.
pub fn gmres(
    mut apply: impl FnMut(&[f64], &mut [f64]) -> Result<()>,
    b: &[f64],
    x: &mut [f64],
    cfg: &GmresConfig,
) -> Result<GmresOutcome> {
    let n = b.len();
    let bnorm = norm(b);
    let mut history = Vec::new();
    if bnorm == 0.0 {
        x.iter_mut().for_each(|v| *v = 0.0);
        return Ok(GmresOutcome { iterations: 0, residual: 0.0, history });
    }
    let mut work = vec![0.0; n];
    let mut total = 0;
    let mut last_cycle_res = f64::INFINITY;
    loop {
        apply(x, &mut work)?;
        let r: Vec<f64> = b.iter().zip(&work).map(|(bi, ai)| bi - ai).collect();
        let beta = norm(&r);
        let rel = beta / bnorm;
        if !rel.is_finite() {
            return Err(Error::NonFinite("GMRES residual"));
        }
        if rel <= cfg.tol {
            return Ok(GmresOutcome { iterations: total, residual: rel, history });
        }
        if total >= cfg.max_iters || rel >= last_cycle_res * (1.0 - 1e-3) {
            return Err(Error::GmresStagnation { iterations: total, residual: rel, history });
        }
        last_cycle_res = rel;

        let m = cfg.restart;
        let mut v: Vec<Vec<f64>> = vec![r.iter().map(|ri| ri / beta).collect()];
        let mut h = vec![vec![0.0; m]; m + 1];
        let mut cs = vec![0.0; m];
        let mut sn = vec![0.0; m];
        let mut g = vec![0.0; m + 1];
        g[0] = beta;
        let mut used = 0;
        for j in 0..m {
            let mut w = vec![0.0; n];
            apply(&v[j], &mut w)?;
            total += 1;
            for i in 0..=j {
                h[i][j] = dot(&w, &v[i]);
                for (wk, vk) in w.iter_mut().zip(&v[i]) {
                    *wk -= h[i][j] * vk;
                }
            }
            h[j + 1][j] = norm(&w);
            for i in 0..j {
                let t = cs[i] * h[i][j] + sn[i] * h[i + 1][j];
                h[i + 1][j] = -sn[i] * h[i][j] + cs[i] * h[i + 1][j];
                h[i][j] = t;
            }
            let denom = h[j][j].hypot(h[j + 1][j]);
            if denom == 0.0 {
                used = j;
                break;
            }
            cs[j] = h[j][j] / denom;
            sn[j] = h[j + 1][j] / denom;
            h[j][j] = denom;
            h[j + 1][j] = 0.0;
            g[j + 1] = -sn[j] * g[j];
            g[j] *= cs[j];
            used = j + 1;
            let est = g[j + 1].abs() / bnorm;
            history.push(est);
            let hn = norm(&w);
            if est <= cfg.tol || total >= cfg.max_iters || hn == 0.0 {
                break;
            }
            v.push(w.iter().map(|wi| wi / hn).collect());
        }
        // Back substitution for the update.
        let mut y = vec![0.0; used];
        for i in (0..used).rev() {
            let s: f64 = (i + 1..used).map(|k| h[i][k] * y[k]).sum();
            y[i] = (g[i] - s) / h[i][i];
        }
        for (i, yi) in y.iter().enumerate() {
            for (xk, vk) in x.iter_mut().zip(&v[i]) {
                *xk += yi * vk;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_small_nonsymmetric_system() {
        let a = [[4.0, 1.0, 0.0], [0.5, 3.0, -1.0], [0.0, 2.0, 5.0]];
        let b = [1.0, 2.0, 3.0];
        let mut x = [0.0; 3];
        let out = gmres(
            |v, y| {
                for i in 0..3 {
                    y[i] = (0..3).map(|k| a[i][k] * v[k]).sum();
                }
                Ok(())
            },
            &b,
            &mut x,
            &GmresConfig::default(),
        )
        .unwrap();
        assert!(out.residual <= 1e-10);
        for i in 0..3 {
            let ax: f64 = (0..3).map(|k| a[i][k] * x[k]).sum();
            assert!((ax - b[i]).abs() < 1e-9);
        }
    }
}
