//! Bicubic Lagrange interpolation on chart lattices.

use std::f64::consts::{FRAC_PI_2, PI};

use crate::geom::ChartGrid;
use crate::Vec3;

/// Cubic Lagrange basis on nodes `0, 1, 2, 3` and its derivatives at `s`.
#[inline]
fn lagrange(s: f64) -> [[f64; 4]; 4] {
    // ℓ_i(s) written as cubic coefficients in s.
    const C: [[f64; 4]; 4] = [
        [1.0, -11.0 / 6.0, 1.0, -1.0 / 6.0],
        [0.0, 3.0, -2.5, 0.5],
        [0.0, -1.5, 2.0, -0.5],
        [0.0, 1.0 / 3.0, -0.5, 1.0 / 6.0],
    ];
    let mut out = [[0.0; 4]; 4]; // out[d][i]
    for i in 0..4 {
        let c = C[i];
        out[0][i] = c[0] + s * (c[1] + s * (c[2] + s * c[3]));
        out[1][i] = c[1] + s * (2.0 * c[2] + s * 3.0 * c[3]);
        out[2][i] = 2.0 * c[2] + 6.0 * c[3] * s;
        out[3][i] = 6.0 * c[3];
    }
    out
}

#[inline]
fn lagrange_value(s: f64) -> [f64; 4] {
    let (s1, s2, s3) = (s - 1.0, s - 2.0, s - 3.0);
    [-s1 * s2 * s3 / 6.0, s * s2 * s3 / 2.0, -s * s1 * s3 / 2.0, s * s1 * s2 / 6.0]
}

/// 4×4 node block and local offsets for a point in chart angles.
#[derive(Debug, Clone, Copy)]
pub struct Stencil {
    pub cols: [usize; 4],
    pub rows: [usize; 4],
    pub s: f64,
    pub t: f64,
}

impl Stencil {
    pub fn locate(grid: &ChartGrid, alpha: f64, beta: f64) -> Self {
        let ua = (alpha + PI) / grid.d_alpha();
        let j = ua.floor() as i64;
        let cols = [grid.wrap(j - 1), grid.wrap(j), grid.wrap(j + 1), grid.wrap(j + 2)];
        let ub = (beta + FRAC_PI_2) / grid.d_beta();
        let k = (ub.floor() as i64).clamp(1, grid.m as i64 - 2);
        let k0 = (k - 1) as usize;
        Self { cols, rows: [k0, k0 + 1, k0 + 2, k0 + 3], s: ua - (j - 1) as f64, t: ub - (k - 1) as f64 }
    }

    /// Tensor weights for the value.
    pub fn weights(&self) -> [[f64; 4]; 4] {
        let wa = lagrange_value(self.s);
        let wb = lagrange_value(self.t);
        let mut w = [[0.0; 4]; 4];
        for b in 0..4 {
            for a in 0..4 {
                w[b][a] = wb[b] * wa[a];
            }
        }
        w
    }

    pub fn indices(&self, grid: &ChartGrid) -> [[usize; 4]; 4] {
        let mut idx = [[0; 4]; 4];
        for b in 0..4 {
            for a in 0..4 {
                idx[b][a] = grid.index(self.cols[a], self.rows[b]);
            }
        }
        idx
    }
}

/// Interpolated value of lattice data at chart angles.
pub fn interpolate(grid: &ChartGrid, data: &[Vec3], alpha: f64, beta: f64) -> Vec3 {
    let st = Stencil::locate(grid, alpha, beta);
    let wa = lagrange_value(st.s);
    let wb = lagrange_value(st.t);
    let mut out = Vec3::zeros();
    for b in 0..4 {
        let row = st.rows[b] * grid.n;
        let mut acc = Vec3::zeros();
        for a in 0..4 {
            acc += data[row + st.cols[a]] * wa[a];
        }
        out += acc * wb[b];
    }
    out
}

/// `∂^i_α ∂^j_β` of the bicubic interpolant for `i, j <= 3`, `i + j <= 3`.
pub fn interpolate_jet(grid: &ChartGrid, data: &[Vec3], alpha: f64, beta: f64) -> [[Vec3; 4]; 4] {
    let st = Stencil::locate(grid, alpha, beta);
    let la = lagrange(st.s);
    let lb = lagrange(st.t);
    let (ha, hb) = (grid.d_alpha(), grid.d_beta());
    let mut out = [[Vec3::zeros(); 4]; 4];
    for i in 0..=3 {
        for j in 0..=3 - i {
            let mut acc = Vec3::zeros();
            for b in 0..4 {
                let row = st.rows[b] * grid.n;
                for a in 0..4 {
                    acc += data[row + st.cols[a]] * (la[i][a] * lb[j][b]);
                }
            }
            out[i][j] = acc / (ha.powi(i as i32) * hb.powi(j as i32));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::Chart;

    #[test]
    fn reproduces_cubics_in_beta_and_trig_in_alpha() {
        let grid = ChartGrid::new(Chart::Grid1, 64, 32).unwrap();
        let f = |a: f64, b: f64| Vec3::new(b * b * b - b, a.cos(), 0.0);
        let data: Vec<Vec3> = (0..=grid.m)
            .flat_map(|k| (0..grid.n).map(move |j| (j, k)))
            .map(|(j, k)| f(grid.alpha(j as i64), grid.beta(k)))
            .collect();
        let (a, b) = (0.123, 0.456);
        let v = interpolate(&grid, &data, a, b);
        assert!((v.x - (b * b * b - b)).abs() < 1e-13);
        assert!((v.y - a.cos()).abs() < 1e-5);
        let jet = interpolate_jet(&grid, &data, a, b);
        assert!((jet[0][1].x - (3.0 * b * b - 1.0)).abs() < 1e-12);
        assert!((jet[0][3].x - 6.0).abs() < 1e-9);
        assert!((jet[1][0].y + a.sin()).abs() < 1e-4);
    }
}
