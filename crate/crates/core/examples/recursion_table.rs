//! Window integrals `I_pqk` from the recursion, next to brute-force quadrature.

use nearstokes::gauss::adaptive_gl;
use nearstokes::geom::QuadraticCoeffs;
use nearstokes::nearcore::{recursion_table, ReducedWindow};

fn main() -> nearstokes::Result<()> {
    let c = 0.4;
    let (u, v) = ((-3.0, 5.0), (-2.0, 1.5));
    let w = ReducedWindow::new(&QuadraticCoeffs { d: 1.0, a: 1.0, b: c, c: 1.0 }, u, v)?;
    let t = recursion_table(&w);
    println!("C = {c}, window [{}, {}] x [{}, {}]", u.0, u.1, v.0, v.1);
    println!("{:>3} {:>3} {:>3} {:>22} {:>10}", "p", "q", "k", "I_pqk", "rel. diff");
    for (p, q, k) in [(0, 0, 0), (1, 0, 0), (0, 0, 2), (2, 1, 1), (3, 3, 3), (6, 2, 4), (4, 8, 5), (12, 0, 5)] {
        let brute = adaptive_gl(
            |y| {
                adaptive_gl(
                    |x| x.powi(p) * y.powi(q) * (1.0 + x * x + 2.0 * c * x * y + y * y).powf(-((2 * k + 1) as f64) / 2.0),
                    u.0,
                    u.1,
                    1e-15,
                )
            },
            v.0,
            v.1,
            1e-14,
        );
        let ours = t.get(p as usize, q as usize, k);
        println!("{p:>3} {q:>3} {k:>3} {ours:>22.15e} {:>10.1e}", ((ours - brute) / brute).abs());
    }
    Ok(())
}
