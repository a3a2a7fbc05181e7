//! Observed orders of the plain and end-corrected rectangle rules on `exp(α + β)`.

use nearstokes::trapz::{trap_rect, RectLattice, RuleOrder};

fn main() -> nearstokes::Result<()> {
    let exact = (1f64.exp() - 1.0).powi(2);
    for order in [RuleOrder::Second, RuleOrder::Fourth, RuleOrder::Sixth] {
        let mut prev: Option<f64> = None;
        println!("{order:?}");
        for n in [4usize, 8, 16, 32, 64] {
            let lat = RectLattice::over((0.0, 1.0), (0.0, 1.0), n, n);
            let d = |_: usize, _: usize, a: f64, b: f64| (a + b).exp();
            let err = (trap_rect(&lat, |i, j| (lat.alpha(i) + lat.beta(j)).exp(), Some(&d), order, None)? - exact).abs();
            match prev {
                Some(p) => println!("  n = {n:>3}  error {err:.3e}  order {:.2}", (p / err).log2()),
                None => println!("  n = {n:>3}  error {err:.3e}"),
            }
            prev = Some(err);
        }
    }
    Ok(())
}
