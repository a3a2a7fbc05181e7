mod common;

use nearstokes::geom::QuadraticCoeffs;
use nearstokes::nearcore::{antiderivatives_1d, init_i005, recursion_table, whole_plane_i005, ReducedWindow};
use proptest::prelude::*;

fn window(c: f64, u: (f64, f64), v: (f64, f64)) -> ReducedWindow {
    // d = 1 and unit diagonal make the reduced window equal the physical one.
    let q = QuadraticCoeffs { d: 1.0, a: 1.0, b: c, c: 1.0 };
    ReducedWindow::new(&q, u, v).unwrap()
}

fn check(p: usize, q: usize, k: usize, c: f64, u: (f64, f64), v: (f64, f64), tol: f64) {
    let t = recursion_table(&window(c, u, v));
    let (exact, abs) = common::reduced_integral(p, q, k, c, u, v);
    let err = (t.get(p, q, k) - exact).abs() / exact.abs().max(1e-6 * abs);
    assert!(err < tol, "I_{p}{q}{k} C={c} {u:?}x{v:?}: {} vs {exact}, rel {err:e}", t.get(p, q, k));
}

#[test]
fn f00_matches_the_log_closed_form() {
    let f = antiderivatives_1d(1.0, 0.0, 0.0)[0][0] - antiderivatives_1d(-1.0, 0.0, 0.0)[0][0];
    assert!((f - 1.762_747_174_039_086).abs() < 1e-14);
    let closed = |u: f64, v: f64, c: f64| -(-u - c * v + (1.0 + u * u + 2.0 * c * u * v + v * v).sqrt()).ln();
    for &(a, b, v, c) in &[(-3.0, 2.0, 0.4, 0.3), (0.5, 9.0, -2.0, -0.7), (-40.0, -1.0, 3.0, 0.8)] {
        let ours = antiderivatives_1d(b, v, c)[0][0] - antiderivatives_1d(a, v, c)[0][0];
        let want = closed(b, v, c) - closed(a, v, c);
        assert!((ours - want).abs() < 1e-12 * want.abs().max(1.0), "{ours} vs {want}");
    }
}

#[test]
fn whole_plane_seed_matches_brute_force_disks() {
    // ∫ over growing squares approaches the whole-plane value; the tail decays like R^-9.
    let h = |x: f64, y: f64| (1.0 + x * x + y * y).powf(-5.5);
    let big = common::integrate_2d(&h, (-60.0, 60.0), (-60.0, 60.0), &|_| 0.0, 0.0, 1e-13);
    assert!((big - 0.698_131_700_797_731_8).abs() < 1e-11);
    assert!((whole_plane_i005(0.0) - big).abs() < 1e-11);
}

#[test]
fn seed_on_a_large_square_is_near_the_whole_plane() {
    // Outside the square the integrand is below r^-11, so the gap is at most 2π/(9·10⁹).
    let w = window(0.0, (-10.0, 10.0), (-10.0, 10.0));
    let gap = whole_plane_i005(0.0) - init_i005(&w);
    assert!(gap > 0.0 && gap < 2.0 * std::f64::consts::PI / 9e9, "gap {gap:e}");
    let (exact, _) = common::reduced_integral(0, 0, 5, 0.0, (-10.0, 10.0), (-10.0, 10.0));
    assert!((init_i005(&w) - exact).abs() < 1e-12, "{} vs {exact}", init_i005(&w));
}

#[test]
fn seed_with_cross_term_matches_quadrature() {
    let w = window(0.5, (-2.0, 2.0), (-2.0, 2.0));
    let (exact, _) = common::reduced_integral(0, 0, 5, 0.5, (-2.0, 2.0), (-2.0, 2.0));
    assert!((init_i005(&w) - exact).abs() < 1e-10 * exact);
}

#[test]
fn selected_entries_match_quadrature() {
    check(2, 0, 1, 0.0, (-5.0, 5.0), (-5.0, 5.0), 1e-9);
    check(3, 2, 4, 0.3, (-4.0, 6.0), (-5.0, 5.0), 1e-9);
    check(0, 0, 0, -0.6, (-30.0, 12.0), (-3.0, 25.0), 1e-9);
    check(0, 12, 2, 0.2, (0.5, 7.0), (-8.0, 1.0), 1e-9);
    check(12, 0, 5, -0.8, (-1.0, 3.0), (-20.0, 20.0), 1e-9);
}

#[test]
fn antiderivative_differences_match_1d_quadrature() {
    let cases = [(3usize, 2usize, 0.4, -0.3, (-2.0, 5.0)), (7, 0, 1.5, 0.7, (-6.0, 1.0)), (0, 5, -0.2, 0.0, (0.1, 30.0))];
    for (p, k, v, c, (a, b)) in cases {
        let ours = antiderivatives_1d(b, v, c)[p][k] - antiderivatives_1d(a, v, c)[p][k];
        let mut g = |u: f64| u.powi(p as i32) * (1.0 + u * u + 2.0 * c * u * v + v * v).powf(-((2 * k + 1) as f64) / 2.0);
        let want = common::integrate(&mut g, &common::peak_breaks(a, b, -c * v), 1e-14);
        assert!((ours - want).abs() < 1e-11 * want.abs(), "F_{p}{k}: {ours} vs {want}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn table_matches_quadrature_for_random_windows(
        p in 0usize..=6, q in 0usize..=6, k in 0usize..=5,
        c in -0.8f64..0.8,
        u0 in -12.0f64..1.0, du in 0.5f64..14.0,
        v0 in -12.0f64..1.0, dv in 0.5f64..14.0,
    ) {
        check(p, q, k, c, (u0, u0 + du), (v0, v0 + dv), 1e-8);
    }
}
