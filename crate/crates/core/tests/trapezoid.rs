mod common;

use std::f64::consts::PI;

use nearstokes::geom::{Chart, StandardEllipsoid};
use nearstokes::trapz::{trap_closed_surface, trap_rect, RectLattice, RuleOrder};
use proptest::prelude::*;

fn exp_rule(n: usize, order: RuleOrder) -> f64 {
    let lat = RectLattice::over((0.0, 1.0), (0.0, 1.0), n, n);
    let d = |_: usize, _: usize, a: f64, b: f64| (a + b).exp();
    trap_rect(&lat, |i, j| (lat.alpha(i) + lat.beta(j)).exp(), Some(&d), order, None).unwrap()
}

#[test]
fn orders_on_an_exponential() {
    let exact = (1f64.exp() - 1.0).powi(2);
    for (order, p) in [(RuleOrder::Second, 2.0), (RuleOrder::Fourth, 4.0), (RuleOrder::Sixth, 6.0)] {
        let e: Vec<f64> = [8, 16, 32].iter().map(|&n| (exp_rule(n, order) - exact).abs()).collect();
        for w in e.windows(2) {
            let obs = (w[0] / w[1]).log2();
            assert!((obs - p).abs() < 0.3, "order {p}: observed {obs} from {e:?}");
        }
    }
}

fn poly(ca: [f64; 6], cb: [f64; 6]) -> (impl Fn(f64, f64) -> f64, impl Fn(usize, usize, f64, f64) -> f64) {
    fn d(c: &[f64; 6], i: usize, x: f64) -> f64 {
        (i..6)
            .map(|p| {
                let fall: f64 = (0..i).map(|t| (p - t) as f64).product();
                c[p] * fall * x.powi((p - i) as i32)
            })
            .sum()
    }
    (move |a, b| d(&ca, 0, a) * d(&cb, 0, b), move |i, j, a, b| d(&ca, i, a) * d(&cb, j, b))
}

proptest! {
    #[test]
    fn sixth_order_is_exact_on_quintics(
        ca in proptest::array::uniform6(-1.0f64..1.0),
        cb in proptest::array::uniform6(-1.0f64..1.0),
        a0 in -1.0f64..0.0, b0 in -1.0f64..0.0, n in 2usize..9, m in 2usize..9,
    ) {
        let lat = RectLattice::over((a0, a0 + 1.3), (b0, b0 + 0.8), n, m);
        let (f, d) = poly(ca, cb);
        let v = trap_rect(&lat, |i, j| f(lat.alpha(i), lat.beta(j)), Some(&d), RuleOrder::Sixth, None).unwrap();
        let int = |c: &[f64; 6], x0: f64, x1: f64| (0..6).map(|p| c[p] * (x1.powi(p as i32 + 1) - x0.powi(p as i32 + 1)) / (p + 1) as f64).sum::<f64>();
        let exact = int(&ca, a0, a0 + 1.3) * int(&cb, b0, b0 + 0.8);
        prop_assert!((v - exact).abs() < 1e-13, "{} vs {}", v, exact);
    }

    #[test]
    fn puncture_removes_one_weighted_node(i in 0usize..=6, j in 0usize..=5) {
        let lat = RectLattice::over((0.0, 1.0), (-0.5, 0.5), 6, 5);
        let f = |i: usize, j: usize| (lat.alpha(i) * 1.3 + lat.beta(j)).sin() + 2.0;
        let d = |p: usize, q: usize, a: f64, b: f64| {
            let s = [(1.3 * a + b).sin(), (1.3 * a + b).cos(), -(1.3 * a + b).sin(), -(1.3 * a + b).cos()];
            s[(p + q) % 4] * 1.3f64.powi(p as i32) + if p + q == 0 { 2.0 } else { 0.0 }
        };
        let full = trap_rect(&lat, f, Some(&d), RuleOrder::Fourth, None).unwrap();
        let punct = trap_rect(&lat, f, Some(&d), RuleOrder::Fourth, Some((i, j))).unwrap();
        let w = if i == 0 || i == 6 { 0.5 } else { 1.0 } * if j == 0 || j == 5 { 0.5 } else { 1.0 };
        let removed = w * f(i, j) * lat.d_alpha * lat.d_beta;
        prop_assert!((full - punct - removed).abs() <= 8.0 * f64::EPSILON * full.abs());
    }
}

fn area(e: &StandardEllipsoid, chart: Chart, n: usize, m: usize, g: impl Fn(&nearstokes::Vec3) -> f64) -> f64 {
    let da = 2.0 * PI / n as f64;
    let db = PI / m as f64;
    let j1 = e.pole_jacobian_rate(chart);
    let [s, nn] = e.poles(chart);
    let slopes = [n as f64 * j1 * g(&s), -(n as f64) * j1 * g(&nn)];
    trap_closed_surface(
        n,
        m,
        |j, k| {
            let (a, b) = (-PI + j as f64 * da, -PI / 2.0 + k as f64 * db);
            e.surface_element(chart, a, b).1 * g(&e.point(chart, a, b))
        },
        slopes,
        None,
    )
}

#[test]
fn sphere_area_converges_at_fourth_order() {
    let s = StandardEllipsoid::sphere(1.0);
    let e1 = (area(&s, Chart::Grid1, 20, 10, |_| 1.0) - 4.0 * PI).abs();
    let e2 = (area(&s, Chart::Grid1, 40, 20, |_| 1.0) - 4.0 * PI).abs();
    let ratio = e1 / e2;
    assert!(ratio > 8.0 && ratio < 24.0, "ratio {ratio}: {e1:e} {e2:e}");
    let x2 = area(&s, Chart::Grid2, 160, 160, |x| x.x * x.x);
    assert!((x2 - 4.0 * PI / 3.0).abs() < 1e-6);
}

#[test]
fn ellipsoid_area_matches_adaptive_quadrature() {
    let e = StandardEllipsoid::new(3.0, 2.0, 1.0).unwrap();
    let exact = common::chart_integral(&|a, b| e.surface_element(Chart::Grid1, a, b).1, 1e-14);
    for chart in [Chart::Grid1, Chart::Grid2] {
        let v = area(&e, chart, 160, 160, |_| 1.0);
        assert!((v - exact).abs() < 1e-8 * exact, "{chart:?}: {v} vs {exact}");
    }
}
