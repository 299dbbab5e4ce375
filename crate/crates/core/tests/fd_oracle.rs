mod support;

use num_complex::Complex64 as C;
use support::fd::{extrapolated, Grid};

#[test]
fn free_box_matches_discrete_sine_levels() {
    let (l, points) = (1.0, 199);
    let grid = Grid::new(|_| C::new(0.0, 0.0), l, 1.0, points);
    let h = 2.0 * l / (points + 1) as f64;
    for j in 1..=4 {
        let exact = 4.0 / (h * h) * (j as f64 * std::f64::consts::PI / (2.0 * (points + 1) as f64)).sin().powi(2);
        let got = grid.eigenvalue_near(C::new(exact * 1.05, 0.0)).unwrap();
        assert!((got.re - exact).abs() <= 1e-10 * exact && got.im.abs() <= 1e-10 * exact, "j={j}: {got} vs {exact}");
    }
}

#[test]
fn harmonic_well_converges_to_odd_integers() {
    for j in 1..=4 {
        let exact = (2 * j - 1) as f64;
        let got = extrapolated(|x| C::new(x * x, 0.0), 8.0, 1.0, 2001, C::new(exact + 0.3, 0.0)).unwrap();
        assert!((got - exact).norm() <= 1e-7 * exact, "j={j}: {got}");
    }
}

#[test]
fn complex_potential_levels_pair_up_with_conjugates() {
    // a complex symmetric operator with PT symmetry keeps real levels real
    let v = |x: f64| C::new(0.0, x * x * x);
    let e = Grid::new(v, 6.0, 1.0, 1201).eigenvalue_near(C::new(1.1, 0.0)).unwrap();
    assert!(e.im.abs() <= 1e-9, "{e}");
}
