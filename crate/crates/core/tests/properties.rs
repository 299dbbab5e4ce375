use num_complex::Complex64 as C;
use proptest::prelude::*;

use ptspectra::airy::{airy_ai, airy_ai_prime};
use ptspectra::numerics::{action_integral, sqrt_q_continued, ComplexFunctionQ, ComplexPath, ModelParams};
use ptspectra::report::{csv, parse_complex, RunConfig};
use ptspectra::secular::secular_data;
use ptspectra::shooting::shoot_residual;
use ptspectra::stokes::{build_graph, hausdorff, Terminus};

fn cfg(l: &[f64], count: usize, output_dir: &str) -> serde_json::Value {
    serde_json::json!({
        "model": {"n": [1], "g": 1.0, "L": l},
        "tasks": ["spectrum"],
        "count": count,
        "output_dir": output_dir,
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn reversed_path_negates_the_action(
        (er, ei) in (-2.0..2.0f64, -2.0..2.0f64),
        n in 0u32..3,
        pts in prop::collection::vec((-1.5..1.5f64, -1.5..1.5f64), 2..5),
    ) {
        let q = ComplexFunctionQ::new(C::new(er, ei), n);
        let verts: Vec<C> = pts.iter().map(|&(x, y)| C::new(x, y)).collect();
        let roots = q.roots();
        // keep every vertex clear of the turning points
        prop_assume!(verts.iter().all(|v| roots.iter().all(|r| (v - r).norm() > 0.05)));
        let Ok(path) = ComplexPath::new(verts) else { return Ok(()) };
        let Ok(w) = sqrt_q_continued(&path, &q) else { return Ok(()) };
        let back = path.reversed().with_seed(*w.last().unwrap());
        let (Ok(a), Ok(b)) = (action_integral(&path, &q), action_integral(&back, &q)) else { return Ok(()) };
        prop_assert!((a + b).norm() <= 1e-10 * (1.0 + a.norm()), "{a} vs {b}");
    }

    #[test]
    fn airy_solves_its_equation(r in 0.0..10.0f64, t in 0.0..std::f64::consts::TAU) {
        let z = C::from_polar(r, t);
        let h = 1e-3;
        let d = |k: f64| airy_ai_prime(z + k * h).unwrap();
        let second = (-d(2.0) + 8.0 * d(1.0) - 8.0 * d(-1.0) + d(-2.0)) / (12.0 * h);
        let ai = airy_ai(z).unwrap();
        let scale = ai.norm() * (1.0 + z.norm()) + airy_ai_prime(z).unwrap().norm();
        prop_assert!((second - z * ai).norm() <= 1e-8 * scale, "z = {z}");
    }

    #[test]
    fn airy_is_single_valued(r in 0.0..15.0f64, t in -3.0..3.0f64) {
        let a = airy_ai(C::from_polar(r, t)).unwrap();
        let b = airy_ai(C::from_polar(r, t + std::f64::consts::TAU)).unwrap();
        prop_assert!((a - b).norm() <= 1e-12 * (a.norm() + 1e-300), "{a} vs {b}");
    }

    #[test]
    fn secular_integrals_satisfy_the_action_identity(e in 0.02..30.0f64, n in 0u32..3, l in 0.5..4.0f64) {
        let d = secular_data(e, &ModelParams::unit(n, 1.0, l).unwrap()).unwrap();
        let tol = 1e-8 * (1.0 + d.i_t.norm());
        prop_assert!((d.i_t.re - d.i_m.re - 2.0 * d.i_l).abs() <= tol);
        prop_assert!(d.i_t.im.abs() <= tol && d.i_m.im.abs() <= tol);
    }

    #[test]
    fn csv_numbers_round_trip(x in any::<f64>().prop_filter("finite", |x| x.is_finite())) {
        prop_assert_eq!(csv::num(x).parse::<f64>().unwrap(), x);
    }

    #[test]
    fn complex_literals_round_trip(re in -1e6..1e6f64, im in -1e6..1e6f64) {
        let text = format!("{re}{}{}i", if im < 0.0 { "-" } else { "+" }, im.abs());
        prop_assert_eq!(parse_complex(&text).unwrap(), C::new(re, im));
    }

    #[test]
    fn l_grid_must_increase_strictly(l in prop::collection::vec(0.1..10.0f64, 1..6)) {
        let increasing = l.windows(2).all(|w| w[1] > w[0]);
        prop_assert_eq!(RunConfig::from_value(cfg(&l, 12, "out")).is_ok(), increasing);
    }

    #[test]
    fn digest_depends_on_content_only(count in 1usize..60, dir in "[a-z]{1,8}") {
        let a = RunConfig::from_value(cfg(&[1.0, 2.0], count, "out")).unwrap();
        let b = RunConfig::from_value(cfg(&[1.0, 2.0], count, &dir)).unwrap();
        let c = RunConfig::from_value(cfg(&[1.0, 2.0], count % 59 + 1, "out")).unwrap();
        prop_assert_eq!(a.digest(), b.digest());
        prop_assert_ne!(a.digest(), c.digest());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]

    #[test]
    fn stokes_graphs_mirror_under_conjugation(er in 0.1..2.0f64, ei in -1.0..1.0f64, n in 0u32..3) {
        let e = C::new(er, ei);
        let a = build_graph(e, n).unwrap();
        let b = build_graph(e.conj(), n).unwrap();
        prop_assert!(hausdorff(&a.mirrored_points(), &b.polylines()) <= 1e-4);
        prop_assert_eq!(a.lines.len(), 3 * (2 * n as usize + 1));
        // polynomial Q admits no closed trajectory
        prop_assert!(a.lines.iter().all(|l| l.terminus != Terminus::TurningPoint(l.origin)));
        prop_assert!(a.horizontality().unwrap() <= 1e-5);
    }

    #[test]
    fn shooting_residual_is_pt_symmetric(
        er in 0.5..40.0f64,
        ei in -10.0..10.0f64,
        n in 0u32..2,
        l in 0.5..3.0f64,
    ) {
        let p = ModelParams::unit(n, 1.0, l).unwrap();
        let e = C::new(er, ei);
        let a = shoot_residual(e, &p).unwrap();
        let b = shoot_residual(e.conj(), &p).unwrap();
        prop_assert!((a.conj() - b).norm() <= 1e-8 * (1.0 + a.norm()), "{a} vs {b}");
        let real = shoot_residual(C::new(er, 0.0), &p).unwrap();
        prop_assert!(real.im.abs() <= 1e-12 * (1.0 + real.norm()));
    }
}
