use ptspectra::report::{csv, render_figure, run, write_outputs, Figure, ResultBundle, RunConfig, Source};
use ptspectra::Error;

fn config(text: &str) -> RunConfig {
    RunConfig::from_json(text).unwrap()
}

#[test]
fn minimal_run_yields_a_spectrum() {
    let b = run(&config(r#"{"model": {"n": [1], "g": 1, "L": [1]}, "tasks": ["spectrum"]}"#)).unwrap();
    assert!(b.failures.is_empty(), "{:?}", b.failures);
    assert!(b.spectrum_records(Source::Shooting).count() >= 10);
    assert!(b.records.iter().all(|r| r.residual.is_finite()));
}

#[test]
fn repeated_runs_give_identical_tables() {
    let c = config(r#"{"model": {"n": [0, 1], "g": 1, "L": [1, 2]}, "tasks": ["spectrum", "linear_exact", "scaling_graph"]}"#);
    let (a, b) = (run(&c).unwrap(), run(&c).unwrap());
    assert_eq!(a.config_digest, b.config_digest);
    assert_eq!(csv::spectrum_csv(&a.records), csv::spectrum_csv(&b.records));
    assert_eq!(csv::scaling_csv(&a.branches), csv::scaling_csv(&b.branches));

    let (da, db) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let (fa, fb) = (write_outputs(&a, da.path()).unwrap(), write_outputs(&b, db.path()).unwrap());
    for (x, y) in fa.iter().zip(&fb).filter(|(x, _)| x.extension().is_some_and(|e| e == "csv")) {
        assert_eq!(std::fs::read(x).unwrap(), std::fs::read(y).unwrap(), "{}", x.display());
    }
}

#[test]
fn descending_l_grid_is_rejected_with_its_pointer() {
    let err = RunConfig::from_json(r#"{"model": {"n": [1], "g": 1, "L": [2, 1]}, "tasks": ["spectrum"]}"#).unwrap_err();
    match err {
        Error::ConfigInvalid { pointer, .. } => assert!(pointer.starts_with("/model/L"), "{pointer}"),
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn scaling_figure_draws_branch_and_conjugate_per_n() {
    let b = run(&config(r#"{"model": {"n": [0, 1, 2, 3, 4, 5], "g": 1, "L": [1]}, "tasks": ["scaling_graph"]}"#)).unwrap();
    let svg = render_figure(&b, Figure::Fig3a).unwrap();
    assert_eq!(svg.matches(r#"class="curve""#).count(), 12);
    assert_eq!(svg, render_figure(&b, Figure::Fig3a).unwrap());
    assert!(matches!(render_figure(&b, Figure::Fig1a), Err(Error::MissingTaskOutput(_))));
}

#[test]
fn box_figure_carries_empty_box_asymptotes() {
    let b = run(&config(r#"{"model": {"n": [1], "g": 1, "L": [0.3, 0.5, 1]}, "tasks": ["branches"], "count": 4}"#)).unwrap();
    assert!(b.failures.is_empty(), "{:?}", b.failures);
    let svg = render_figure(&b, Figure::Fig1b).unwrap();
    assert!(svg.matches(r#"class="reference""#).count() >= 1);
    for j in 1..=4 {
        assert!(svg.contains(&format!("pi^2 j^2/4, j={j}")), "missing j={j}");
    }
}

#[test]
fn bundle_survives_a_json_round_trip() {
    let b = run(&config(
        r#"{"model": {"n": [0, 1], "g": 1.3, "L": [1.7]}, "tasks": ["spectrum", "scaling_graph", "secular_scan"], "count": 6}"#,
    ))
    .unwrap();
    let back = ResultBundle::from_json(&b.to_json()).unwrap();
    assert_eq!(back, b);
}
