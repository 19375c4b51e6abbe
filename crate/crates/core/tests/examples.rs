use kgcensus::Method;

mod resolve_edits {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/resolve_edits.rs"));
}
mod estimate_fixture {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/estimate_fixture.rs"));
}
mod uniform_recovery {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/uniform_recovery.rs"));
}
mod burst_sensitivity {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/burst_sensitivity.rs"));
}
mod error_metric {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/error_metric.rs"));
}
mod convergence_ranking {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/convergence_ranking.rs"));
}
mod composite_class {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/composite_class.rs"));
}

#[test]
fn resolve_edits_example() {
    let mentions = resolve_edits::run_example().unwrap();
    // The population figure is a literal, so the last edit only mentions its subject.
    assert_eq!(mentions.len(), 7);
    assert!(mentions.contains(&("Q90".into(), "Q486972".into())));
}

#[test]
fn estimate_fixture_example() {
    let e = estimate_fixture::run_example().unwrap();
    let expected = [
        (Method::Jack1, 4.0),
        (Method::Jack2, 4.0),
        (Method::N1Unif, 6.0),
        (Method::Sor, 6.0),
        (Method::Chao92, 6.0),
    ];
    for (m, v) in expected {
        assert_eq!(e[&m], Some(v), "{m}");
    }
}

#[test]
fn uniform_recovery_example() {
    let (d, n1, chao) = uniform_recovery::run_example().unwrap();
    assert!(d >= 995);
    assert!((n1 - 1000.0).abs() < 50.0 && (chao - 1000.0).abs() < 50.0);
}

#[test]
fn burst_sensitivity_example() {
    let jumps = burst_sensitivity::run_example().unwrap();
    assert!(jumps[&Method::Chao92] > jumps[&Method::Jack1]);
}

#[test]
fn error_metric_example() {
    let phi = error_metric::run_example().unwrap();
    assert!(phi["JACK1"] < phi["DISTINCT"]);
    assert!(phi["SOR"] < phi["DISTINCT"]);
}

#[test]
fn convergence_ranking_example() {
    let ranking = convergence_ranking::run_example().unwrap();
    assert_eq!(ranking.complete.len(), 1);
    assert_eq!(ranking.complete[0].class, "Saturated");
    assert_eq!(ranking.incomplete[0].class, "Growing");
}

#[test]
fn composite_class_example() {
    let entities = composite_class::run_example().unwrap();
    assert_eq!(entities, ["Q456".to_owned(), "Q90".to_owned()].into());
}
