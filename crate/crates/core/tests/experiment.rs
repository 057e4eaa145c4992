use ximsis_core::experiment::aggregate;
use ximsis_core::{
    default_model_sizes, simgen, Experiment, ExperimentSpec, NeighborRule, ReportRow, SimScenario,
    Variant,
};

fn spec(reps: usize, workers: usize) -> ExperimentSpec {
    let mut spec = ExperimentSpec::new(SimScenario::aft_example(80, 60, 0.3, 5));
    spec.n_reps = reps;
    spec.workers = workers;
    spec
}

#[test]
fn calibrated_censoring_hits_targets() {
    let scenarios = [
        SimScenario::cox_example(200, 10, 0.3, 1),
        SimScenario::transformation_example(200, 12, 0.2, 2),
        SimScenario::aft_example(200, 10, 0.5, 3),
        SimScenario::nonlinear_example(200, 10, 0.4, 4),
    ];
    for sc in scenarios {
        let c = simgen::scenario_censoring_bound(&sc).unwrap();
        let mean = (0..200)
            .map(|r| {
                simgen::generate_replication(&sc, c, r)
                    .unwrap()
                    .resp
                    .censoring_rate()
            })
            .sum::<f64>()
            / 200.0;
        assert!(
            (mean - sc.target_cr).abs() < 0.02,
            "{}: {mean}",
            sc.model.name()
        );
    }
}

#[test]
fn report_ignores_worker_count() {
    let exp1 = Experiment::with_censoring_bound(spec(6, 1), 5.0).unwrap();
    let exp3 = Experiment::with_censoring_bound(spec(6, 3), 5.0).unwrap();
    let (a, b) = (exp1.run().unwrap(), exp3.run().unwrap());
    let strip = |rows: &[ximsis_core::ReportRow]| {
        rows.iter()
            .map(|r| {
                (
                    r.variant.clone(),
                    r.d,
                    r.s_quantiles,
                    r.p_j.clone(),
                    r.p_a,
                    r.realized_cr,
                )
            })
            .collect::<Vec<_>>()
    };
    assert_eq!(strip(&a.rows), strip(&b.rows));
    let records = |r: &ximsis_core::ExperimentReport| {
        r.replications
            .iter()
            .map(|o| o.records.clone())
            .collect::<Vec<_>>()
    };
    assert_eq!(records(&a), records(&b));
}

#[test]
fn aggregation_round_trips_through_saved_records() {
    let exp = Experiment::with_censoring_bound(spec(5, 1), 5.0).unwrap();
    let report = exp.run().unwrap();
    let json = serde_json::to_string(&report.replications).unwrap();
    let saved: Vec<ximsis_core::ReplicationOutcome> = serde_json::from_str(&json).unwrap();
    assert_eq!(aggregate(exp.spec(), &saved).unwrap(), report.rows);
    // Execution order does not matter either.
    let mut reversed = saved.clone();
    reversed.reverse();
    let rows = aggregate(exp.spec(), &reversed).unwrap();
    for (x, y) in rows.iter().zip(&report.rows) {
        assert_eq!(
            (x.s_quantiles, &x.p_j, x.p_a),
            (y.s_quantiles, &y.p_j, y.p_a)
        );
    }
}

#[test]
fn replications_use_distinct_draws() {
    let sc = SimScenario::cox_example(50, 20, 0.3, 3);
    let a = simgen::generate_replication(&sc, 4.0, 0).unwrap();
    let b = simgen::generate_replication(&sc, 4.0, 1).unwrap();
    assert_ne!(a.x, b.x);
}

fn d1_row(scenario: SimScenario, variant: &str, rule: NeighborRule) -> ReportRow {
    let n = scenario.n;
    let mut spec = ExperimentSpec::new(scenario);
    spec.variants = vec![Variant::new(variant, rule)];
    let d1 = default_model_sizes(n).unwrap().0;
    spec.model_sizes = vec![d1];
    let report = Experiment::prepare(spec).unwrap().run().unwrap();
    report.row(variant, d1).unwrap().clone()
}

#[test]
fn cox_example_middle_variant_coverage() {
    let row = d1_row(
        SimScenario::cox_example(200, 2000, 0.3, 1),
        "XIM-SIS2",
        NeighborRule::SqrtOffset(0),
    );
    assert_eq!(row.m, 14);
    assert!((row.p_a - 0.986).abs() <= 0.03, "p_a = {}", row.p_a);
}

#[test]
fn nonlinear_example_light_censoring_median_size() {
    let row = d1_row(
        SimScenario::nonlinear_example(300, 2000, 0.2, 1),
        "XIM-SIS1",
        NeighborRule::SqrtOffset(-1),
    );
    assert_eq!(row.median_s(), 3.0);
}
