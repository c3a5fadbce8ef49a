use smdpen_core::benchmarks::{run_experiment, ExperimentKind, Overrides};
use smdpen_core::Error;

#[test]
fn penalty_column_never_decreases() {
    for kind in ExperimentKind::ALL {
        let out = run_experiment(kind, &Overrides::default()).unwrap();
        assert!(out.failure.is_none(), "{kind}: {:?}", out.failure);
        assert!(!out.runs.is_empty());
        for r in &out.runs {
            let p: Vec<f64> = r.penalty_column().collect();
            assert!(p.windows(2).all(|w| w[0] <= w[1]), "{kind}/{}", r.name);
            assert!(r.events.iter().all(|e| e.p_after >= e.p_before));
        }
    }
}

#[test]
fn row_count_follows_the_budget() {
    let ov = Overrides {
        iterations: Some(250),
        record_every: Some(10),
        ..Default::default()
    };
    let out = run_experiment(ExperimentKind::Trajectories, &ov).unwrap();
    for r in &out.runs {
        assert_eq!(r.rows.len(), 26, "{}", r.name);
        assert_eq!(r.rows.last().unwrap().k, 250);
    }
    let none = Overrides {
        iterations: Some(0),
        ..Default::default()
    };
    let out = run_experiment(ExperimentKind::PenaltyDemo1d, &none).unwrap();
    assert_eq!(out.runs[0].rows.len(), 1);
}

#[test]
fn reruns_are_bitwise_identical() {
    for kind in [
        ExperimentKind::PenaltyDemo1d,
        ExperimentKind::BetaVsL1,
        ExperimentKind::Trajectories,
    ] {
        let a = run_experiment(kind, &Overrides::default()).unwrap();
        let b = run_experiment(kind, &Overrides::default()).unwrap();
        for (ra, rb) in a.runs.iter().zip(&b.runs) {
            assert_eq!(ra.trace_csv(), rb.trace_csv());
            assert_eq!(ra.events, rb.events);
        }
        assert_eq!(a.metrics, b.metrics);
    }
}

#[test]
fn seed_override_changes_noisy_runs() {
    let a = run_experiment(ExperimentKind::Trajectories, &Overrides::default()).unwrap();
    let ov = Overrides {
        seed: Some(99),
        ..Default::default()
    };
    let b = run_experiment(ExperimentKind::Trajectories, &ov).unwrap();
    assert_ne!(a.runs[0].trace_csv(), b.runs[0].trace_csv());
}

#[test]
fn invalid_overrides_are_rejected() {
    let ov = Overrides {
        sigma: Some(-1.0),
        ..Default::default()
    };
    assert!(matches!(
        run_experiment(ExperimentKind::Trajectories, &ov),
        Err(Error::InvalidConfig(_))
    ));
    let ov = Overrides {
        kappa: Some(0.5),
        ..Default::default()
    };
    assert!(run_experiment(ExperimentKind::PenaltyDemo1d, &ov).is_err());
}
