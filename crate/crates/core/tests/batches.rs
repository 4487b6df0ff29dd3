use binpick::metrics::{aggregate_logs, TimeMode};
use binpick::model::Termination;
use binpick::{
    run_experiment_with_jobs, EnvConfig, EnvironmentKind, ExperimentConfig, PolicyConfig,
    PolicyKind,
};

fn config(kind: EnvironmentKind, policy: PolicyKind, n_trials: u64) -> ExperimentConfig {
    let mut c = ExperimentConfig::new(
        EnvConfig {
            kind,
            ..Default::default()
        },
        PolicyConfig::new(policy),
    );
    c.n_trials = n_trials;
    c
}

#[test]
fn probabilistic_reliability_matches_sampling_range() {
    for policy in [PolicyKind::Markov, PolicyKind::Swap] {
        let logs = run_experiment_with_jobs(
            &config(
                EnvironmentKind::Probabilistic { lo: 0.85, hi: 0.95 },
                policy,
                500,
            ),
            4,
        )
        .unwrap();
        let report = aggregate_logs(&logs, TimeMode::Simulated).unwrap();
        let rel = report.reliability().unwrap();
        let se = (0.9 * 0.1 / report.attempts as f64).sqrt();
        assert!(
            (rel - 0.9).abs() <= 3.0 * se,
            "{policy}: reliability {rel}, se {se}"
        );
        assert!((0.85..=0.95).contains(&rel));
    }
}

#[test]
fn every_log_respects_basic_bounds() {
    for kind in [
        EnvironmentKind::TypeFailuresOnly,
        EnvironmentKind::PlacementFailuresOnly,
        EnvironmentKind::BothFailureTypes,
    ] {
        for policy in PolicyKind::ALL {
            let c = config(kind, policy, 60);
            for log in run_experiment_with_jobs(&c, 2).unwrap() {
                assert_eq!(log.n_objects, c.env.n_objects);
                assert!(log.successes() <= log.n_objects);
                match log.termination {
                    Termination::AllPicked => assert_eq!(log.successes(), log.n_objects),
                    Termination::ConsecutiveFailureLimit => {
                        let tail = log
                            .records
                            .iter()
                            .rev()
                            .take_while(|r| r.reward == 0)
                            .count();
                        assert_eq!(tail, 20);
                    }
                    Termination::NoGraspAvailable => assert!(log.successes() < log.n_objects),
                }
            }
        }
    }
}

#[test]
fn results_do_not_depend_on_worker_count() {
    let c = config(EnvironmentKind::BothFailureTypes, PolicyKind::Swap, 80);
    let one = run_experiment_with_jobs(&c, 1).unwrap();
    for jobs in [2, 3, 8] {
        assert_eq!(run_experiment_with_jobs(&c, jobs).unwrap(), one);
    }
}

#[test]
fn mpph_is_reliability_times_attempt_rate() {
    let logs = run_experiment_with_jobs(
        &config(EnvironmentKind::BothFailureTypes, PolicyKind::Circle, 50),
        2,
    )
    .unwrap();
    for log in logs.iter().filter(|l| !l.records.is_empty()) {
        let stats = binpick::trial_stats(log, TimeMode::Simulated);
        let expected = 3600.0 / 12.0 * (stats.r as f64 / stats.attempts as f64);
        assert!((stats.picks_per_hour().unwrap() - expected).abs() < 1e-9);
    }
}
