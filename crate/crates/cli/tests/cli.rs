use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use binpick::records::{parse_log, SUMMARY_COLUMNS};
use binpick_cli::{
    cmd_metrics, cmd_run, cmd_sweep, load_config, Overrides, LOG_FILE, MANIFEST_FILE, SUMMARY_FILE,
};

fn binpick(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_binpick"))
        .args(args)
        .current_dir(dir)
        .output()
        .unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn run_writes_one_row_per_policy_and_metrics_reproduces_it() {
    let tmp = tempfile::tempdir().unwrap();
    let out = binpick(&["run", "--trials", "30", "--out", "r"], tmp.path());
    assert!(out.status.success(), "{}", stderr(&out));
    let table = String::from_utf8(out.stdout).unwrap();
    for p in ["markov", "cluster", "circle", "swap"] {
        assert!(table.contains(p));
    }
    let summary = fs::read_to_string(tmp.path().join("r").join(SUMMARY_FILE)).unwrap();
    assert_eq!(summary.lines().count(), 5);
    assert_eq!(summary.lines().next().unwrap(), SUMMARY_COLUMNS.join(","));

    let again = binpick(&["metrics", "r/trials.jsonl"], tmp.path());
    assert!(again.status.success(), "{}", stderr(&again));
    assert_eq!(String::from_utf8(again.stdout).unwrap(), summary);

    let written = binpick(&["metrics", "r/trials.jsonl", "--out", "m"], tmp.path());
    assert!(written.status.success());
    assert_eq!(
        fs::read_to_string(tmp.path().join("m").join(SUMMARY_FILE)).unwrap(),
        summary
    );
}

#[test]
fn cache_policy_is_rejected_with_the_cluster_explanation() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(tmp.path().join("c.toml"), "[policy]\nkinds = [\"cache\"]\n").unwrap();
    let out = binpick(&["run", "--config", "c.toml", "--out", "r"], tmp.path());
    assert!(!out.status.success());
    let err = stderr(&out);
    assert!(
        err.contains("policy.kinds") && err.contains("cluster"),
        "{err}"
    );
    assert!(!tmp.path().join("r").exists());
}

#[test]
fn unknown_and_invalid_keys_fail_with_the_key_named() {
    let tmp = tempfile::tempdir().unwrap();
    for (text, key) in [
        ("[environment]\nobjects = 3\n", "objects"),
        (
            "[environment]\nplacement_block_fraction = 0.0\n",
            "environment.placement_block_fraction",
        ),
        ("[time]\nt_plan_s = -1.0\n", "time"),
    ] {
        fs::write(tmp.path().join("c.toml"), text).unwrap();
        let out = binpick(&["run", "--config", "c.toml", "--out", "r"], tmp.path());
        assert!(!out.status.success());
        assert!(stderr(&out).contains(key), "{text:?}: {}", stderr(&out));
    }
}

#[test]
fn metrics_rejects_empty_and_corrupt_logs() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(tmp.path().join("empty.jsonl"), "").unwrap();
    let out = binpick(&["metrics", "empty.jsonl"], tmp.path());
    assert!(!out.status.success());
    assert!(stderr(&out).contains("empty"), "{}", stderr(&out));

    let run = binpick(&["run", "--trials", "4", "--out", "r"], tmp.path());
    assert!(run.status.success());
    let mut lines: Vec<String> = fs::read_to_string(tmp.path().join("r").join(LOG_FILE))
        .unwrap()
        .lines()
        .map(String::from)
        .collect();
    lines[5].truncate(20);
    fs::write(tmp.path().join("bad.jsonl"), lines.join("\n")).unwrap();
    let out = binpick(&["metrics", "bad.jsonl"], tmp.path());
    assert!(!out.status.success());
    assert!(stderr(&out).contains("line 6"), "{}", stderr(&out));

    let missing = binpick(&["metrics", "nope.jsonl"], tmp.path());
    assert!(!missing.status.success());
}

#[test]
fn seed_and_trial_overrides_land_in_the_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    let out = binpick(
        &["run", "--trials", "3", "--seed", "99", "--out", "r"],
        tmp.path(),
    );
    assert!(out.status.success());
    let manifest = fs::read_to_string(tmp.path().join("r").join(MANIFEST_FILE)).unwrap();
    let m = binpick::RunManifest::from_toml(&manifest).unwrap();
    assert_eq!(m.master_seed, 99);
    assert_eq!(m.config.experiment.n_trials, 3);
    let log = parse_log(&fs::read_to_string(tmp.path().join("r").join(LOG_FILE)).unwrap()).unwrap();
    assert_eq!(log.manifests, vec![m]);
    assert_eq!(log.trials.len(), 12);
}

#[test]
fn concatenated_logs_pool_posp() {
    let tmp = tempfile::tempdir().unwrap();
    let mut logs = String::new();
    let mut picked = 0.0;
    let mut objects = 0.0;
    for (seed, trials) in [(1, 20), (2, 35)] {
        let mut config = load_config(
            None,
            Overrides {
                seed: Some(seed),
                trials: Some(trials),
            },
        )
        .unwrap();
        config.environment.kind = "placement_failures_only".into();
        config.policy.kinds = vec!["cluster".into()];
        let out = cmd_run(&config, &tmp.path().join(format!("s{seed}")), 2).unwrap();
        let posp = out.rows[0].report.posp.unwrap();
        picked += posp * (trials as f64 * 12.0);
        objects += trials as f64 * 12.0;
        logs.push_str(
            &fs::read_to_string(tmp.path().join(format!("s{seed}")).join(LOG_FILE)).unwrap(),
        );
    }
    let path = tmp.path().join("both.jsonl");
    fs::write(&path, logs).unwrap();
    let rows = cmd_metrics(&path, None).unwrap();
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0].report.n_trials, 55);
    assert!((rows[0].report.posp.unwrap() - picked / objects).abs() < 1e-12);
}

#[test]
fn sweep_reports_one_row_per_radius_and_a_negative_sfr_trend() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(
        tmp.path().join("p.toml"),
        "[environment]\nkind = \"placement_failures_only\"\n",
    )
    .unwrap();
    let out = binpick(
        &[
            "sweep", "--config", "p.toml", "--trials", "100", "--out", "sw",
        ],
        tmp.path(),
    );
    assert!(out.status.success(), "{}", stderr(&out));
    let text = String::from_utf8(out.stdout).unwrap();
    let trend = text.lines().last().unwrap();
    assert!(
        trend.starts_with("trend: spearman(radius, SFR) = -"),
        "{trend}"
    );
    let csv = fs::read_to_string(tmp.path().join("sw").join("sweep_summary.csv")).unwrap();
    let radii: Vec<&str> = csv
        .lines()
        .skip(1)
        .map(|l| l.split(',').next().unwrap())
        .collect();
    assert_eq!(radii, ["0.005", "0.015", "0.03", "0.045"]);
}

#[test]
fn single_value_sweep_matches_a_run_with_that_radius() {
    let tmp = tempfile::tempdir().unwrap();
    let mut config = load_config(
        None,
        Overrides {
            seed: None,
            trials: Some(25),
        },
    )
    .unwrap();
    config.environment.kind = "both_failure_types".into();
    let sweep = cmd_sweep(
        &config,
        "circle_radius",
        &[0.03],
        binpick::PolicyKind::Circle,
        &tmp.path().join("sw"),
        1,
    )
    .unwrap();
    config.policy.kinds = vec!["circle".into()];
    config.policy.circle_radius = 0.03;
    config.policy.swap_min_radius = None;
    config.policy.swap_search_radius = None;
    let run = cmd_run(&config, &tmp.path().join("run"), 1).unwrap();
    assert_eq!(sweep.points.len(), 1);
    assert_eq!(sweep.points[0].row, run.rows[0]);
    assert!(cmd_sweep(
        &config,
        "n_objects",
        &[1.0],
        binpick::PolicyKind::Circle,
        tmp.path(),
        1
    )
    .is_err());
}
