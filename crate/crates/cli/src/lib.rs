//! Command implementations behind the `binpick` binary: run, sweep, metrics.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};

use binpick::metrics::{spearman, TimeMode};
use binpick::model::TrialLog;
use binpick::records::{self, summary_csv, trial_stats_csv, RunManifest, SummaryRow};
use binpick::{run_experiment_with_jobs, FileConfig, PolicyKind};

pub const MANIFEST_FILE: &str = "manifest.toml";
pub const LOG_FILE: &str = "trials.jsonl";
pub const SUMMARY_FILE: &str = "summary.csv";
pub const TRIAL_STATS_FILE: &str = "trial_stats.csv";
pub const SWEEP_SUMMARY_FILE: &str = "sweep_summary.csv";

pub const DEFAULT_SWEEP_RADII: [f64; 4] = [0.005, 0.015, 0.030, 0.045];

/// Command-line overrides applied on top of the config file.
#[derive(Debug, Clone, Copy, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub trials: Option<u64>,
}

pub fn load_config(path: Option<&Path>, overrides: Overrides) -> Result<FileConfig> {
    let mut config = match path {
        Some(p) => {
            let text =
                fs::read_to_string(p).with_context(|| format!("reading config {}", p.display()))?;
            FileConfig::from_toml(&text).with_context(|| format!("in config {}", p.display()))?
        }
        None => FileConfig::default(),
    };
    if let Some(seed) = overrides.seed {
        config.experiment.master_seed = seed;
    }
    if let Some(trials) = overrides.trials {
        config.experiment.n_trials = trials;
    }
    Ok(config.resolved()?)
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub manifest: RunManifest,
    pub trials: Vec<TrialLog>,
    pub rows: Vec<SummaryRow>,
}

/// Runs every configured policy and returns logs and summary rows without
/// touching the filesystem.
pub fn execute(config: &FileConfig, jobs: usize) -> Result<RunOutput> {
    let config = config.resolved()?;
    let mode = config.time_mode()?;
    let mut trials = Vec::new();
    for experiment in config.experiments()? {
        trials.extend(run_experiment_with_jobs(&experiment, jobs)?);
    }
    let rows = records::summarize(&trials, mode)?;
    Ok(RunOutput {
        manifest: RunManifest::new(config),
        trials,
        rows,
    })
}

pub fn write_outputs(output: &RunOutput, out_dir: &Path) -> Result<()> {
    fs::create_dir_all(out_dir).with_context(|| format!("creating {}", out_dir.display()))?;
    let mode = output.manifest.config.time_mode()?;
    let files = [
        (MANIFEST_FILE, output.manifest.to_toml()),
        (
            LOG_FILE,
            records::write_log(&output.manifest, &output.trials),
        ),
        (SUMMARY_FILE, summary_csv(&output.rows)),
        (TRIAL_STATS_FILE, trial_stats_csv(&output.trials, mode)),
    ];
    for (name, contents) in files {
        let path = out_dir.join(name);
        fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}

pub fn cmd_run(config: &FileConfig, out_dir: &Path, jobs: usize) -> Result<RunOutput> {
    let output = execute(config, jobs)?;
    write_outputs(&output, out_dir)?;
    Ok(output)
}

#[derive(Debug, Clone)]
pub struct SweepPoint {
    pub value: f64,
    pub row: SummaryRow,
}

#[derive(Debug, Clone)]
pub struct SweepOutput {
    pub points: Vec<SweepPoint>,
    pub sfr_trend: Option<f64>,
    pub posp_trend: Option<f64>,
}

/// Directory name for one sweep value, e.g. `circle_radius_0.015`.
pub fn sweep_dir_name(param: &str, value: f64) -> String {
    format!("{param}_{value}")
}

pub fn cmd_sweep(
    config: &FileConfig,
    param: &str,
    values: &[f64],
    policy: PolicyKind,
    out_dir: &Path,
    jobs: usize,
) -> Result<SweepOutput> {
    if param != "circle_radius" {
        bail!("cannot sweep `{param}`: only `circle_radius` is sweepable");
    }
    if values.is_empty() {
        bail!("sweep needs at least one value");
    }
    let mut points = Vec::new();
    for &value in values {
        let mut c = config.clone();
        c.policy.kinds = vec![policy.name().to_string()];
        c.policy.circle_radius = value;
        c.policy.swap_min_radius = None;
        c.policy.swap_search_radius = None;
        let output = cmd_run(&c, &out_dir.join(sweep_dir_name(param, value)), jobs)
            .with_context(|| format!("{param} = {value}"))?;
        let row = output
            .rows
            .into_iter()
            .next()
            .expect("one policy gives one row");
        points.push(SweepPoint { value, row });
    }
    let xs: Vec<f64> = points.iter().map(|p| p.value).collect();
    let trend = |f: fn(&SweepPoint) -> Option<f64>| -> Option<f64> {
        let ys: Option<Vec<f64>> = points.iter().map(f).collect();
        spearman(&xs, &ys?)
    };
    let sweep = SweepOutput {
        sfr_trend: trend(|p| p.row.report.sfr_mean),
        posp_trend: trend(|p| p.row.report.posp),
        points,
    };
    fs::write(
        out_dir.join(SWEEP_SUMMARY_FILE),
        sweep_csv(param, &sweep.points),
    )?;
    Ok(sweep)
}

fn sweep_csv(param: &str, points: &[SweepPoint]) -> String {
    let rows: Vec<SummaryRow> = points.iter().map(|p| p.row.clone()).collect();
    let body = summary_csv(&rows);
    let mut out = String::new();
    for (i, line) in body.lines().enumerate() {
        let lead = if i == 0 {
            param.to_string()
        } else {
            points[i - 1].value.to_string()
        };
        let _ = writeln!(out, "{lead},{line}");
    }
    out
}

/// Recomputes the summary from a stored log. `t_pick_s` overrides the time
/// mode recorded in the log's first manifest.
pub fn cmd_metrics(log_path: &Path, t_pick_s: Option<f64>) -> Result<Vec<SummaryRow>> {
    let text =
        fs::read_to_string(log_path).with_context(|| format!("reading {}", log_path.display()))?;
    let parsed = records::parse_log(&text).with_context(|| format!("in {}", log_path.display()))?;
    let mode = match t_pick_s {
        Some(t) if t.is_finite() && t > 0.0 => TimeMode::PhysicalEstimate { t_pick_s: t },
        Some(t) => bail!("--t-pick must be positive, got {t}"),
        None => match parsed.manifests.first() {
            Some(m) => m.config.time_mode()?,
            None => TimeMode::Simulated,
        },
    };
    Ok(records::summarize(&parsed.trials, mode)?)
}

pub fn write_metrics(rows: &[SummaryRow], out_dir: &Path) -> Result<PathBuf> {
    fs::create_dir_all(out_dir)?;
    let path = out_dir.join(SUMMARY_FILE);
    fs::write(&path, summary_csv(rows))?;
    Ok(path)
}

/// Rounds to three significant figures.
pub fn sig3(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let digits = x.abs().log10().floor() as i32;
    if digits >= 2 {
        let scale = 10f64.powi(digits - 2);
        format!("{}", (x / scale).round() * scale)
    } else {
        format!("{:.*}", (2 - digits) as usize, x)
    }
}

fn cell(v: Option<f64>, f: impl Fn(f64) -> String) -> String {
    v.map_or_else(|| "n/a".to_string(), f)
}

/// Human-readable table: SFR and MSL to three significant figures, MPPH as
/// an integer, POSP as a percentage.
pub fn format_table(rows: &[SummaryRow]) -> String {
    let mut out = format!(
        "{:<24} {:<8} {:>8} {:>8} {:>8} {:>6} {:>7} {:>6}\n",
        "environment", "policy", "SFR", "MSL", "MSLratio", "MPPH", "POSP%", "trials"
    );
    for row in rows {
        let r = &row.report;
        let _ = writeln!(
            out,
            "{:<24} {:<8} {:>8} {:>8} {:>8} {:>6} {:>7} {:>6}",
            row.environment,
            row.policy,
            cell(r.sfr_mean, sig3),
            cell(r.msl_median, sig3),
            cell(r.msl_ratio, sig3),
            cell(r.mpph_mean, |x| format!("{}", x.round() as i64)),
            cell(r.posp, |x| format!("{:.1}", 100.0 * x)),
            r.n_trials,
        );
    }
    out
}

/// Sweep table: the swept value followed by the usual summary columns.
pub fn format_sweep(param: &str, sweep: &SweepOutput) -> String {
    let rows: Vec<SummaryRow> = sweep.points.iter().map(|p| p.row.clone()).collect();
    let table = format_table(&rows);
    let mut out = String::new();
    for (i, line) in table.lines().enumerate() {
        let lead = if i == 0 {
            param.to_string()
        } else {
            sweep.points[i - 1].value.to_string()
        };
        let _ = writeln!(out, "{lead:<14} {line}");
    }
    let _ = writeln!(out, "{}", format_trend(sweep));
    out
}

pub fn format_trend(sweep: &SweepOutput) -> String {
    let show = |v: Option<f64>| v.map_or_else(|| "n/a".to_string(), |x| format!("{x:.3}"));
    format!(
        "trend: spearman(radius, SFR) = {}, spearman(radius, POSP) = {}",
        show(sweep.sfr_trend),
        show(sweep.posp_trend)
    )
}
