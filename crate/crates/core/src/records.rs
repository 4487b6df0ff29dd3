//! On-disk formats: the line-delimited batch log (a manifest record followed
//! by one trial per line), the run manifest, and the CSV summaries.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::FileConfig;
use crate::metrics::{aggregate, trial_stats, AggregateReport, MetricsError, TimeMode, TrialStats};
use crate::model::TrialLog;

pub const TOOL_VERSION: &str = concat!("binpick ", env!("CARGO_PKG_VERSION"));

/// Provenance for one run. `timestamp` is seconds since the Unix epoch and is
/// taken from `SOURCE_DATE_EPOCH` (0 when unset) so output stays reproducible.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunManifest {
    pub tool_version: String,
    pub timestamp: u64,
    pub master_seed: u64,
    pub config: FileConfig,
}

impl RunManifest {
    pub fn new(config: FileConfig) -> Self {
        Self {
            tool_version: TOOL_VERSION.to_string(),
            timestamp: source_date_epoch(),
            master_seed: config.experiment.master_seed,
            config,
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("manifest is always representable as TOML")
    }

    pub fn from_toml(text: &str) -> Result<Self, toml::de::Error> {
        toml::from_str(text)
    }
}

pub fn source_date_epoch() -> u64 {
    std::env::var("SOURCE_DATE_EPOCH")
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "record", rename_all = "snake_case")]
pub enum LogLine {
    Manifest(RunManifest),
    Trial(TrialLog),
}

#[derive(Debug, Error)]
pub enum RecordError {
    #[error("log is empty")]
    Empty,
    #[error("line {line}: {reason}")]
    Corrupt { line: usize, reason: String },
    #[error("log contains no trial records")]
    NoTrials,
}

/// A parsed batch log. Several manifests appear when logs are concatenated.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ParsedLog {
    pub manifests: Vec<RunManifest>,
    pub trials: Vec<TrialLog>,
}

pub fn write_log(manifest: &RunManifest, trials: &[TrialLog]) -> String {
    let mut out = String::new();
    push_line(&mut out, &LogLine::Manifest(manifest.clone()));
    for t in trials {
        push_line(&mut out, &LogLine::Trial(t.clone()));
    }
    out
}

fn push_line(out: &mut String, line: &LogLine) {
    out.push_str(&serde_json::to_string(line).expect("log records serialize"));
    out.push('\n');
}

/// Parses a batch log. Blank lines are skipped; anything else that is not a
/// record is an error naming its 1-based line number.
pub fn parse_log(text: &str) -> Result<ParsedLog, RecordError> {
    if text.trim().is_empty() {
        return Err(RecordError::Empty);
    }
    let mut parsed = ParsedLog::default();
    for (i, raw) in text.lines().enumerate() {
        if raw.trim().is_empty() {
            continue;
        }
        let line: LogLine = serde_json::from_str(raw).map_err(|e| RecordError::Corrupt {
            line: i + 1,
            reason: e.to_string(),
        })?;
        match line {
            LogLine::Manifest(m) => parsed.manifests.push(m),
            LogLine::Trial(t) => parsed.trials.push(t),
        }
    }
    if parsed.trials.is_empty() {
        return Err(RecordError::NoTrials);
    }
    Ok(parsed)
}

/// One row of the summary table.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub environment: String,
    pub policy: String,
    pub report: AggregateReport,
}

/// Groups trials by (environment, policy) in order of first appearance and
/// aggregates each group.
pub fn summarize(trials: &[TrialLog], mode: TimeMode) -> Result<Vec<SummaryRow>, MetricsError> {
    let mut groups: Vec<((String, String), Vec<TrialStats>)> = Vec::new();
    for t in trials {
        let key = (t.environment.clone(), t.policy_name.clone());
        let stats = trial_stats(t, mode);
        match groups.iter_mut().find(|(k, _)| *k == key) {
            Some((_, v)) => v.push(stats),
            None => groups.push((key, vec![stats])),
        }
    }
    groups
        .into_iter()
        .map(|((environment, policy), stats)| {
            Ok(SummaryRow {
                environment,
                policy,
                report: aggregate(&stats)?,
            })
        })
        .collect()
}

pub const SUMMARY_COLUMNS: [&str; 12] = [
    "environment",
    "policy",
    "n_trials",
    "n_trials_used",
    "n_trials_excluded",
    "sfr_mean",
    "sfr_se",
    "msl_ratio",
    "msl_median",
    "mpph_mean",
    "mpph_se",
    "posp",
];

/// Undefined statistics are written as `NA`; defined ones use the shortest
/// representation that parses back to the same value.
pub fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "NA".to_string(), |x| x.to_string())
}

pub fn summary_csv(rows: &[SummaryRow]) -> String {
    let mut out = SUMMARY_COLUMNS.join(",");
    out.push('\n');
    for row in rows {
        let r = &row.report;
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            row.environment,
            row.policy,
            r.n_trials,
            r.n_trials_used,
            r.n_trials_excluded,
            fmt_opt(r.sfr_mean),
            fmt_opt(r.sfr_se),
            fmt_opt(r.msl_ratio),
            fmt_opt(r.msl_median),
            fmt_opt(r.mpph_mean),
            fmt_opt(r.mpph_se),
            fmt_opt(r.posp),
        );
    }
    out
}

pub const TRIAL_COLUMNS: [&str; 13] = [
    "environment",
    "policy",
    "trial_index",
    "seed",
    "termination",
    "attempts",
    "r",
    "n",
    "m",
    "f",
    "elapsed_s",
    "sfr",
    "mpph",
];

pub fn trial_stats_csv(trials: &[TrialLog], mode: TimeMode) -> String {
    let mut out = TRIAL_COLUMNS.join(",");
    out.push('\n');
    for t in trials {
        let s = trial_stats(t, mode);
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{}",
            t.environment,
            t.policy_name,
            t.trial_index,
            t.seed,
            t.termination,
            s.attempts,
            s.r,
            s.n,
            s.m,
            s.f,
            s.elapsed_s,
            fmt_opt(s.sequential_failure_rate()),
            fmt_opt(s.picks_per_hour()),
        );
    }
    out
}
