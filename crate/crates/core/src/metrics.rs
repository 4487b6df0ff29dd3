//! Sequential-failure statistics per trial and their batch aggregates.
//!
//! Per trial: `M` counts failures immediately followed by another failure,
//! `F` counts successes immediately preceded by two or more failures.
//! Per batch: SFR = mean(M / r), MSL = mean((M + F) / F), MPPH = mean(r / T),
//! and POSP = total picked / total objects.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{Reward, TrialLog};

/// `(M, F)` computed directly from adjacent pairs and triples.
pub fn sequential_failure_counts(rewards: &[Reward]) -> (u32, u32) {
    let m = rewards
        .windows(2)
        .filter(|w| w[0] == 0 && w[1] == 0)
        .count();
    let f = rewards
        .windows(3)
        .filter(|w| w[0] == 0 && w[1] == 0 && w[2] == 1)
        .count();
    (m as u32, f as u32)
}

/// Lengths of the maximal runs of consecutive failures, in order.
pub fn failure_runs(rewards: &[Reward]) -> Vec<u32> {
    let mut runs = Vec::new();
    let mut current = 0u32;
    for &r in rewards {
        if r == 0 {
            current += 1;
        } else if current > 0 {
            runs.push(current);
            current = 0;
        }
    }
    if current > 0 {
        runs.push(current);
    }
    runs
}

/// How trial duration is measured.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum TimeMode {
    /// Cumulative planning plus execution time of the last logged attempt.
    Simulated,
    /// Number of attempts times a fixed per-pick time.
    PhysicalEstimate { t_pick_s: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialStats {
    pub m: u32,
    pub f: u32,
    pub r: u32,
    pub n: u32,
    pub attempts: u32,
    pub elapsed_s: f64,
    pub sequence_lengths: Vec<u32>,
    /// True when the trial ended on a failure, so the last run has no
    /// terminating success.
    pub open_tail: bool,
}

impl TrialStats {
    pub fn hours(&self) -> f64 {
        self.elapsed_s / 3600.0
    }

    pub fn no_attempts(&self) -> bool {
        self.attempts == 0
    }

    /// Successful picks per hour; `None` when no time elapsed.
    pub fn picks_per_hour(&self) -> Option<f64> {
        (self.elapsed_s > 0.0).then(|| self.r as f64 * 3600.0 / self.elapsed_s)
    }

    pub fn sequential_failure_rate(&self) -> Option<f64> {
        (self.r > 0).then(|| self.m as f64 / self.r as f64)
    }

    pub fn sequence_length_ratio(&self) -> Option<f64> {
        (self.f > 0).then(|| (self.m + self.f) as f64 / self.f as f64)
    }

    /// Lengths of failure runs that ended in a success.
    pub fn terminated_runs(&self) -> &[u32] {
        let n = self.sequence_lengths.len();
        if self.open_tail {
            &self.sequence_lengths[..n - 1]
        } else {
            &self.sequence_lengths
        }
    }
}

pub fn trial_stats(log: &TrialLog, mode: TimeMode) -> TrialStats {
    let rewards = log.rewards();
    let (m, f) = sequential_failure_counts(&rewards);
    let attempts = rewards.len() as u32;
    let elapsed_s = match mode {
        TimeMode::Simulated => log.records.last().map_or(0.0, |r| r.cumulative_time_s),
        TimeMode::PhysicalEstimate { t_pick_s } => attempts as f64 * t_pick_s,
    };
    TrialStats {
        m,
        f,
        r: log.successes(),
        n: log.n_objects,
        attempts,
        elapsed_s,
        sequence_lengths: failure_runs(&rewards),
        open_tail: rewards.last() == Some(&0),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateReport {
    pub n_trials: usize,
    pub n_trials_used: usize,
    pub n_trials_excluded: usize,
    pub sfr_mean: Option<f64>,
    pub sfr_se: Option<f64>,
    pub msl_ratio: Option<f64>,
    pub msl_median: Option<f64>,
    pub mpph_mean: Option<f64>,
    pub mpph_se: Option<f64>,
    pub posp: Option<f64>,
    pub attempts: u64,
    pub successes: u64,
}

impl AggregateReport {
    /// Successful picks over attempts, pooled across the batch.
    pub fn reliability(&self) -> Option<f64> {
        (self.attempts > 0).then(|| self.successes as f64 / self.attempts as f64)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricsError {
    #[error("cannot aggregate an empty batch")]
    EmptyBatch,
}

fn sorted(mut values: Vec<f64>) -> Vec<f64> {
    values.sort_by(f64::total_cmp);
    values
}

/// Mean and standard error of `values`. Summation runs over sorted values so
/// the result does not depend on input order.
fn mean_and_se(values: Vec<f64>) -> (Option<f64>, Option<f64>) {
    if values.is_empty() {
        return (None, None);
    }
    let values = sorted(values);
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (Some(mean), None);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (Some(mean), Some(var.sqrt() / n.sqrt()))
}

pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let v = sorted(values.to_vec());
    let mid = v.len() / 2;
    Some(if v.len() % 2 == 1 {
        v[mid]
    } else {
        (v[mid - 1] + v[mid]) / 2.0
    })
}

pub fn aggregate(stats: &[TrialStats]) -> Result<AggregateReport, MetricsError> {
    if stats.is_empty() {
        return Err(MetricsError::EmptyBatch);
    }
    let sfr: Vec<f64> = stats
        .iter()
        .filter_map(TrialStats::sequential_failure_rate)
        .collect();
    let ratio: Vec<f64> = stats
        .iter()
        .filter_map(TrialStats::sequence_length_ratio)
        .collect();
    let mpph: Vec<f64> = stats
        .iter()
        .filter_map(TrialStats::picks_per_hour)
        .collect();
    let long_runs: Vec<f64> = stats
        .iter()
        .flat_map(|s| s.terminated_runs().iter().copied())
        .filter(|&len| len >= 2)
        .map(f64::from)
        .collect();

    let n_trials_used = sfr.len();
    let (sfr_mean, sfr_se) = mean_and_se(sfr);
    let (msl_ratio, _) = mean_and_se(ratio);
    let (mpph_mean, mpph_se) = mean_and_se(mpph);
    let picked: u64 = stats.iter().map(|s| s.r as u64).sum();
    let objects: u64 = stats.iter().map(|s| s.n as u64).sum();

    Ok(AggregateReport {
        n_trials: stats.len(),
        n_trials_used,
        n_trials_excluded: stats.len() - n_trials_used,
        sfr_mean,
        sfr_se,
        msl_ratio,
        msl_median: median(&long_runs),
        mpph_mean,
        mpph_se,
        posp: (objects > 0).then(|| picked as f64 / objects as f64),
        attempts: stats.iter().map(|s| s.attempts as u64).sum(),
        successes: picked,
    })
}

/// Convenience: aggregate a batch of logs under one time mode.
pub fn aggregate_logs(logs: &[TrialLog], mode: TimeMode) -> Result<AggregateReport, MetricsError> {
    let stats: Vec<TrialStats> = logs.iter().map(|l| trial_stats(l, mode)).collect();
    aggregate(&stats)
}

fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let rank = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            ranks[k] = rank;
        }
        i = j + 1;
    }
    ranks
}

/// Spearman rank correlation with average ranks for ties. `None` for fewer
/// than two points or a constant series.
pub fn spearman(xs: &[f64], ys: &[f64]) -> Option<f64> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return None;
    }
    let (rx, ry) = (average_ranks(xs), average_ranks(ys));
    let n = xs.len() as f64;
    let (mx, my) = (rx.iter().sum::<f64>() / n, ry.iter().sum::<f64>() / n);
    let cov: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = rx.iter().map(|a| (a - mx).powi(2)).sum();
    let vy: f64 = ry.iter().map(|b| (b - my).powi(2)).sum();
    (vx > 0.0 && vy > 0.0).then(|| cov / (vx * vy).sqrt())
}
