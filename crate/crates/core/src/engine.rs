//! Trial and batch execution: observe, select, execute, update, until the
//! heap is cleared, nothing is graspable, or the consecutive-failure limit
//! is reached.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::environment::{generate_heap, EnvConfig, EnvError};
use crate::model::{
    evaluate_grasp, ContractViolation, HeapState, Termination, TrialLog, TrialRecord,
};
use crate::observation::Observation;
use crate::policies::{Policy, PolicyConfig, PolicyError};
use crate::seed::{stream_rng, trial_seed, Stream};

pub const DEFAULT_FAILURE_LIMIT: u32 = 20;
pub const DEFAULT_TRIALS: u64 = 500;

/// Fixed planning and execution time per grasp attempt.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeModel {
    pub t_plan_s: f64,
    pub t_exec_s: f64,
}

impl Default for TimeModel {
    fn default() -> Self {
        Self {
            t_plan_s: 2.0,
            t_exec_s: 10.0,
        }
    }
}

impl TimeModel {
    pub fn per_attempt_s(&self) -> f64 {
        self.t_plan_s + self.t_exec_s
    }

    pub fn validate(&self) -> Result<(), String> {
        if !(self.t_plan_s >= 0.0
            && self.t_exec_s >= 0.0
            && self.per_attempt_s() > 0.0
            && self.per_attempt_s().is_finite())
        {
            return Err(format!(
                "t_plan_s ({}) and t_exec_s ({}) must be non-negative with a positive sum",
                self.t_plan_s, self.t_exec_s
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub env: EnvConfig,
    pub policy: PolicyConfig,
    pub n_trials: u64,
    pub time: TimeModel,
    pub consecutive_failure_limit: u32,
    pub master_seed: u64,
}

impl ExperimentConfig {
    pub fn new(env: EnvConfig, policy: PolicyConfig) -> Self {
        Self {
            env,
            policy,
            n_trials: DEFAULT_TRIALS,
            time: TimeModel::default(),
            consecutive_failure_limit: DEFAULT_FAILURE_LIMIT,
            master_seed: 0,
        }
    }

    pub fn validate(&self) -> Result<(), EngineError> {
        self.env.validate().map_err(EngineError::Env)?;
        self.policy.validate()?;
        self.time.validate().map_err(EngineError::Config)?;
        if self.n_trials == 0 {
            return Err(EngineError::Config("n_trials must be at least 1".into()));
        }
        if self.consecutive_failure_limit == 0 {
            return Err(EngineError::Config(
                "consecutive_failure_limit must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum EngineError {
    #[error(transparent)]
    Env(#[from] EnvError),
    #[error(transparent)]
    Policy(#[from] PolicyError),
    #[error("invalid experiment config: {0}")]
    Config(String),
    #[error("trial {trial}: heap generation failed: {source}")]
    Generation { trial: u64, source: EnvError },
    #[error("trial {trial}, step {step}: {source}")]
    Fault {
        trial: u64,
        step: usize,
        source: ContractViolation,
    },
    #[error("could not start worker pool: {0}")]
    Pool(String),
}

/// Parameters of a single trial loop, independent of how the heap was made.
#[derive(Debug, Clone)]
pub struct TrialSetup<'a> {
    pub policy: PolicyConfig,
    pub n_grippers: u32,
    pub time: TimeModel,
    pub consecutive_failure_limit: u32,
    pub environment: &'a str,
    pub trial_index: u64,
}

/// Runs one trial on an already generated heap. The Bernoulli stream for
/// probabilistic outcomes is derived from `heap.seed`.
pub fn run_trial_on_heap(
    mut heap: HeapState,
    setup: &TrialSetup<'_>,
) -> Result<TrialLog, EngineError> {
    let mut policy = Policy::new(setup.policy, setup.n_grippers);
    let mut outcome_rng = stream_rng(heap.seed, Stream::Outcome);
    let per_attempt = setup.time.per_attempt_s();
    let n_objects = heap.objects.len() as u32;
    let mut records = Vec::new();
    let mut consecutive_failures = 0u32;

    let termination = loop {
        if heap.remaining.is_empty() {
            break Termination::AllPicked;
        }
        let obs = Observation::from_heap(&heap);
        let Some(selection) = policy.select(&obs) else {
            break Termination::NoGraspAvailable;
        };
        let step = records.len();
        let fault = |source| EngineError::Fault {
            trial: setup.trial_index,
            step,
            source,
        };
        let action = selection.action;
        let reward = evaluate_grasp(&heap, &action, &mut outcome_rng).map_err(fault)?;
        records.push(TrialRecord {
            action,
            reward,
            cumulative_time_s: (step + 1) as f64 * per_attempt,
            mask_shrinks: selection.mask_shrinks,
        });
        if reward == 1 {
            heap.take_object(action.object_id).map_err(fault)?;
            consecutive_failures = 0;
        } else {
            consecutive_failures += 1;
        }
        policy.update(&action, reward);
        if consecutive_failures >= setup.consecutive_failure_limit {
            break Termination::ConsecutiveFailureLimit;
        }
    };

    Ok(TrialLog {
        policy_name: setup.policy.kind.name().to_string(),
        environment: setup.environment.to_string(),
        trial_index: setup.trial_index,
        seed: heap.seed,
        n_objects,
        termination,
        records,
    })
}

/// Generates the heap for `trial_index` and runs the configured policy on it.
pub fn run_trial(config: &ExperimentConfig, trial_index: u64) -> Result<TrialLog, EngineError> {
    let seed = trial_seed(config.master_seed, trial_index);
    let heap = generate_heap(&config.env, seed).map_err(|source| EngineError::Generation {
        trial: trial_index,
        source,
    })?;
    let setup = TrialSetup {
        policy: config.policy,
        n_grippers: config.env.n_grippers,
        time: config.time,
        consecutive_failure_limit: config.consecutive_failure_limit,
        environment: config.env.kind.name(),
        trial_index,
    };
    run_trial_on_heap(heap, &setup)
}

pub fn run_experiment(config: &ExperimentConfig) -> Result<Vec<TrialLog>, EngineError> {
    run_experiment_with_jobs(config, 1)
}

/// Runs all trials on `jobs` worker threads. Output is in trial order and
/// does not depend on `jobs`.
pub fn run_experiment_with_jobs(
    config: &ExperimentConfig,
    jobs: usize,
) -> Result<Vec<TrialLog>, EngineError> {
    config.validate()?;
    let results: Vec<Result<TrialLog, EngineError>> = if jobs <= 1 {
        (0..config.n_trials).map(|i| run_trial(config, i)).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .map_err(|e| EngineError::Pool(e.to_string()))?;
        pool.install(|| {
            (0..config.n_trials)
                .into_par_iter()
                .map(|i| run_trial(config, i))
                .collect()
        })
    };
    results.into_iter().collect()
}
