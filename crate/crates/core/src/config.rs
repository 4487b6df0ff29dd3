//! Sectioned TOML experiment configuration. Every key has a default, unknown
//! keys are rejected, and a resolved config (all defaults expanded) parses
//! back to itself.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::{ExperimentConfig, TimeModel, DEFAULT_FAILURE_LIMIT, DEFAULT_TRIALS};
use crate::environment::{EnvConfig, EnvError, EnvironmentKind};
use crate::metrics::TimeMode;
use crate::policies::{PolicyConfig, PolicyError, PolicyKind, DEFAULT_CIRCLE_RADIUS};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("could not parse config: {0}")]
    Parse(String),
    #[error("invalid value for `{key}`: {reason}")]
    Invalid { key: String, reason: String },
}

fn invalid(key: &str, reason: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        key: key.to_string(),
        reason: reason.into(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentSection {
    pub n_trials: u64,
    pub master_seed: u64,
    pub consecutive_failure_limit: u32,
}

impl Default for ExperimentSection {
    fn default() -> Self {
        Self {
            n_trials: DEFAULT_TRIALS,
            master_seed: 0,
            consecutive_failure_limit: DEFAULT_FAILURE_LIMIT,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnvironmentSection {
    /// One of type_failures_only, placement_failures_only, both_failure_types, probabilistic.
    pub kind: String,
    pub n_objects: u32,
    pub n_grippers: u32,
    pub placement_block_fraction: f64,
    pub bin_width: f64,
    pub bin_height: f64,
    pub boundary_sites: u32,
    pub radius_min: f64,
    pub radius_max: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub success_prob_lo: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub success_prob_hi: Option<f64>,
}

impl Default for EnvironmentSection {
    fn default() -> Self {
        let env = EnvConfig::default();
        Self {
            kind: env.kind.name().to_string(),
            n_objects: env.n_objects,
            n_grippers: env.n_grippers,
            placement_block_fraction: env.placement_block_fraction,
            bin_width: env.bin_dims.0,
            bin_height: env.bin_dims.1,
            boundary_sites: env.boundary_sites,
            radius_min: env.radius_range.0,
            radius_max: env.radius_range.1,
            success_prob_lo: None,
            success_prob_hi: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PolicySection {
    pub kinds: Vec<String>,
    pub circle_radius: f64,
    /// Defaults to circle_radius / 4.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub swap_min_radius: Option<f64>,
    /// Defaults to circle_radius.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub swap_search_radius: Option<f64>,
}

impl Default for PolicySection {
    fn default() -> Self {
        Self {
            kinds: PolicyKind::ALL
                .iter()
                .map(|k| k.name().to_string())
                .collect(),
            circle_radius: DEFAULT_CIRCLE_RADIUS,
            swap_min_radius: None,
            swap_search_radius: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TimeSection {
    pub t_plan_s: f64,
    pub t_exec_s: f64,
}

impl Default for TimeSection {
    fn default() -> Self {
        let t = TimeModel::default();
        Self {
            t_plan_s: t.t_plan_s,
            t_exec_s: t.t_exec_s,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MetricsSection {
    /// When set, elapsed time is estimated as attempts × t_pick_s instead of
    /// the simulated clock.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_pick_s: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FileConfig {
    pub experiment: ExperimentSection,
    pub environment: EnvironmentSection,
    pub policy: PolicySection,
    pub time: TimeSection,
    pub metrics: MetricsSection,
}

impl FileConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config is always representable as TOML")
    }

    pub fn environment_kind(&self) -> Result<EnvironmentKind, ConfigError> {
        let env = &self.environment;
        let kind = match env.kind.as_str() {
            "type_failures_only" => EnvironmentKind::TypeFailuresOnly,
            "placement_failures_only" => EnvironmentKind::PlacementFailuresOnly,
            "both_failure_types" => EnvironmentKind::BothFailureTypes,
            "probabilistic" => {
                let lo = env.success_prob_lo.ok_or_else(|| invalid("environment.success_prob_lo", "required for probabilistic"))?;
                let hi = env.success_prob_hi.ok_or_else(|| invalid("environment.success_prob_hi", "required for probabilistic"))?;
                EnvironmentKind::Probabilistic { lo, hi }
            }
            other => {
                return Err(invalid(
                    "environment.kind",
                    format!(
                        "unknown environment `{other}` (expected type_failures_only, placement_failures_only, both_failure_types or probabilistic)"
                    ),
                ))
            }
        };
        if !matches!(kind, EnvironmentKind::Probabilistic { .. }) {
            for (key, value) in [
                ("success_prob_lo", env.success_prob_lo),
                ("success_prob_hi", env.success_prob_hi),
            ] {
                if value.is_some() {
                    return Err(invalid(
                        &format!("environment.{key}"),
                        "only valid for the probabilistic environment",
                    ));
                }
            }
        }
        Ok(kind)
    }

    pub fn env_config(&self) -> Result<EnvConfig, ConfigError> {
        let env = &self.environment;
        let config = EnvConfig {
            kind: self.environment_kind()?,
            n_objects: env.n_objects,
            n_grippers: env.n_grippers,
            placement_block_fraction: env.placement_block_fraction,
            bin_dims: (env.bin_width, env.bin_height),
            boundary_sites: env.boundary_sites,
            radius_range: (env.radius_min, env.radius_max),
        };
        config.validate().map_err(|e| match e {
            EnvError::Config { key, reason } => invalid(&env_key(key), reason),
            other => invalid("environment", other.to_string()),
        })?;
        Ok(config)
    }

    pub fn policy_kinds(&self) -> Result<Vec<PolicyKind>, ConfigError> {
        if self.policy.kinds.is_empty() {
            return Err(invalid("policy.kinds", "at least one policy is required"));
        }
        let mut kinds = Vec::new();
        for name in &self.policy.kinds {
            let kind: PolicyKind = name
                .parse()
                .map_err(|e: PolicyError| invalid("policy.kinds", e.to_string()))?;
            if kinds.contains(&kind) {
                return Err(invalid("policy.kinds", format!("`{name}` is listed twice")));
            }
            kinds.push(kind);
        }
        Ok(kinds)
    }

    pub fn policy_config(&self, kind: PolicyKind) -> Result<PolicyConfig, ConfigError> {
        let p = &self.policy;
        let r = p.circle_radius;
        let config = PolicyConfig {
            kind,
            circle_radius: r,
            swap_min_radius: p.swap_min_radius.unwrap_or(r / 4.0),
            swap_search_radius: p.swap_search_radius.unwrap_or(r),
        };
        if !(r.is_finite() && r > 0.0) {
            return Err(invalid(
                "policy.circle_radius",
                format!("{r} must be positive"),
            ));
        }
        if !(config.swap_min_radius > 0.0 && config.swap_min_radius < r) {
            return Err(invalid(
                "policy.swap_min_radius",
                format!(
                    "{} must lie in (0, circle_radius = {r})",
                    config.swap_min_radius
                ),
            ));
        }
        if !(config.swap_search_radius.is_finite() && config.swap_search_radius >= 0.0) {
            return Err(invalid(
                "policy.swap_search_radius",
                format!("{} must be non-negative", config.swap_search_radius),
            ));
        }
        Ok(config)
    }

    pub fn time_model(&self) -> Result<TimeModel, ConfigError> {
        let t = TimeModel {
            t_plan_s: self.time.t_plan_s,
            t_exec_s: self.time.t_exec_s,
        };
        t.validate().map_err(|reason| invalid("time", reason))?;
        Ok(t)
    }

    pub fn time_mode(&self) -> Result<TimeMode, ConfigError> {
        match self.metrics.t_pick_s {
            None => Ok(TimeMode::Simulated),
            Some(t) if t.is_finite() && t > 0.0 => Ok(TimeMode::PhysicalEstimate { t_pick_s: t }),
            Some(t) => Err(invalid("metrics.t_pick_s", format!("{t} must be positive"))),
        }
    }

    /// One validated experiment per listed policy, in listed order.
    pub fn experiments(&self) -> Result<Vec<ExperimentConfig>, ConfigError> {
        let env = self.env_config()?;
        let time = self.time_model()?;
        self.time_mode()?;
        let ex = &self.experiment;
        if ex.n_trials == 0 {
            return Err(invalid("experiment.n_trials", "must be at least 1"));
        }
        if ex.consecutive_failure_limit == 0 {
            return Err(invalid(
                "experiment.consecutive_failure_limit",
                "must be at least 1",
            ));
        }
        self.policy_kinds()?
            .into_iter()
            .map(|kind| {
                Ok(ExperimentConfig {
                    env: env.clone(),
                    policy: self.policy_config(kind)?,
                    n_trials: ex.n_trials,
                    time,
                    consecutive_failure_limit: ex.consecutive_failure_limit,
                    master_seed: ex.master_seed,
                })
            })
            .collect()
    }

    /// Copy with every optional key filled in, after validation.
    pub fn resolved(&self) -> Result<FileConfig, ConfigError> {
        self.experiments()?;
        let mut out = self.clone();
        let r = out.policy.circle_radius;
        out.policy.swap_min_radius.get_or_insert(r / 4.0);
        out.policy.swap_search_radius.get_or_insert(r);
        Ok(out)
    }
}

fn env_key(key: &str) -> String {
    match key {
        "bin_dims" => "environment.bin_width".into(),
        "radius_range" => "environment.radius_min".into(),
        "success_prob" => "environment.success_prob_lo".into(),
        other => format!("environment.{other}"),
    }
}
