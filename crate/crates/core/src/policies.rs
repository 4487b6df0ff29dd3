//! Picking policies: the memoryless quality-argmax baseline and three
//! policies that remember past failures as masks over the grasp space.
//!
//! * cluster: after a failure, the whole object is masked for that gripper.
//! * circle: after a failure, a disk around the failed grasp point is masked
//!   for that gripper. A success by a different gripper inside the disk lifts it.
//! * swap: after a failure, retry near the failure point with another
//!   gripper. If that also fails, mask both points for every gripper and
//!   shrink masks when they leave nothing to grasp.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{strictly_inside, Point2};
use crate::model::{Action, GripperId, ObjectId, Reward};
use crate::observation::{Candidate, Observation};

pub const DEFAULT_CIRCLE_RADIUS: f64 = 0.015;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PolicyKind {
    Markov,
    Cluster,
    Circle,
    Swap,
}

impl PolicyKind {
    pub const ALL: [PolicyKind; 4] = [
        PolicyKind::Markov,
        PolicyKind::Cluster,
        PolicyKind::Circle,
        PolicyKind::Swap,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            PolicyKind::Markov => "markov",
            PolicyKind::Cluster => "cluster",
            PolicyKind::Circle => "circle",
            PolicyKind::Swap => "swap",
        }
    }
}

impl fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PolicyError {
    #[error(
        "policy `cache` is not available: with perfect segmentation and tracking it behaves exactly like `cluster`, use that instead"
    )]
    CacheIsCluster,
    #[error("unknown policy `{0}` (expected one of markov, cluster, circle, swap)")]
    Unknown(String),
    #[error("invalid policy config: {0}")]
    Config(String),
}

impl FromStr for PolicyKind {
    type Err = PolicyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "markov" => Ok(PolicyKind::Markov),
            "cluster" => Ok(PolicyKind::Cluster),
            "circle" => Ok(PolicyKind::Circle),
            "swap" => Ok(PolicyKind::Swap),
            "cache" => Err(PolicyError::CacheIsCluster),
            other => Err(PolicyError::Unknown(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolicyConfig {
    pub kind: PolicyKind,
    pub circle_radius: f64,
    /// Floor for mask shrinking under the swap policy.
    pub swap_min_radius: f64,
    pub swap_search_radius: f64,
}

impl PolicyConfig {
    pub fn new(kind: PolicyKind) -> Self {
        Self::with_radius(kind, DEFAULT_CIRCLE_RADIUS)
    }

    /// Config with mask radius `r`, shrink floor `r / 4` and swap search radius `r`.
    pub fn with_radius(kind: PolicyKind, r: f64) -> Self {
        Self {
            kind,
            circle_radius: r,
            swap_min_radius: r / 4.0,
            swap_search_radius: r,
        }
    }

    pub fn validate(&self) -> Result<(), PolicyError> {
        let (r, r_min) = (self.circle_radius, self.swap_min_radius);
        if !(r.is_finite() && r > r_min && r_min > 0.0) {
            return Err(PolicyError::Config(format!(
                "need circle_radius > swap_min_radius > 0, got {r} and {r_min}"
            )));
        }
        if !(self.swap_search_radius.is_finite() && self.swap_search_radius >= 0.0) {
            return Err(PolicyError::Config(format!(
                "swap_search_radius {} is invalid",
                self.swap_search_radius
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CircleMask {
    pub gripper: GripperId,
    pub center: Point2,
    pub radius: f64,
    pub origin_step: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum SwapMode {
    Normal,
    SwapPending {
        failed_gripper: GripperId,
        failure_point: Point2,
        failed_object_id: ObjectId,
    },
}

/// Per-trial policy memory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaskState {
    pub object_masks: BTreeSet<(GripperId, ObjectId)>,
    pub circle_masks: Vec<CircleMask>,
    pub swap_mode: SwapMode,
    /// Number of updates applied so far; stamps new circle masks.
    pub step: u64,
}

impl Default for MaskState {
    fn default() -> Self {
        Self {
            object_masks: BTreeSet::new(),
            circle_masks: Vec::new(),
            swap_mode: SwapMode::Normal,
            step: 0,
        }
    }
}

impl MaskState {
    pub fn is_empty(&self) -> bool {
        self.object_masks.is_empty()
            && self.circle_masks.is_empty()
            && self.swap_mode == SwapMode::Normal
    }

    fn add_circle(&mut self, gripper: GripperId, center: Point2, radius: f64) {
        self.circle_masks.push(CircleMask {
            gripper,
            center,
            radius,
            origin_step: self.step,
        });
    }

    /// Drops every circle mask of another gripper that contains `point`.
    fn lift_circles_on_success(&mut self, gripper: GripperId, point: Point2) {
        self.circle_masks
            .retain(|m| m.gripper == gripper || !strictly_inside(&point, &m.center, m.radius));
    }
}

/// False iff the candidate's object is masked for its gripper, or its position
/// lies strictly inside one of that gripper's circle masks.
pub fn admissible(candidate: &Candidate, mask: &MaskState) -> bool {
    if mask
        .object_masks
        .contains(&(candidate.gripper, candidate.object_id))
    {
        return false;
    }
    !mask.circle_masks.iter().any(|m| {
        m.gripper == candidate.gripper && strictly_inside(&candidate.position, &m.center, m.radius)
    })
}

/// Highest-quality admissible candidate, ties to the lowest
/// (object, site, gripper).
pub fn select_markov(obs: &Observation, mask: &MaskState) -> Option<Action> {
    best_by_quality(obs.candidates().filter(|c| admissible(c, mask))).map(|c| c.action())
}

fn best_by_quality(candidates: impl Iterator<Item = Candidate>) -> Option<Candidate> {
    // Candidates arrive in key order, so keeping the first maximum is the tie-break.
    candidates.fold(None, |best: Option<Candidate>, c| match best {
        Some(b) if b.quality >= c.quality => Some(b),
        _ => Some(c),
    })
}

fn nearest_to(
    point: &Point2,
    candidates: impl Iterator<Item = Candidate>,
) -> Option<(Candidate, f64)> {
    candidates.fold(None, |best: Option<(Candidate, f64)>, c| {
        let d = c.position.distance(point);
        match best {
            Some((b, bd)) if bd <= d => Some((b, bd)),
            _ => Some((c, d)),
        }
    })
}

pub fn update_cluster(mask: &mut MaskState, action: &Action, reward: Reward) {
    mask.step += 1;
    if reward == 0 {
        mask.object_masks.insert((action.gripper, action.object_id));
    }
}

pub fn update_circle(mask: &mut MaskState, action: &Action, reward: Reward, radius: f64) {
    mask.step += 1;
    if reward == 0 {
        mask.add_circle(action.gripper, action.position, radius);
    } else {
        mask.lift_circles_on_success(action.gripper, action.position);
    }
}

/// Halves every circle radius above `min_radius`, never going below it.
/// Returns false once no radius can change.
pub fn shrink_masks(mask: &mut MaskState, min_radius: f64) -> bool {
    let mut shrunk = false;
    for m in &mut mask.circle_masks {
        if m.radius > min_radius {
            m.radius = (m.radius / 2.0).max(min_radius);
            shrunk = true;
        }
    }
    shrunk
}

/// An action chosen by a policy, with the number of mask-shrink steps taken
/// to find it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Selection {
    pub action: Action,
    pub mask_shrinks: u32,
}

fn swap_choice(obs: &Observation, mask: &MaskState, config: &PolicyConfig) -> Option<Action> {
    if let SwapMode::SwapPending {
        failed_gripper,
        failure_point,
        failed_object_id,
    } = mask.swap_mode
    {
        let alternates = || {
            obs.candidates()
                .filter(move |c| c.gripper != failed_gripper && admissible(c, mask))
        };
        if let Some((c, d)) = nearest_to(&failure_point, alternates()) {
            if d <= config.swap_search_radius {
                return Some(c.action());
            }
        }
        if let Some((c, _)) = nearest_to(
            &failure_point,
            alternates().filter(|c| c.object_id == failed_object_id),
        ) {
            return Some(c.action());
        }
    }
    select_markov(obs, mask)
}

/// Swap-policy selection. Shrinks circle masks and retries whenever nothing is
/// admissible; gives up only when shrinking is exhausted.
pub fn select_swap(
    obs: &Observation,
    mask: &mut MaskState,
    config: &PolicyConfig,
) -> Option<Selection> {
    let mut mask_shrinks = 0;
    loop {
        if let Some(action) = swap_choice(obs, mask, config) {
            return Some(Selection {
                action,
                mask_shrinks,
            });
        }
        if obs.is_empty() || !shrink_masks(mask, config.swap_min_radius) {
            return None;
        }
        mask_shrinks += 1;
    }
}

pub fn update_swap(
    mask: &mut MaskState,
    action: &Action,
    reward: Reward,
    config: &PolicyConfig,
    n_grippers: u32,
) {
    mask.step += 1;
    if reward == 1 {
        mask.swap_mode = SwapMode::Normal;
        mask.lift_circles_on_success(action.gripper, action.position);
        return;
    }
    match mask.swap_mode {
        SwapMode::Normal => {
            mask.swap_mode = SwapMode::SwapPending {
                failed_gripper: action.gripper,
                failure_point: action.position,
                failed_object_id: action.object_id,
            };
        }
        SwapMode::SwapPending { failure_point, .. } => {
            for point in [failure_point, action.position] {
                for g in 0..n_grippers {
                    mask.add_circle(GripperId(g), point, config.circle_radius);
                }
            }
            mask.swap_mode = SwapMode::Normal;
        }
    }
}

/// A policy instance for one trial: configuration plus its memory.
#[derive(Debug, Clone)]
pub struct Policy {
    config: PolicyConfig,
    n_grippers: u32,
    mask: MaskState,
}

impl Policy {
    pub fn new(config: PolicyConfig, n_grippers: u32) -> Self {
        Self {
            config,
            n_grippers,
            mask: MaskState::default(),
        }
    }

    pub fn kind(&self) -> PolicyKind {
        self.config.kind
    }

    pub fn config(&self) -> &PolicyConfig {
        &self.config
    }

    pub fn mask(&self) -> &MaskState {
        &self.mask
    }

    pub fn select(&mut self, obs: &Observation) -> Option<Selection> {
        let plain = |action| Selection {
            action,
            mask_shrinks: 0,
        };
        match self.config.kind {
            PolicyKind::Markov => select_markov(obs, &MaskState::default()).map(plain),
            PolicyKind::Cluster | PolicyKind::Circle => select_markov(obs, &self.mask).map(plain),
            PolicyKind::Swap => select_swap(obs, &mut self.mask, &self.config),
        }
    }

    pub fn update(&mut self, action: &Action, reward: Reward) {
        match self.config.kind {
            PolicyKind::Markov => {}
            PolicyKind::Cluster => update_cluster(&mut self.mask, action, reward),
            PolicyKind::Circle => {
                update_circle(&mut self.mask, action, reward, self.config.circle_radius)
            }
            PolicyKind::Swap => update_swap(
                &mut self.mask,
                action,
                reward,
                &self.config,
                self.n_grippers,
            ),
        }
    }
}
