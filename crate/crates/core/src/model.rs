//! Domain types shared by the simulator, the policies, and the metric code,
//! plus the ground-truth grasp outcome evaluator.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::Point2;

/// Index into the configured gripper set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct GripperId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ObjectId(pub u32);

/// Grasp site index, unique within its object.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SiteId(pub u32);

impl fmt::Display for GripperId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "g{}", self.0)
    }
}

impl fmt::Display for ObjectId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "o{}", self.0)
    }
}

impl fmt::Display for SiteId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "s{}", self.0)
    }
}

/// Grasp reward: 1 on a successful pick, 0 otherwise.
pub type Reward = u8;

/// A discrete grasp point on an object. `quality` is the predicted grasp
/// quality in [0, 1], standing in for a grasp-quality network's score.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraspSite {
    pub id: SiteId,
    pub position: Point2,
    pub quality: f64,
}

/// Ground-truth failure properties. Never visible to a policy.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct FailureProfile {
    pub type_failing_grippers: BTreeSet<GripperId>,
    pub blocked_sites: BTreeSet<SiteId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub per_gripper_success_prob: Option<BTreeMap<GripperId, f64>>,
}

impl FailureProfile {
    pub fn is_empty(&self) -> bool {
        self.type_failing_grippers.is_empty()
            && self.blocked_sites.is_empty()
            && self.per_gripper_success_prob.is_none()
    }
}

/// A disk-shaped object with its grasp sites and hidden failure profile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectInstance {
    pub id: ObjectId,
    pub center: Point2,
    pub footprint_radius: f64,
    /// Boundary sites in angular order, followed by the center site.
    pub sites: Vec<GraspSite>,
    pub hidden: FailureProfile,
}

impl ObjectInstance {
    pub fn site(&self, id: SiteId) -> Option<&GraspSite> {
        self.sites.iter().find(|s| s.id == id)
    }

    /// Number of sites on the boundary (all but the center site).
    pub fn boundary_site_count(&self) -> usize {
        self.sites.len().saturating_sub(1)
    }

    pub fn center_site(&self) -> Option<&GraspSite> {
        self.sites.last()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeapState {
    pub bin_dims: (f64, f64),
    pub n_grippers: u32,
    pub objects: BTreeMap<ObjectId, ObjectInstance>,
    pub remaining: BTreeSet<ObjectId>,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Action {
    pub gripper: GripperId,
    pub object_id: ObjectId,
    pub site_id: SiteId,
    pub position: Point2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Termination {
    AllPicked,
    NoGraspAvailable,
    ConsecutiveFailureLimit,
}

impl fmt::Display for Termination {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Termination::AllPicked => "all_picked",
            Termination::NoGraspAvailable => "no_grasp_available",
            Termination::ConsecutiveFailureLimit => "consecutive_failure_limit",
        };
        f.write_str(s)
    }
}

/// One executed grasp attempt.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub action: Action,
    pub reward: Reward,
    pub cumulative_time_s: f64,
    /// Mask-shrink steps the policy applied while selecting this action.
    #[serde(default)]
    pub mask_shrinks: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialLog {
    pub policy_name: String,
    pub environment: String,
    pub trial_index: u64,
    pub seed: u64,
    pub n_objects: u32,
    pub termination: Termination,
    pub records: Vec<TrialRecord>,
}

impl TrialLog {
    pub fn rewards(&self) -> Vec<Reward> {
        self.records.iter().map(|r| r.reward).collect()
    }

    pub fn successes(&self) -> u32 {
        self.records.iter().filter(|r| r.reward == 1).count() as u32
    }
}

/// Raised when a caller breaks a precondition. Signals a bug in the caller,
/// never a failed grasp.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ContractViolation {
    #[error("object {0} is not in the heap")]
    UnknownObject(ObjectId),
    #[error("object {0} was already removed")]
    ObjectRemoved(ObjectId),
    #[error("object {object} has no site {site}")]
    UnknownSite { object: ObjectId, site: SiteId },
    #[error("action position for {object}/{site} does not match the site position")]
    PositionMismatch { object: ObjectId, site: SiteId },
    #[error("gripper {gripper} has no success probability for object {object}")]
    MissingProbability {
        object: ObjectId,
        gripper: GripperId,
    },
}

impl HeapState {
    pub fn remaining_objects(&self) -> impl Iterator<Item = &ObjectInstance> {
        self.remaining.iter().filter_map(|id| self.objects.get(id))
    }

    /// Removes a picked object from the remaining set in place.
    pub fn take_object(&mut self, object_id: ObjectId) -> Result<(), ContractViolation> {
        if !self.objects.contains_key(&object_id) {
            return Err(ContractViolation::UnknownObject(object_id));
        }
        if !self.remaining.remove(&object_id) {
            return Err(ContractViolation::ObjectRemoved(object_id));
        }
        Ok(())
    }

    fn live_site(
        &self,
        action: &Action,
    ) -> Result<(&ObjectInstance, &GraspSite), ContractViolation> {
        let object = self
            .objects
            .get(&action.object_id)
            .ok_or(ContractViolation::UnknownObject(action.object_id))?;
        if !self.remaining.contains(&action.object_id) {
            return Err(ContractViolation::ObjectRemoved(action.object_id));
        }
        let site = object
            .site(action.site_id)
            .ok_or(ContractViolation::UnknownSite {
                object: action.object_id,
                site: action.site_id,
            })?;
        if site.position != action.position {
            return Err(ContractViolation::PositionMismatch {
                object: action.object_id,
                site: action.site_id,
            });
        }
        Ok((object, site))
    }
}

/// Returns a copy of `heap` with `object_id` removed from the remaining set.
pub fn remove_object(
    heap: &HeapState,
    object_id: ObjectId,
) -> Result<HeapState, ContractViolation> {
    let mut next = heap.clone();
    next.take_object(object_id)?;
    Ok(next)
}

/// Ground-truth outcome of executing `action` on `heap`.
///
/// Type-failing grippers and blocked sites always yield 0. Otherwise the grasp
/// succeeds, unless the object carries per-gripper success probabilities, in
/// which case one Bernoulli draw is taken from `rng`. The heap is not modified.
pub fn evaluate_grasp<R: Rng + ?Sized>(
    heap: &HeapState,
    action: &Action,
    rng: &mut R,
) -> Result<Reward, ContractViolation> {
    let (object, _) = heap.live_site(action)?;
    let hidden = &object.hidden;
    if hidden.type_failing_grippers.contains(&action.gripper)
        || hidden.blocked_sites.contains(&action.site_id)
    {
        return Ok(0);
    }
    match &hidden.per_gripper_success_prob {
        None => Ok(1),
        Some(probs) => {
            let p = *probs
                .get(&action.gripper)
                .ok_or(ContractViolation::MissingProbability {
                    object: action.object_id,
                    gripper: action.gripper,
                })?;
            Ok(u8::from(rng.gen::<f64>() < p))
        }
    }
}
