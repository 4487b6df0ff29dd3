//! What a policy is allowed to see: remaining objects with stable identity,
//! their geometry, and predicted grasp qualities. Failure profiles are not
//! carried over.

use serde::{Deserialize, Serialize};

use crate::geometry::Point2;
use crate::model::{Action, GripperId, HeapState, ObjectId, SiteId};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservedSite {
    pub id: SiteId,
    pub position: Point2,
    pub quality: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservedObject {
    pub id: ObjectId,
    pub center: Point2,
    pub footprint_radius: f64,
    pub sites: Vec<ObservedSite>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub n_grippers: u32,
    /// Sorted by object id.
    pub objects: Vec<ObservedObject>,
}

/// A (gripper, object, site) triple the policy could execute.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Candidate {
    pub gripper: GripperId,
    pub object_id: ObjectId,
    pub site_id: SiteId,
    pub position: Point2,
    pub quality: f64,
}

impl Candidate {
    pub fn action(&self) -> Action {
        Action {
            gripper: self.gripper,
            object_id: self.object_id,
            site_id: self.site_id,
            position: self.position,
        }
    }

    /// Lexicographic tie-break key.
    pub fn key(&self) -> (ObjectId, SiteId, GripperId) {
        (self.object_id, self.site_id, self.gripper)
    }
}

impl Observation {
    pub fn from_heap(heap: &HeapState) -> Self {
        let objects = heap
            .remaining_objects()
            .map(|o| ObservedObject {
                id: o.id,
                center: o.center,
                footprint_radius: o.footprint_radius,
                sites: o
                    .sites
                    .iter()
                    .map(|s| ObservedSite {
                        id: s.id,
                        position: s.position,
                        quality: s.quality,
                    })
                    .collect(),
            })
            .collect();
        Self {
            n_grippers: heap.n_grippers,
            objects,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.objects.is_empty()
    }

    pub fn contains_object(&self, id: ObjectId) -> bool {
        self.objects.binary_search_by_key(&id, |o| o.id).is_ok()
    }

    /// All candidates in (object, site, gripper) lexicographic order. Every
    /// gripper sees the same quality at a site.
    pub fn candidates(&self) -> impl Iterator<Item = Candidate> + '_ {
        let n_grippers = self.n_grippers;
        self.objects.iter().flat_map(move |o| {
            o.sites.iter().flat_map(move |s| {
                (0..n_grippers).map(move |g| Candidate {
                    gripper: GripperId(g),
                    object_id: o.id,
                    site_id: s.id,
                    position: s.position,
                    quality: s.quality,
                })
            })
        })
    }
}
