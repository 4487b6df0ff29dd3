//! Heap generation and hidden failure-profile assignment for the simulated
//! environments.
//!
//! Geometry, grasp qualities, and failure profiles are drawn from separate
//! streams of the trial seed, so the failure structure of a heap does not
//! depend on where its objects happen to land.

use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::TAU;
use std::fmt;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::Point2;
use crate::model::{
    FailureProfile, GraspSite, GripperId, HeapState, ObjectId, ObjectInstance, SiteId,
};
use crate::seed::{stream_rng, Stream};

/// Rejection-sampling budget for laying out one heap.
pub const PLACEMENT_ATTEMPT_LIMIT: usize = 10_000;

/// Consecutive rejections for one object before the layout is restarted.
const RESTART_AFTER: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum EnvironmentKind {
    TypeFailuresOnly,
    PlacementFailuresOnly,
    BothFailureTypes,
    /// Non-repeating failures: each object gets a success probability per
    /// gripper drawn uniformly from `[lo, hi]`.
    Probabilistic {
        lo: f64,
        hi: f64,
    },
}

impl EnvironmentKind {
    pub fn name(&self) -> &'static str {
        match self {
            EnvironmentKind::TypeFailuresOnly => "type_failures_only",
            EnvironmentKind::PlacementFailuresOnly => "placement_failures_only",
            EnvironmentKind::BothFailureTypes => "both_failure_types",
            EnvironmentKind::Probabilistic { .. } => "probabilistic",
        }
    }
}

impl fmt::Display for EnvironmentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvConfig {
    pub kind: EnvironmentKind,
    pub n_objects: u32,
    pub n_grippers: u32,
    pub placement_block_fraction: f64,
    pub bin_dims: (f64, f64),
    /// Boundary grasp sites per object; one center site is added on top.
    pub boundary_sites: u32,
    pub radius_range: (f64, f64),
}

impl Default for EnvConfig {
    fn default() -> Self {
        Self {
            kind: EnvironmentKind::TypeFailuresOnly,
            n_objects: 12,
            n_grippers: 2,
            placement_block_fraction: 0.30,
            bin_dims: (0.40, 0.40),
            boundary_sites: 16,
            radius_range: (0.03, 0.06),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EnvError {
    #[error("invalid environment config `{key}`: {reason}")]
    Config { key: &'static str, reason: String },
    #[error(
        "could not place all objects within {attempts} rejection-sampling attempts (bin too small)"
    )]
    Placement { attempts: usize },
}

fn config_err(key: &'static str, reason: impl Into<String>) -> EnvError {
    EnvError::Config {
        key,
        reason: reason.into(),
    }
}

impl EnvConfig {
    pub fn validate(&self) -> Result<(), EnvError> {
        if self.n_grippers < 2 {
            return Err(config_err("n_grippers", "at least 2 grippers are required"));
        }
        let f = self.placement_block_fraction;
        if !(f > 0.0 && f < 1.0) {
            return Err(config_err(
                "placement_block_fraction",
                format!("{f} is not in (0, 1)"),
            ));
        }
        if self.boundary_sites == 0 {
            return Err(config_err("boundary_sites", "must be at least 1"));
        }
        let (rmin, rmax) = self.radius_range;
        if !(rmin > 0.0 && rmin <= rmax && rmax.is_finite()) {
            return Err(config_err(
                "radius_range",
                format!("[{rmin}, {rmax}] is not a valid radius range"),
            ));
        }
        let (w, h) = self.bin_dims;
        if !(w > 2.0 * rmax && h > 2.0 * rmax) {
            return Err(config_err(
                "bin_dims",
                format!("{w} x {h} cannot hold an object of radius {rmax}"),
            ));
        }
        match self.kind {
            EnvironmentKind::TypeFailuresOnly => {
                if !self.n_objects.is_multiple_of(self.n_grippers) {
                    return Err(config_err(
                        "n_objects",
                        format!(
                            "{} objects do not split evenly over {} grippers",
                            self.n_objects, self.n_grippers
                        ),
                    ));
                }
            }
            EnvironmentKind::BothFailureTypes => {
                if !self.n_objects.is_multiple_of(2) {
                    return Err(config_err(
                        "n_objects",
                        format!("{} is odd", self.n_objects),
                    ));
                }
                if !(self.n_objects / 2).is_multiple_of(self.n_grippers) {
                    return Err(config_err(
                        "n_objects",
                        format!(
                            "{} type-failure objects do not split evenly over {} grippers",
                            self.n_objects / 2,
                            self.n_grippers
                        ),
                    ));
                }
            }
            EnvironmentKind::Probabilistic { lo, hi } => {
                if !(0.0..=1.0).contains(&lo) || !(0.0..=1.0).contains(&hi) {
                    return Err(config_err(
                        "success_prob",
                        format!("[{lo}, {hi}] is not inside [0, 1]"),
                    ));
                }
                if lo > hi {
                    return Err(config_err("success_prob", format!("lo {lo} > hi {hi}")));
                }
            }
            EnvironmentKind::PlacementFailuresOnly => {}
        }
        Ok(())
    }
}

/// Generates the heap for one trial. Deterministic in `(config, trial_seed)`.
pub fn generate_heap(config: &EnvConfig, trial_seed: u64) -> Result<HeapState, EnvError> {
    config.validate()?;
    let mut heap = layout_heap(
        config,
        trial_seed,
        &mut stream_rng(trial_seed, Stream::Layout),
    )?;
    assign_qualities(&mut heap, &mut stream_rng(trial_seed, Stream::Quality));
    assign_profiles(
        &mut heap,
        config,
        &mut stream_rng(trial_seed, Stream::Profile),
    )?;
    Ok(heap)
}

/// Dispatches to the profile assignment for `config.kind`.
pub fn assign_profiles<R: Rng + ?Sized>(
    heap: &mut HeapState,
    config: &EnvConfig,
    rng: &mut R,
) -> Result<(), EnvError> {
    match config.kind {
        EnvironmentKind::TypeFailuresOnly => assign_type_failures(heap, config.n_grippers, rng),
        EnvironmentKind::PlacementFailuresOnly => {
            assign_placement_failures(heap, config.placement_block_fraction, rng)
        }
        EnvironmentKind::BothFailureTypes => assign_mixed(
            heap,
            config.n_grippers,
            config.placement_block_fraction,
            rng,
        ),
        EnvironmentKind::Probabilistic { lo, hi } => {
            assign_probabilistic(heap, config.n_grippers, lo, hi, rng)
        }
    }
}

/// Places `n_objects` disks by rejection sampling, largest first, restarting
/// with fresh radii when one object keeps getting rejected. Sites sit
/// on an angular grid of the boundary (random phase per object) plus the
/// center. Qualities are left at zero and profiles empty.
pub fn layout_heap<R: Rng + ?Sized>(
    config: &EnvConfig,
    seed: u64,
    rng: &mut R,
) -> Result<HeapState, EnvError> {
    let (w, h) = config.bin_dims;
    let (rmin, rmax) = config.radius_range;
    let draw_radii = |rng: &mut R| {
        let mut radii: Vec<f64> = (0..config.n_objects)
            .map(|_| rng.gen_range(rmin..=rmax))
            .collect();
        radii.sort_by(|a, b| b.total_cmp(a));
        radii
    };
    let mut radii = draw_radii(rng);

    let mut placed: Vec<(Point2, f64)> = Vec::with_capacity(radii.len());
    let mut attempts = 0usize;
    let mut stuck = 0usize;
    while placed.len() < radii.len() {
        if attempts == PLACEMENT_ATTEMPT_LIMIT {
            return Err(EnvError::Placement { attempts });
        }
        attempts += 1;
        let r = radii[placed.len()];
        let c = Point2::new(rng.gen_range(r..=w - r), rng.gen_range(r..=h - r));
        if placed.iter().all(|(pc, pr)| pc.distance(&c) > pr + r) {
            placed.push((c, r));
            stuck = 0;
        } else {
            stuck += 1;
            if stuck == RESTART_AFTER {
                // Dead end: redraw sizes and start over within the same budget.
                placed.clear();
                radii = draw_radii(rng);
                stuck = 0;
            }
        }
    }

    let n_boundary = config.boundary_sites;
    let mut objects = BTreeMap::new();
    for (i, (center, radius)) in placed.into_iter().enumerate() {
        let phase = rng.gen_range(0.0..TAU / n_boundary as f64);
        let mut sites: Vec<GraspSite> = (0..n_boundary)
            .map(|k| GraspSite {
                id: SiteId(k),
                position: center.polar_offset(radius, phase + TAU * k as f64 / n_boundary as f64),
                quality: 0.0,
            })
            .collect();
        sites.push(GraspSite {
            id: SiteId(n_boundary),
            position: center,
            quality: 0.0,
        });
        let id = ObjectId(i as u32);
        objects.insert(
            id,
            ObjectInstance {
                id,
                center,
                footprint_radius: radius,
                sites,
                hidden: FailureProfile::default(),
            },
        );
    }
    Ok(HeapState {
        bin_dims: config.bin_dims,
        n_grippers: config.n_grippers,
        remaining: objects.keys().copied().collect(),
        objects,
        seed,
    })
}

/// Draws every site's quality i.i.d. uniform on [0, 1], independently of
/// the hidden profiles.
pub fn assign_qualities<R: Rng + ?Sized>(heap: &mut HeapState, rng: &mut R) {
    for object in heap.objects.values_mut() {
        for site in &mut object.sites {
            site.quality = rng.gen_range(0.0..=1.0);
        }
    }
}

fn balanced_gripper_labels<R: Rng + ?Sized>(
    count: usize,
    n_grippers: u32,
    rng: &mut R,
) -> Vec<GripperId> {
    let per = count / n_grippers as usize;
    let mut labels: Vec<GripperId> = (0..n_grippers)
        .flat_map(|g| std::iter::repeat_n(GripperId(g), per))
        .collect();
    labels.shuffle(rng);
    labels
}

fn check_type_split(count: usize, n_grippers: u32) -> Result<(), EnvError> {
    if n_grippers < 2 {
        return Err(config_err(
            "n_grippers",
            "type failures need at least 2 grippers or no object is pickable",
        ));
    }
    if !count.is_multiple_of(n_grippers as usize) {
        return Err(config_err(
            "n_objects",
            format!("{count} objects do not split evenly over {n_grippers} grippers"),
        ));
    }
    Ok(())
}

/// Gives every object exactly one type-failing gripper, balanced so each
/// gripper fails on `n_objects / n_grippers` objects.
pub fn assign_type_failures<R: Rng + ?Sized>(
    heap: &mut HeapState,
    n_grippers: u32,
    rng: &mut R,
) -> Result<(), EnvError> {
    check_type_split(heap.objects.len(), n_grippers)?;
    let labels = balanced_gripper_labels(heap.objects.len(), n_grippers, rng);
    for (object, gripper) in heap.objects.values_mut().zip(labels) {
        object.hidden = FailureProfile {
            type_failing_grippers: [gripper].into(),
            ..Default::default()
        };
    }
    Ok(())
}

fn validate_fraction(fraction: f64) -> Result<(), EnvError> {
    if fraction > 0.0 && fraction < 1.0 {
        Ok(())
    } else {
        Err(config_err(
            "placement_block_fraction",
            format!("{fraction} is not in (0, 1)"),
        ))
    }
}

fn blocked_run<R: Rng + ?Sized>(
    object: &ObjectInstance,
    fraction: f64,
    rng: &mut R,
) -> BTreeSet<SiteId> {
    let n = object.boundary_site_count();
    if n == 0 {
        return BTreeSet::new();
    }
    let count = (fraction * n as f64).floor() as usize;
    let start = rng.gen_range(0..n);
    (0..count)
        .map(|k| SiteId(((start + k) % n) as u32))
        .collect()
}

/// Blocks a contiguous run of `floor(fraction * boundary sites)` boundary
/// sites on every object, for all grippers. The center site stays open.
pub fn assign_placement_failures<R: Rng + ?Sized>(
    heap: &mut HeapState,
    fraction: f64,
    rng: &mut R,
) -> Result<(), EnvError> {
    validate_fraction(fraction)?;
    for object in heap.objects.values_mut() {
        object.hidden = FailureProfile {
            blocked_sites: blocked_run(object, fraction, rng),
            ..Default::default()
        };
    }
    Ok(())
}

/// Half the objects get balanced type failures, the other half placement
/// failures. No object gets both.
pub fn assign_mixed<R: Rng + ?Sized>(
    heap: &mut HeapState,
    n_grippers: u32,
    fraction: f64,
    rng: &mut R,
) -> Result<(), EnvError> {
    let n = heap.objects.len();
    if !n.is_multiple_of(2) {
        return Err(config_err("n_objects", format!("{n} is odd")));
    }
    check_type_split(n / 2, n_grippers)?;
    validate_fraction(fraction)?;

    let mut ids: Vec<ObjectId> = heap.objects.keys().copied().collect();
    ids.shuffle(rng);
    let (type_ids, placement_ids) = ids.split_at(n / 2);
    let type_ids: BTreeSet<ObjectId> = type_ids.iter().copied().collect();
    let placement_ids: BTreeSet<ObjectId> = placement_ids.iter().copied().collect();

    let labels = balanced_gripper_labels(type_ids.len(), n_grippers, rng);
    for (id, gripper) in type_ids.iter().zip(labels) {
        let object = heap.objects.get_mut(id).expect("id from key set");
        object.hidden = FailureProfile {
            type_failing_grippers: [gripper].into(),
            ..Default::default()
        };
    }
    for id in &placement_ids {
        let object = heap.objects.get_mut(id).expect("id from key set");
        object.hidden = FailureProfile {
            blocked_sites: blocked_run(object, fraction, rng),
            ..Default::default()
        };
    }
    Ok(())
}

/// Draws a success probability per (object, gripper) uniformly from `[lo, hi]`.
pub fn assign_probabilistic<R: Rng + ?Sized>(
    heap: &mut HeapState,
    n_grippers: u32,
    lo: f64,
    hi: f64,
    rng: &mut R,
) -> Result<(), EnvError> {
    if !(0.0..=1.0).contains(&lo) || !(0.0..=1.0).contains(&hi) || lo > hi {
        return Err(config_err(
            "success_prob",
            format!("[{lo}, {hi}] is not a sub-range of [0, 1]"),
        ));
    }
    for object in heap.objects.values_mut() {
        let probs = (0..n_grippers)
            .map(|g| (GripperId(g), rng.gen_range(lo..=hi)))
            .collect();
        object.hidden = FailureProfile {
            per_gripper_success_prob: Some(probs),
            ..Default::default()
        };
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{evaluate_grasp, Action};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn config(kind: EnvironmentKind) -> EnvConfig {
        EnvConfig {
            kind,
            ..Default::default()
        }
    }

    fn count_type_failures(heap: &HeapState, gripper: u32) -> usize {
        heap.objects
            .values()
            .filter(|o| o.hidden.type_failing_grippers.contains(&GripperId(gripper)))
            .count()
    }

    #[test]
    fn same_seed_same_heap() {
        let c = config(EnvironmentKind::BothFailureTypes);
        assert_eq!(generate_heap(&c, 7).unwrap(), generate_heap(&c, 7).unwrap());
        assert_ne!(generate_heap(&c, 7).unwrap(), generate_heap(&c, 8).unwrap());
    }

    #[test]
    fn zero_objects_gives_empty_heap() {
        let c = EnvConfig {
            n_objects: 0,
            ..config(EnvironmentKind::TypeFailuresOnly)
        };
        let heap = generate_heap(&c, 1).unwrap();
        assert!(heap.objects.is_empty());
        assert!(heap.remaining.is_empty());
    }

    #[test]
    fn default_layout_has_no_overlaps_and_fits_the_bin() {
        let c = EnvConfig::default();
        for seed in 0..200 {
            let heap = generate_heap(&c, seed).unwrap();
            let objs: Vec<_> = heap.objects.values().collect();
            assert_eq!(objs.len(), 12);
            for (i, a) in objs.iter().enumerate() {
                let r = a.footprint_radius;
                assert!((0.03..=0.06).contains(&r));
                assert!(a.center.x - r >= 0.0 && a.center.x + r <= 0.40);
                assert!(a.center.y - r >= 0.0 && a.center.y + r <= 0.40);
                for site in &a.sites {
                    assert!(site.position.distance(&a.center) <= r + 1e-12);
                    assert!((0.0..=1.0).contains(&site.quality));
                }
                for b in &objs[i + 1..] {
                    assert!(a.center.distance(&b.center) > a.footprint_radius + b.footprint_radius);
                }
            }
        }
    }

    #[test]
    fn crowded_bin_reports_the_attempt_limit() {
        let c = EnvConfig {
            n_objects: 200,
            ..EnvConfig::default()
        };
        assert_eq!(
            generate_heap(&c, 3),
            Err(EnvError::Placement {
                attempts: PLACEMENT_ATTEMPT_LIMIT
            })
        );
    }

    #[test]
    fn type_failures_split_six_and_six() {
        let c = config(EnvironmentKind::TypeFailuresOnly);
        for seed in 0..50 {
            let heap = generate_heap(&c, seed).unwrap();
            assert_eq!(count_type_failures(&heap, 0), 6);
            assert_eq!(count_type_failures(&heap, 1), 6);
            for o in heap.objects.values() {
                assert_eq!(o.hidden.type_failing_grippers.len(), 1);
                assert!(o.hidden.blocked_sites.is_empty());
            }
        }
    }

    #[test]
    fn each_object_pickable_by_all_but_one_gripper() {
        let c = EnvConfig {
            n_grippers: 3,
            ..config(EnvironmentKind::TypeFailuresOnly)
        };
        let heap = generate_heap(&c, 11).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for o in heap.objects.values() {
            let pickable = (0..3)
                .filter(|&g| {
                    o.sites.iter().any(|s| {
                        let a = Action {
                            gripper: GripperId(g),
                            object_id: o.id,
                            site_id: s.id,
                            position: s.position,
                        };
                        evaluate_grasp(&heap, &a, &mut rng).unwrap() == 1
                    })
                })
                .count();
            assert_eq!(pickable, 2);
        }
    }

    #[test]
    fn single_gripper_rejected() {
        let c = EnvConfig {
            n_grippers: 1,
            ..config(EnvironmentKind::TypeFailuresOnly)
        };
        assert!(matches!(
            generate_heap(&c, 0),
            Err(EnvError::Config {
                key: "n_grippers",
                ..
            })
        ));
        let mut heap =
            layout_heap(&EnvConfig::default(), 0, &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
        assert!(assign_type_failures(&mut heap, 1, &mut ChaCha8Rng::seed_from_u64(0)).is_err());
    }

    #[test]
    fn indivisible_type_split_rejected() {
        let mut heap = layout_heap(
            &EnvConfig {
                n_objects: 7,
                ..EnvConfig::default()
            },
            0,
            &mut ChaCha8Rng::seed_from_u64(0),
        )
        .unwrap();
        assert!(matches!(
            assign_type_failures(&mut heap, 2, &mut ChaCha8Rng::seed_from_u64(0)),
            Err(EnvError::Config {
                key: "n_objects",
                ..
            })
        ));
    }

    fn is_contiguous_run(blocked: &BTreeSet<SiteId>, n: u32) -> bool {
        // A cyclic run of k sites has exactly one member whose predecessor is absent.
        let starts = blocked
            .iter()
            .filter(|s| !blocked.contains(&SiteId((s.0 + n - 1) % n)))
            .count();
        blocked.is_empty() || starts == 1 || blocked.len() == n as usize
    }

    #[test]
    fn placement_failures_block_four_contiguous_sites() {
        let c = config(EnvironmentKind::PlacementFailuresOnly);
        for seed in 0..50 {
            let heap = generate_heap(&c, seed).unwrap();
            for o in heap.objects.values() {
                assert_eq!(o.hidden.blocked_sites.len(), 4);
                assert!(is_contiguous_run(&o.hidden.blocked_sites, 16));
                assert!(
                    !o.hidden.blocked_sites.contains(&SiteId(16)),
                    "center never blocked"
                );
                assert!(o.hidden.type_failing_grippers.is_empty());
            }
        }
    }

    #[test]
    fn tiny_fraction_blocks_nothing() {
        let mut heap =
            layout_heap(&EnvConfig::default(), 0, &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
        assign_placement_failures(&mut heap, 1e-9, &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
        assert!(heap
            .objects
            .values()
            .all(|o| o.hidden.blocked_sites.is_empty()));
    }

    #[test]
    fn placement_assignment_repeats_with_same_rng_seed() {
        let base =
            layout_heap(&EnvConfig::default(), 0, &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
        let mut a = base.clone();
        let mut b = base;
        assign_placement_failures(&mut a, 0.3, &mut ChaCha8Rng::seed_from_u64(5)).unwrap();
        assign_placement_failures(&mut b, 0.3, &mut ChaCha8Rng::seed_from_u64(5)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn fraction_outside_unit_interval_rejected() {
        let mut heap =
            layout_heap(&EnvConfig::default(), 0, &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(assign_placement_failures(&mut heap, 0.0, &mut rng).is_err());
        assert!(assign_placement_failures(&mut heap, 1.0, &mut rng).is_err());
    }

    #[test]
    fn mixed_environment_partition() {
        let c = config(EnvironmentKind::BothFailureTypes);
        for seed in 0..50 {
            let heap = generate_heap(&c, seed).unwrap();
            assert_eq!(count_type_failures(&heap, 0), 3);
            assert_eq!(count_type_failures(&heap, 1), 3);
            let typed: BTreeSet<ObjectId> = heap
                .objects
                .values()
                .filter(|o| !o.hidden.type_failing_grippers.is_empty())
                .map(|o| o.id)
                .collect();
            let placed: BTreeSet<ObjectId> = heap
                .objects
                .values()
                .filter(|o| !o.hidden.blocked_sites.is_empty())
                .map(|o| o.id)
                .collect();
            assert_eq!(placed.len(), 6);
            assert!(typed.is_disjoint(&placed));
            let union: BTreeSet<ObjectId> = typed.union(&placed).copied().collect();
            assert_eq!(union, heap.objects.keys().copied().collect());
        }
    }

    #[test]
    fn mixed_rejects_odd_counts() {
        let c = EnvConfig {
            n_objects: 11,
            ..config(EnvironmentKind::BothFailureTypes)
        };
        assert!(matches!(
            c.validate(),
            Err(EnvError::Config {
                key: "n_objects",
                ..
            })
        ));
        let mut heap = layout_heap(&c, 0, &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
        assert!(assign_mixed(&mut heap, 2, 0.3, &mut ChaCha8Rng::seed_from_u64(0)).is_err());
    }

    #[test]
    fn probabilistic_assignment() {
        let c = config(EnvironmentKind::Probabilistic { lo: 0.85, hi: 0.95 });
        let heap = generate_heap(&c, 4).unwrap();
        assert_eq!(heap, generate_heap(&c, 4).unwrap());
        for o in heap.objects.values() {
            let probs = o.hidden.per_gripper_success_prob.as_ref().unwrap();
            assert_eq!(probs.len(), 2);
            assert!(probs.values().all(|p| (0.85..=0.95).contains(p)));
            assert!(o.hidden.type_failing_grippers.is_empty() && o.hidden.blocked_sites.is_empty());
        }
        let degenerate = generate_heap(
            &config(EnvironmentKind::Probabilistic { lo: 1.0, hi: 1.0 }),
            4,
        )
        .unwrap();
        assert!(degenerate.objects.values().all(|o| o
            .hidden
            .per_gripper_success_prob
            .as_ref()
            .unwrap()
            .values()
            .all(|&p| p == 1.0)));
    }

    #[test]
    fn inverted_probability_range_rejected() {
        let c = config(EnvironmentKind::Probabilistic { lo: 0.9, hi: 0.8 });
        assert!(matches!(
            c.validate(),
            Err(EnvError::Config {
                key: "success_prob",
                ..
            })
        ));
    }

    #[test]
    fn profile_structure_independent_of_layout() {
        for kind in [
            EnvironmentKind::TypeFailuresOnly,
            EnvironmentKind::PlacementFailuresOnly,
            EnvironmentKind::BothFailureTypes,
        ] {
            let c = config(kind);
            let mut a = layout_heap(&c, 1, &mut stream_rng(1, Stream::Layout)).unwrap();
            let mut b = layout_heap(&c, 2, &mut stream_rng(2, Stream::Layout)).unwrap();
            assert_ne!(
                a.objects[&ObjectId(0)].center,
                b.objects[&ObjectId(0)].center
            );
            assign_profiles(&mut a, &c, &mut stream_rng(99, Stream::Profile)).unwrap();
            assign_profiles(&mut b, &c, &mut stream_rng(99, Stream::Profile)).unwrap();
            for g in 0..2 {
                assert_eq!(count_type_failures(&a, g), count_type_failures(&b, g));
            }
            let runs = |h: &HeapState| {
                h.objects
                    .values()
                    .map(|o| o.hidden.blocked_sites.len())
                    .collect::<Vec<_>>()
            };
            assert_eq!(runs(&a), runs(&b));
        }
    }
}
