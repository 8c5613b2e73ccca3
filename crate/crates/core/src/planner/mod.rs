//! Hierarchical planner: a contact primitive builds the contacts of the goal
//! shape, then a shape primitive pulls the worst-placed keypoints onto
//! their goal positions. Replans after every execution.

mod benchmarks;
mod episode;
mod path;
mod primitives;

pub use benchmarks::{
    benchmark_satisfied, compute_benchmarks, contact_benchmark_indices, contact_satisfied, contact_search,
    extend_benchmark, order_contacts_along, pair_index, BenchmarkSet, ContactBenchmarks,
};
pub use episode::{run_episode, EpisodeFrame, EpisodeLog, StepRecord};
pub use path::{arc_path, potential_field_path};
pub use primitives::{
    contact_primitive_step, goal_winding, grasp_candidates, grasp_plan, shape_error, shape_primitive_step, worst_pair,
    PlanContext, Primitive, PrimitivePlan,
};

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Planner thresholds. Distances in meters, angles in radians.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlannerConfig {
    /// Inner radius of the benchmark search annulus.
    pub tau_i: f64,
    /// Outer radius of the benchmark search annulus.
    pub tau_e: f64,
    /// Distance bound for a state point to satisfy a benchmark.
    pub tau_c: f64,
    /// Angle bound for a state point to satisfy a benchmark.
    pub tau_a: f64,
    /// Radius of the extended benchmarks the moving gripper visits.
    pub tau_b: f64,
    pub iou_threshold: f64,
    pub max_steps: usize,
    /// Heading at the extended benchmarks follows the goal's winding around
    /// the contact; when false it is always the counter-clockwise
    /// perpendicular.
    #[serde(default = "yes")]
    pub follow_goal_winding: bool,
}

fn yes() -> bool {
    true
}

impl PlannerConfig {
    /// Defaults derived from contact radius and rope half thickness.
    pub fn for_geometry(radius: f64, half_thickness: f64) -> Self {
        let tau_e = radius + 6.0 * half_thickness;
        Self {
            tau_i: radius + half_thickness,
            tau_e,
            tau_c: tau_e,
            tau_a: std::f64::consts::FRAC_PI_3,
            tau_b: radius + 0.02,
            iou_threshold: 0.40,
            max_steps: 20,
            follow_goal_winding: true,
        }
    }

    pub fn validate(&self, radius: f64) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(format!("planner config: {m}")));
        if !(self.tau_i < self.tau_e) {
            return bad("tau_i must be below tau_e");
        }
        if !(self.tau_c > radius) {
            return bad("tau_c must exceed the contact radius");
        }
        if !(0.0 < self.tau_a && self.tau_a < std::f64::consts::PI) {
            return bad("tau_a must lie in (0, pi)");
        }
        if !(self.tau_b > radius) {
            return bad("tau_b must exceed the contact radius");
        }
        if !(0.0..=1.0).contains(&self.iou_threshold) {
            return bad("iou_threshold must lie in [0, 1]");
        }
        Ok(())
    }
}

impl Default for PlannerConfig {
    fn default() -> Self {
        Self::for_geometry(
            crate::sim::DEFAULT_CONTACT_RADIUS,
            crate::sim::SimConfig::default().half_thickness,
        )
    }
}
