//! Quasi-static node-chain rope simulator with two grippers and fixed
//! circular contacts.

mod action;
mod relax;
mod rope;
mod world;

pub use action::{ActionPlan, ArmPlan, Step};
pub use relax::{relax, RelaxReport};
pub use rope::Rope;
pub use world::{apply_action, execute, observe, reachable, Execution, WorldState};

use serde::{Deserialize, Serialize};

use crate::geometry::point_segment_distance;
use crate::{Error, Point, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Arm {
    Left,
    Right,
}

impl Arm {
    pub const BOTH: [Arm; 2] = [Arm::Left, Arm::Right];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Arm::Left => "left",
            Arm::Right => "right",
        }
    }

    pub fn other(self) -> Arm {
        match self {
            Arm::Left => Arm::Right,
            Arm::Right => Arm::Left,
        }
    }
}

/// Planar gripper pose. While grasping, `heading` is the direction of the
/// held rope's tangent toward higher node indices.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pose {
    pub position: Point,
    pub heading: f64,
}

impl Pose {
    pub fn new(x: f64, y: f64, heading: f64) -> Self {
        Self {
            position: Point::new(x, y),
            heading,
        }
    }

    pub fn at(position: Point, heading: f64) -> Self {
        Self { position, heading }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Contact {
    pub center: Point,
    #[serde(default = "default_contact_radius")]
    pub radius: f64,
}

pub const DEFAULT_CONTACT_RADIUS: f64 = 0.04;

fn default_contact_radius() -> f64 {
    DEFAULT_CONTACT_RADIUS
}

impl Contact {
    pub fn new(x: f64, y: f64, radius: f64) -> Self {
        Self {
            center: Point::new(x, y),
            radius,
        }
    }

    /// True if segment `a`-`b` comes strictly closer than `inflated` to the
    /// center.
    pub fn blocks_segment(&self, a: &Point, b: &Point, inflated: f64) -> bool {
        point_segment_distance(&self.center, a, b) < inflated - 1e-12
    }
}

/// Ring-shaped reachable region of one arm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Workspace {
    pub center: Point,
    pub r_inner: f64,
    pub r_outer: f64,
}

impl Workspace {
    pub fn new(x: f64, y: f64, r_inner: f64, r_outer: f64) -> Result<Self> {
        if !(0.0 < r_inner && r_inner < r_outer) {
            return Err(Error::Config(format!(
                "workspace radii must satisfy 0 < r_inner < r_outer, got {r_inner}, {r_outer}"
            )));
        }
        Ok(Self {
            center: Point::new(x, y),
            r_inner,
            r_outer,
        })
    }

    pub fn contains(&self, p: &Point) -> bool {
        let d = (p - self.center).norm();
        self.r_inner <= d && d <= self.r_outer
    }

    /// Bases 0.6 m apart on the x axis.
    pub fn default_pair() -> [Workspace; 2] {
        [
            Workspace {
                center: Point::new(-0.3, 0.0),
                r_inner: 0.05,
                r_outer: 0.5,
            },
            Workspace {
                center: Point::new(0.3, 0.0),
                r_inner: 0.05,
                r_outer: 0.5,
            },
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GripperState {
    Free,
    Grasping { node: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Gripper {
    pub arm: Arm,
    pub state: GripperState,
    pub pose: Pose,
}

impl Gripper {
    pub fn grasped_node(&self) -> Option<usize> {
        match self.state {
            GripperState::Grasping { node } => Some(node),
            GripperState::Free => None,
        }
    }
}

/// Simulation parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimConfig {
    pub nodes: usize,
    /// Rope half thickness in meters.
    pub half_thickness: f64,
    pub max_iterations: usize,
    /// Convergence threshold on the largest constraint violation (m).
    pub tolerance: f64,
    /// Extra margin kept between gripper and contact surface; the rope half
    /// thickness is used if larger.
    pub gripper_clearance: f64,
    /// Nodes bending tighter than this radius are smoothed.
    pub min_bend_radius: f64,
    /// A move stops once any segment stretches beyond this strain...
    pub max_strain: f64,
    /// ...or the total length drifts beyond this fraction.
    pub max_drift: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            nodes: 64,
            half_thickness: 0.01,
            max_iterations: 200,
            tolerance: 1e-4,
            gripper_clearance: 0.01,
            min_bend_radius: 0.025,
            max_strain: 0.02,
            max_drift: 0.005,
        }
    }
}

impl SimConfig {
    pub fn clearance(&self) -> f64 {
        self.gripper_clearance.max(self.half_thickness)
    }

    pub fn validate(&self) -> Result<()> {
        if self.nodes < 16 {
            return Err(Error::Config("rope needs at least 16 nodes".into()));
        }
        if !(self.half_thickness > 0.0 && self.tolerance > 0.0 && self.min_bend_radius > 0.0) {
            return Err(Error::Config("simulation lengths must be positive".into()));
        }
        if self.max_iterations == 0 {
            return Err(Error::Config("max_iterations must be positive".into()));
        }
        Ok(())
    }
}
