use std::f64::consts::{FRAC_PI_2, PI, TAU};

use super::relax::{relax_nodes, Pin, RelaxReport};
use super::{ActionPlan, Arm, Contact, Gripper, GripperState, Pose, Rope, SimConfig, Workspace};
use crate::geometry::{rasterize, Roi};
use crate::{BinaryImage, Error, Result, Vec2};

/// Largest heading change per substep (rad).
const MAX_TURN_PER_SUBSTEP: f64 = 0.5;

/// Complete simulator state. A value type: stepping returns a new state.
#[derive(Debug, Clone, PartialEq)]
pub struct WorldState {
    pub rope: Rope,
    pub contacts: Vec<Contact>,
    pub grippers: [Gripper; 2],
    pub workspaces: [Workspace; 2],
    pub config: SimConfig,
    pub last_relax: Option<RelaxReport>,
}

impl WorldState {
    /// Build a world with free grippers and settle the rope once.
    pub fn new(rope: Rope, contacts: Vec<Contact>, workspaces: [Workspace; 2], config: SimConfig) -> Result<Self> {
        config.validate()?;
        for (i, c) in contacts.iter().enumerate() {
            if !(c.radius > 0.0) {
                return Err(Error::Config(format!("contact {} has non-positive radius", i + 1)));
            }
            for (j, d) in contacts.iter().enumerate().skip(i + 1) {
                if (c.center - d.center).norm() < c.radius + d.radius + 2.0 * rope.half_thickness {
                    return Err(Error::Config(format!("contacts {} and {} overlap", i + 1, j + 1)));
                }
            }
        }
        let grippers = [Arm::Left, Arm::Right].map(|arm| {
            let ws = workspaces[arm.index()];
            let inward = if arm == Arm::Left { 1.0 } else { -1.0 };
            Gripper {
                arm,
                state: GripperState::Free,
                pose: Pose::at(ws.center + Vec2::new(inward * ws.r_inner, 0.0), FRAC_PI_2),
            }
        });
        let mut w = Self {
            rope,
            contacts,
            grippers,
            workspaces,
            config,
            last_relax: None,
        };
        w.relax_in_place();
        Ok(w)
    }

    pub fn gripper(&self, arm: Arm) -> &Gripper {
        &self.grippers[arm.index()]
    }

    pub fn workspace(&self, arm: Arm) -> &Workspace {
        &self.workspaces[arm.index()]
    }

    /// Smallest distance any node keeps to any contact surface, minus the
    /// rope half thickness. Negative means penetration.
    pub fn min_clearance(&self) -> f64 {
        self.rope
            .nodes
            .iter()
            .flat_map(|p| {
                self.contacts
                    .iter()
                    .map(move |c| (p - c.center).norm() - c.radius - self.rope.half_thickness)
            })
            .fold(f64::INFINITY, f64::min)
    }

    fn pins(&self, headings: bool) -> Vec<Pin> {
        let n = self.rope.len();
        let mut pins = Vec::new();
        let held: Vec<usize> = self.grippers.iter().filter_map(Gripper::grasped_node).collect();
        for g in &self.grippers {
            if let GripperState::Grasping { node } = g.state {
                pins.push(Pin {
                    node,
                    target: g.pose.position,
                });
            }
        }
        for g in self.grippers.iter().filter(|_| headings) {
            let GripperState::Grasping { node } = g.state else {
                continue;
            };
            let angle = g.pose.heading;
            let t = Vec2::new(angle.cos(), angle.sin()) * self.rope.segment_length;
            let candidates = [(node.checked_sub(1), -t), (Some(node + 1).filter(|&i| i < n), t)];
            for (idx, off) in candidates {
                let Some(i) = idx else { continue };
                let target = g.pose.position + off;
                let free = !held.contains(&i) && !pins.iter().any(|p| p.node == i);
                let clear = self
                    .contacts
                    .iter()
                    .all(|c| (target - c.center).norm() >= c.radius + self.rope.half_thickness);
                if free && clear {
                    pins.push(Pin { node: i, target });
                }
            }
        }
        pins
    }

    /// Heading pins are dropped when they leave no feasible shape, e.g. on
    /// rope pulled taut around a contact between the two grippers.
    pub(crate) fn relax_in_place(&mut self) -> RelaxReport {
        let start = self.rope.nodes.clone();
        let mut report = self.relax_with(true);
        if !report.converged {
            let strict = std::mem::replace(&mut self.rope.nodes, start);
            let loose = self.relax_with(false);
            if loose.converged || loose.violation < report.violation {
                report = loose;
            } else {
                self.rope.nodes = strict;
            }
        }
        self.last_relax = Some(report);
        report
    }

    fn relax_with(&mut self, headings: bool) -> RelaxReport {
        let pins = self.pins(headings);
        relax_nodes(
            &mut self.rope.nodes,
            self.rope.segment_length,
            self.rope.half_thickness,
            &pins,
            &self.contacts,
            &self.config,
        )
    }
}

/// True iff `pose` lies in the arm's ring and the straight approach from the
/// arm base keeps the gripper clearance to every contact.
pub fn reachable(world: &WorldState, arm: Arm, pose: &Pose) -> bool {
    let ws = world.workspace(arm);
    let clearance = world.config.clearance();
    ws.contains(&pose.position)
        && !world
            .contacts
            .iter()
            .any(|c| c.blocks_segment(&ws.center, &pose.position, c.radius + clearance))
}

/// Rasterize the rope over `roi` into a `width x height` image.
pub fn observe(world: &WorldState, roi: Roi, width: usize, height: usize) -> Result<BinaryImage> {
    rasterize(&world.rope.curve()?, world.rope.half_thickness, width, height, roi)
}

/// Result of [`execute`].
#[derive(Debug, Clone, PartialEq)]
pub struct Execution {
    pub world: WorldState,
    pub substeps: usize,
    /// Motion was cut short because the held rope would have stretched.
    pub taut_stop: bool,
    /// Relaxations that hit the iteration cap.
    pub unconverged: usize,
    /// Largest length drift seen after any substep.
    pub max_drift: f64,
}

/// Apply a plan and return the successor state.
pub fn apply_action(world: &WorldState, plan: &ActionPlan) -> Result<WorldState> {
    execute(world, plan).map(|e| e.world)
}

fn check_plan(world: &WorldState, plan: &ActionPlan) -> Result<()> {
    plan.validate(world.rope.len())?;
    let clearance = world.config.clearance();
    for arm in Arm::BOTH {
        let ws = world.workspace(arm);
        let arm_plan = plan.arm(arm);
        if let Some(node) = arm_plan.grasp_node() {
            let p = world.rope.nodes[node];
            if !ws.contains(&p) {
                return Err(Error::Reachability {
                    arm: arm.name(),
                    x: p.x,
                    y: p.y,
                });
            }
        }
        for pose in arm_plan.path() {
            let p = pose.position;
            if !ws.contains(&p) {
                return Err(Error::Reachability {
                    arm: arm.name(),
                    x: p.x,
                    y: p.y,
                });
            }
            if let Some(k) = world
                .contacts
                .iter()
                .position(|c| (p - c.center).norm() < c.radius + clearance)
            {
                return Err(Error::Collision {
                    arm: arm.name(),
                    x: p.x,
                    y: p.y,
                    contact: k + 1,
                });
            }
        }
    }
    Ok(())
}

/// Shortest signed rotation from `from` to `to`, in `(-pi, pi]`.
fn heading_delta(from: f64, to: f64) -> f64 {
    let d = (to - from).rem_euclid(TAU);
    if d > PI {
        d - TAU
    } else {
        d
    }
}

/// Piecewise-linear pose path with legs weighted by how many substeps they
/// need.
struct Track {
    poses: Vec<Pose>,
    cumulative: Vec<f64>,
}

impl Track {
    fn new(start: Pose, path: &[Pose], max_step: f64) -> Self {
        let mut poses = vec![start];
        let mut cumulative = vec![0.0];
        for p in path {
            let prev = *poses.last().unwrap();
            let turn = heading_delta(prev.heading, p.heading);
            let pose = Pose::at(p.position, prev.heading + turn);
            let weight = ((pose.position - prev.position).norm() / max_step).max(turn.abs() / MAX_TURN_PER_SUBSTEP);
            cumulative.push(cumulative.last().unwrap() + weight);
            poses.push(pose);
        }
        Self { poses, cumulative }
    }

    fn total(&self) -> f64 {
        *self.cumulative.last().unwrap()
    }

    fn at(&self, fraction: f64) -> Pose {
        let total = self.total();
        if total == 0.0 || fraction >= 1.0 {
            return *self.poses.last().unwrap();
        }
        let s = fraction * total;
        let k = self
            .cumulative
            .partition_point(|&c| c <= s)
            .clamp(1, self.poses.len() - 1);
        let (a, b) = (self.poses[k - 1], self.poses[k]);
        let span = self.cumulative[k] - self.cumulative[k - 1];
        let t = if span > 0.0 {
            (s - self.cumulative[k - 1]) / span
        } else {
            1.0
        };
        Pose::at(
            a.position + (b.position - a.position) * t,
            a.heading + (b.heading - a.heading) * t,
        )
    }
}

/// Execute a plan: all grasps, then the moves phase by phase (the k-th
/// moves of both arms run in lockstep, sharing one progress fraction), then
/// all releases. Substeps move each
/// gripper at most half a segment length; the rope is relaxed after every
/// substep. A substep that would stretch the rope beyond the configured
/// strain or drift is undone and ends the motion.
pub fn execute(world: &WorldState, plan: &ActionPlan) -> Result<Execution> {
    check_plan(world, plan)?;
    let mut w = world.clone();
    if plan.is_empty() {
        return Ok(Execution {
            world: w,
            substeps: 0,
            taut_stop: false,
            unconverged: 0,
            max_drift: world.rope.length_drift(),
        });
    }
    let mut unconverged = 0;
    let mut max_drift: f64 = 0.0;
    let settle = |w: &mut WorldState, unconverged: &mut usize| {
        if !w.relax_in_place().converged {
            *unconverged += 1;
        }
    };

    for arm in Arm::BOTH {
        if let Some(node) = plan.arm(arm).grasp_node() {
            let heading = w.rope.tangent_angle(node);
            let g = &mut w.grippers[arm.index()];
            g.pose = Pose::at(w.rope.nodes[node], heading);
            g.state = GripperState::Grasping { node };
        }
    }
    settle(&mut w, &mut unconverged);
    max_drift = max_drift.max(w.rope.length_drift());

    let max_step = w.rope.segment_length / 2.0;
    let phases = Arm::BOTH.iter().map(|&a| plan.arm(a).moves().len()).max().unwrap_or(0);
    let mut substeps = 0;
    let mut taut_stop = false;
    'phases: for phase in 0..phases {
        let tracks: Vec<Option<Track>> = Arm::BOTH
            .iter()
            .map(|&arm| {
                let moves = plan.arm(arm).moves();
                let path = moves.get(phase).copied().unwrap_or(&[]);
                (!path.is_empty()).then(|| Track::new(w.gripper(arm).pose, path, max_step))
            })
            .collect();
        let count = tracks
            .iter()
            .flatten()
            .map(|t| t.total().ceil() as usize)
            .max()
            .unwrap_or(0);
        for s in 1..=count {
            let before = w.clone();
            let f = s as f64 / count as f64;
            for (k, track) in tracks.iter().enumerate() {
                if let Some(track) = track {
                    w.grippers[k].pose = track.at(f);
                }
            }
            settle(&mut w, &mut unconverged);
            let drift = w.rope.length_drift();
            if w.rope.max_strain() > w.config.max_strain || drift > w.config.max_drift {
                w = before;
                taut_stop = true;
                break 'phases;
            }
            max_drift = max_drift.max(drift);
            substeps += 1;
        }
    }

    for g in w.grippers.iter_mut() {
        g.state = GripperState::Free;
    }
    settle(&mut w, &mut unconverged);
    max_drift = max_drift.max(w.rope.length_drift());
    Ok(Execution {
        world: w,
        substeps,
        taut_stop,
        unconverged,
        max_drift,
    })
}
