//! Contact and shape primitives: grasp selection, role assignment and
//! gripper paths.

use std::f64::consts::PI;

use super::benchmarks::{BenchmarkSet, ContactBenchmarks};
use super::path::{arc_path, potential_field_path, sweep_between};
use super::PlannerConfig;
use crate::geometry::{cross, perp, wrap_angle};
use crate::sim::{reachable, ActionPlan, Arm, ArmPlan, Contact, Pose, WorldState};
use crate::{Error, Point, Result, Vec2};

/// Spacing of emitted path poses (m).
const PATH_SPACING: f64 = 0.01;
/// Rope slack tolerated beyond what the contact sweep needs, in keypoint
/// spacings.
const SLACK_WINDOW: f64 = 2.0;
/// Minimum rope-node separation between the two grasps.
const MIN_NODE_GAP: usize = 3;

/// Everything a primitive needs: the world (for reachability and rope
/// nodes), current keypoints aligned index-wise with the goal keypoints, the
/// dense goal curve and the benchmarks. All points in world coordinates.
#[derive(Debug, Clone, Copy)]
pub struct PlanContext<'a> {
    pub world: &'a WorldState,
    pub current: &'a [Point],
    pub goal_keypoints: &'a [Point],
    pub goal_curve: &'a [Point],
    pub benchmarks: &'a BenchmarkSet,
    pub config: &'a PlannerConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Primitive {
    /// Zero-based contact index.
    Contact(usize),
    Shape,
}

impl Primitive {
    pub fn name(&self) -> &'static str {
        match self {
            Primitive::Contact(_) => "contact",
            Primitive::Shape => "shape",
        }
    }
}

/// A planned primitive execution.
#[derive(Debug, Clone, PartialEq)]
pub struct PrimitivePlan {
    pub primitive: Primitive,
    pub plan: ActionPlan,
    pub mover: Option<Arm>,
    /// Keypoint index grasped by each arm.
    pub grasp_keypoints: [Option<usize>; 2],
}

impl PlanContext<'_> {
    fn m(&self) -> usize {
        self.current.len()
    }

    /// Rope node nearest keypoint `j` of the current state.
    pub fn node_of(&self, j: usize) -> usize {
        let p = self.current[j];
        let nodes = &self.world.rope.nodes;
        (0..nodes.len())
            .min_by(|&a, &b| (nodes[a] - p).norm().total_cmp(&(nodes[b] - p).norm()))
            .expect("rope has nodes")
    }

    /// True when rope node indices run opposite to keypoint indices.
    fn reversed(&self) -> bool {
        self.node_of(self.m() - 1) < self.node_of(0)
    }

    /// Gripper heading that lays the rope along `angle`, measured in
    /// keypoint order.
    fn heading_for(&self, angle: f64) -> f64 {
        if self.reversed() {
            wrap_angle(angle + PI)
        } else {
            angle
        }
    }

    fn clearance(&self) -> f64 {
        self.world.config.clearance()
    }

    fn grasp_ok(&self, arm: Arm, node: usize) -> bool {
        let p = self.world.rope.nodes[node];
        reachable(self.world, arm, &Pose::at(p, 0.0))
    }

    fn path_ok(&self, arm: Arm, path: &[Pose]) -> bool {
        let ws = self.world.workspace(arm);
        let clearance = self.clearance();
        path.iter().all(|p| {
            ws.contains(&p.position)
                && self
                    .world
                    .contacts
                    .iter()
                    .all(|c| (p.position - c.center).norm() >= c.radius + clearance)
        })
    }

    /// Push a target out of every contact's clearance zone.
    fn clamp_target(&self, p: Point) -> Point {
        let mut p = p;
        let min_extra = self.clearance() + 0.002;
        for c in &self.world.contacts {
            let d = p - c.center;
            if d.norm() < c.radius + min_extra {
                let dir = if d.norm() > 1e-12 {
                    d.normalize()
                } else {
                    Vec2::new(0.0, 1.0)
                };
                p = c.center + dir * (c.radius + min_extra);
            }
        }
        p
    }

    /// Poses along a clear path from `from` to `to`, heading turning from
    /// `h0` to `h1` along the way.
    fn transit(&self, from: Point, to: Point, h0: f64, h1: f64) -> Vec<Pose> {
        let pts = potential_field_path(from, to, &self.world.contacts, self.clearance(), PATH_SPACING / 2.0);
        let pts = thin(&pts, PATH_SPACING);
        let total: f64 = pts.windows(2).map(|w| (w[1] - w[0]).norm()).sum();
        let turn = wrap_angle(h1 - h0);
        let mut acc = 0.0;
        let mut out = Vec::with_capacity(pts.len());
        for (i, p) in pts.iter().enumerate() {
            if i > 0 {
                acc += (p - pts[i - 1]).norm();
            }
            let f = if total > 0.0 { acc / total } else { 1.0 };
            out.push(Pose::at(*p, h0 + turn * f));
        }
        // The start pose is where the gripper already is.
        out.remove(0);
        out
    }
}

/// Keep the first and last point and drop points closer than `spacing` to
/// the previously kept one.
fn thin(points: &[Point], spacing: f64) -> Vec<Point> {
    let mut out = vec![points[0]];
    for p in &points[1..points.len() - 1] {
        if (p - out.last().unwrap()).norm() >= spacing {
            out.push(*p);
        }
    }
    if points.len() > 1 {
        out.push(*points.last().unwrap());
    }
    out
}

/// Sign of the goal's winding around a contact between its first and last
/// benchmark: +1 counter-clockwise, -1 clockwise.
pub fn goal_winding(goal: &[Point], contact: &Contact, bench: &ContactBenchmarks) -> f64 {
    let [a, _, b] = bench.curve_index;
    let total: f64 = goal[a..=b]
        .windows(2)
        .map(|w| cross(&(w[0] - contact.center), &(w[1] - contact.center)))
        .sum();
    if total < 0.0 {
        -1.0
    } else {
        1.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Side {
    Low,
    High,
}

/// Candidate grasp keypoints `(left, right)` for contact `k` in search
/// order, and the rope end the contact sits on, if any.
///
/// The left arm searches keypoints up to the first benchmark's keypoint,
/// the right arm keypoints from the last benchmark's keypoint on. For an
/// intermediate contact both walk outward starting next to the benchmarks.
/// For an end contact the arm on that end starts at the rope end and walks
/// inward while the other walks outward from next to the benchmarks.
fn grasp_orders(ctx: &PlanContext, k: usize) -> (Vec<usize>, Vec<usize>, Option<Side>) {
    let m = ctx.m();
    let q = ctx.benchmarks.contacts.len();
    let [j1, j2, j3] = ctx.benchmarks.contacts[k].keypoint;
    let end_side = if q == 1 {
        Some(if 2 * j2 < m { Side::Low } else { Side::High })
    } else if k == 0 {
        Some(Side::Low)
    } else if k == q - 1 {
        Some(Side::High)
    } else {
        None
    };
    let left: Vec<usize> = match end_side {
        Some(Side::Low) => (0..=j1).collect(),
        _ => (0..j1.max(1)).rev().collect(),
    };
    let right: Vec<usize> = match end_side {
        Some(Side::High) => (j3..m).rev().collect(),
        _ => ((j3 + 1).min(m - 1)..m).collect(),
    };
    (left, right, end_side)
}

/// Candidate grasp keypoints `(left, right)` for contact `k`, each in the
/// order its arm searches them.
pub fn grasp_candidates(ctx: &PlanContext, k: usize) -> (Vec<usize>, Vec<usize>) {
    let (left, right, _) = grasp_orders(ctx, k);
    (left, right)
}

/// Grasp keypoints `(left, right)` for contact `k`: the first pair, in the
/// left arm's search order, whose rope nodes are both reachable, with the
/// left keypoint before the right one and nodes at least three apart.
pub fn grasp_plan(ctx: &PlanContext, k: usize) -> Result<(usize, usize)> {
    let (left, right, _) = grasp_orders(ctx, k);
    pick_pair(ctx, &left, &right, |_, _| true)
        .ok_or_else(|| Error::PlanningInfeasible(format!("no reachable grasp pair for contact {}", k + 1)))
}

fn pick_pair(
    ctx: &PlanContext,
    left: &[usize],
    right: &[usize],
    accept: impl Fn(usize, usize) -> bool,
) -> Option<(usize, usize)> {
    let right_ok: Vec<(usize, usize)> = right
        .iter()
        .map(|&j| (j, ctx.node_of(j)))
        .filter(|&(_, n)| ctx.grasp_ok(Arm::Right, n))
        .collect();
    for &jl in left {
        let nl = ctx.node_of(jl);
        if !ctx.grasp_ok(Arm::Left, nl) {
            continue;
        }
        if let Some(&(jr, _)) = right_ok
            .iter()
            .find(|&&(jr, nr)| jl < jr && nl.abs_diff(nr) >= MIN_NODE_GAP && accept(jl, jr))
        {
            return Some((jl, jr));
        }
    }
    None
}

/// Total signed angle `points` turn through as seen from `c`.
fn swept_angle(c: Point, points: impl Iterator<Item = Point>) -> f64 {
    let mut total = 0.0;
    let mut prev: Option<f64> = None;
    for p in points {
        let a = (p.y - c.y).atan2(p.x - c.x);
        if let Some(q) = prev {
            total += wrap_angle(a - q);
        }
        prev = Some(a);
    }
    total
}

/// Moving-arm motion for one grasp keypoint.
struct Sweep {
    /// Ways to reach the first waypoint, each with the angle it winds
    /// around the contact: the direct route and one passing the other side.
    transits: Vec<(Vec<Pose>, f64)>,
    sweep: Vec<Pose>,
    /// Rope needed from the first waypoint to the end of the sweep.
    length: f64,
}

/// Plan the contact primitive for contact `k`.
///
/// One arm fixes, the other moves. In a first phase the fixing arm carries
/// its grasp to that keypoint's goal position while the moving arm travels
/// to the first extended benchmark; in a second phase the moving arm sweeps
/// around the contact at radius `tau_b` through the extended benchmarks,
/// `B'_1` to `B'_3` for the right arm and the reverse for the left. At each
/// waypoint the heading is perpendicular to the radius, along the goal's
/// winding.
///
/// The arm on the contact's rope end moves (the right arm for intermediate
/// contacts), with the other as fallback. Grasps follow the search order of
/// [`grasp_plan`], additionally requiring the moving arm's path to be
/// reachable and, where possible, enough rope between the grasps to follow
/// the sweep from the fixed point without stretching but not so much that
/// the excess piles up as a loop.
pub fn contact_primitive_step(ctx: &PlanContext, k: usize) -> Result<PrimitivePlan> {
    let (left, right, end_side) = grasp_orders(ctx, k);
    let contact = ctx.world.contacts[k];
    let bench = &ctx.benchmarks.contacts[k];
    let winding = goal_winding(ctx.goal_curve, &contact, bench);
    let heading_sign = if ctx.config.follow_goal_winding { winding } else { 1.0 };
    let c = contact.center;
    let angle_of = |p: &Point| (p.y - c.y).atan2(p.x - c.x);
    let heading_at = |p: &Point| {
        let t = perp(&(p - c)) * heading_sign;
        ctx.heading_for(t.y.atan2(t.x))
    };
    let seg = ctx.world.rope.segment_length;
    let keypoint_gap = ctx.world.rope.rest_length() / (ctx.m() - 1) as f64;

    let sweep_for = |mover: Arm, j: usize| -> Option<Sweep> {
        let (order, sweep_sign) = match mover {
            Arm::Right => ([0, 1, 2], winding),
            Arm::Left => ([2, 1, 0], -winding),
        };
        let node = ctx.node_of(j);
        let start = ctx.world.rope.nodes[node];
        let first = bench.extended[order[0]];
        let (h0, h1) = (ctx.world.rope.tangent_angle(node), heading_at(&first));
        let mut direct = ctx.transit(start, first, h0, h1);
        if direct.is_empty() {
            direct.push(Pose::at(first, h1));
        }
        let winds = |path: &[Pose]| swept_angle(c, std::iter::once(start).chain(path.iter().map(|p| p.position)));
        let turn = winds(&direct);
        let around = turn - 2.0 * PI * turn.signum();
        let via_angle = angle_of(&start) + around / 2.0;
        let via = c + Vec2::new(via_angle.cos(), via_angle.sin()) * (ctx.config.tau_b + ctx.clearance());
        let mut detour = ctx.transit(start, via, h0, (h0 + h1) / 2.0);
        detour.extend(ctx.transit(via, first, (h0 + h1) / 2.0, h1));
        let mut transits = vec![(direct, turn)];
        if ctx.path_ok(mover, &detour) {
            let turn = winds(&detour);
            transits.push((detour, turn));
        }
        transits.retain(|(t, _)| ctx.path_ok(mover, t));
        let mut sweep = Vec::new();
        let mut length = 0.0;
        for w in order.windows(2) {
            let (a, b) = (bench.extended[w[0]], bench.extended[w[1]]);
            let turn = sweep_between(angle_of(&a), angle_of(&b), sweep_sign);
            length += turn.abs() * ctx.config.tau_b;
            for p in arc_path(c, ctx.config.tau_b, angle_of(&a), turn, PATH_SPACING)
                .into_iter()
                .skip(1)
            {
                sweep.push(Pose::at(p, heading_at(&p)));
            }
        }
        (!transits.is_empty() && ctx.path_ok(mover, &sweep)).then_some(Sweep {
            transits,
            sweep,
            length,
        })
    };
    let anchor_for = |fixer: Arm, j: usize| -> (Point, Vec<Pose>) {
        let node = ctx.node_of(j);
        let target = ctx.clamp_target(ctx.goal_keypoints[j]);
        let heading = ctx.heading_for(goal_tangent(ctx.goal_keypoints, j));
        let path = ctx.transit(
            ctx.world.rope.nodes[node],
            target,
            ctx.world.rope.tangent_angle(node),
            heading,
        );
        if ctx.path_ok(fixer, &path) {
            (target, path)
        } else {
            (ctx.world.rope.nodes[node], Vec::new())
        }
    };
    // The rope between the arms may not cross the contact, so its winding
    // changes only as the two ends move. Pick the transit that leaves it
    // running straight from the fixed point to the first waypoint instead
    // of looping around the far side.
    let pick_transit = |sw: &Sweep, jm: usize, jf: usize, anchor: &(Point, Vec<Pose>)| -> usize {
        let (nm, nf) = (ctx.node_of(jm), ctx.node_of(jf));
        let rope = &ctx.world.rope.nodes;
        let along: f64 = if nf <= nm {
            swept_angle(c, rope[nf..=nm].iter().copied())
        } else {
            swept_angle(c, rope[nm..=nf].iter().rev().copied())
        };
        let fixer = swept_angle(c, std::iter::once(rope[nf]).chain(anchor.1.iter().map(|p| p.position)));
        let first = sw.transits[0]
            .0
            .last()
            .expect("transit ends at the first waypoint")
            .position;
        let wanted = wrap_angle(angle_of(&first) - angle_of(&anchor.0)) - along + fixer;
        (0..sw.transits.len())
            .min_by(|&a, &b| {
                (sw.transits[a].1 - wanted)
                    .abs()
                    .total_cmp(&(sw.transits[b].1 - wanted).abs())
            })
            .expect("a sweep has at least one transit")
    };

    let preferred = match end_side {
        Some(Side::Low) => [Arm::Left, Arm::Right],
        _ => [Arm::Right, Arm::Left],
    };
    for mover in preferred {
        let (mover_order, fixer_order) = match mover {
            Arm::Right => (&right, &left),
            Arm::Left => (&left, &right),
        };
        let m = ctx.m();
        let mut sweeps: Vec<Option<Sweep>> = (0..m).map(|_| None).collect();
        for &j in mover_order {
            sweeps[j] = sweep_for(mover, j);
        }
        let mut anchors: Vec<Option<(Point, Vec<Pose>)>> = vec![None; m];
        for &j in fixer_order {
            anchors[j] = Some(anchor_for(mover.other(), j));
        }
        let split = |jl: usize, jr: usize| match mover {
            Arm::Right => (jr, jl),
            Arm::Left => (jl, jr),
        };
        let slack = |jl: usize, jr: usize| {
            let (jm, jf) = split(jl, jr);
            let (Some(sw), Some((target, _))) = (&sweeps[jm], &anchors[jf]) else {
                return false;
            };
            let first = sw.transits[0]
                .0
                .last()
                .expect("transit ends at the first waypoint")
                .position;
            let available = ctx.node_of(jm).abs_diff(ctx.node_of(jf)) as f64 * seg;
            let required = (first - target).norm() + sw.length;
            required <= available && available <= required + SLACK_WINDOW * keypoint_gap
        };
        let pair = pick_pair(ctx, &left, &right, slack)
            .or_else(|| pick_pair(ctx, &left, &right, |jl, jr| sweeps[split(jl, jr).0].is_some()));
        let Some((jl, jr)) = pair else { continue };
        let (jm, jf) = split(jl, jr);
        let mut sw = sweeps[jm].take().expect("accepted mover has a sweep");
        let anchor = anchors[jf].take().expect("fixer candidate has an anchor");
        let (transit, _) = sw.transits.swap_remove(pick_transit(&sw, jm, jf, &anchor));
        let anchor = anchor.1;
        let mut phases: [Vec<Vec<Pose>>; 2] = Default::default();
        phases[mover.index()] = vec![transit, sw.sweep];
        phases[mover.other().index()] = vec![anchor, Vec::new()];
        let [lp, rp] = phases;
        return Ok(PrimitivePlan {
            primitive: Primitive::Contact(k),
            plan: ActionPlan::new(
                ArmPlan::phased(ctx.node_of(jl), lp),
                ArmPlan::phased(ctx.node_of(jr), rp),
            ),
            mover: Some(mover),
            grasp_keypoints: [Some(jl), Some(jr)],
        });
    }
    Err(Error::PlanningInfeasible(format!(
        "no reachable grasp pair and path for contact {}",
        k + 1
    )))
}

/// Mean keypoint distance between two equally long sequences.
pub fn shape_error(current: &[Point], goal: &[Point]) -> Result<f64> {
    if current.len() != goal.len() {
        return Err(Error::LengthMismatch {
            expected: goal.len(),
            actual: current.len(),
        });
    }
    if goal.is_empty() {
        return Err(Error::EmptyInput("keypoint sequences are empty"));
    }
    Ok(current.iter().zip(goal).map(|(a, b)| (a - b).norm()).sum::<f64>() / goal.len() as f64)
}

/// Indices of the largest and second largest keypoint error, ascending
/// (ties go to the lower index).
pub fn worst_pair(current: &[Point], goal: &[Point]) -> (usize, usize) {
    let err: Vec<f64> = current.iter().zip(goal).map(|(a, b)| (a - b).norm()).collect();
    let argmax = |skip: Option<usize>| {
        (0..err.len())
            .filter(|&j| Some(j) != skip)
            .fold(None, |best: Option<usize>, j| match best {
                Some(b) if err[b] >= err[j] => Some(b),
                _ => Some(j),
            })
            .expect("at least two keypoints")
    };
    let g = argmax(None);
    let g2 = argmax(Some(g));
    (g.min(g2), g.max(g2))
}

/// Goal tangent angle at keypoint `j` (central difference, one-sided at the
/// ends).
fn goal_tangent(goal: &[Point], j: usize) -> f64 {
    let a = goal[j.saturating_sub(1)];
    let b = goal[(j + 1).min(goal.len() - 1)];
    let d = b - a;
    d.y.atan2(d.x)
}

/// Arc length along `curve` of the vertex nearest to `p`.
fn arc_at(curve: &[Point], p: Point) -> f64 {
    let mut s = 0.0;
    let mut best = (f64::INFINITY, 0.0);
    for (i, q) in curve.iter().enumerate() {
        if i > 0 {
            s += (q - curve[i - 1]).norm();
        }
        let d = (q - p).norm();
        if d < best.0 {
            best = (d, s);
        }
    }
    best.1
}

/// Plan the shape primitive: pick the two worst keypoints, let the left arm
/// search from the lower one toward the first keypoint and the right arm
/// from the higher one toward the last, and move each grasped keypoint to
/// its goal position with the goal tangent as heading. Both arms move
/// together; a pair whose targets lie farther apart, in a straight line or
/// along the goal, than the rope between the grasps allows is skipped. If no pair works, the first feasible arm
/// moves alone.
pub fn shape_primitive_step(ctx: &PlanContext) -> Result<PrimitivePlan> {
    let m = ctx.m();
    let (g_l, g_r) = worst_pair(ctx.current, ctx.goal_keypoints);
    let seg = ctx.world.rope.segment_length;
    let candidate = |arm: Arm, j: usize| -> Option<(usize, Vec<Pose>)> {
        let node = ctx.node_of(j);
        if !ctx.grasp_ok(arm, node) {
            return None;
        }
        let target = ctx.clamp_target(ctx.goal_keypoints[j]);
        let heading = ctx.heading_for(goal_tangent(ctx.goal_keypoints, j));
        if !reachable(ctx.world, arm, &Pose::at(target, heading)) {
            return None;
        }
        let start = ctx.world.rope.nodes[node];
        let mut path = ctx.transit(start, target, ctx.world.rope.tangent_angle(node), heading);
        if path.is_empty() {
            path.push(Pose::at(target, heading));
        }
        ctx.path_ok(arm, &path).then_some((node, path))
    };
    let left: Vec<(usize, usize, Vec<Pose>)> = (0..=g_l)
        .rev()
        .filter_map(|j| candidate(Arm::Left, j).map(|(n, p)| (j, n, p)))
        .collect();
    let right: Vec<(usize, usize, Vec<Pose>)> = (g_r..m)
        .filter_map(|j| candidate(Arm::Right, j).map(|(n, p)| (j, n, p)))
        .collect();

    let pair = left.iter().find_map(|l| {
        right
            .iter()
            .find(|r| {
                let span = l.1.abs_diff(r.1);
                let (a, b) = (l.2.last().unwrap().position, r.2.last().unwrap().position);
                let needed = (a - b)
                    .norm()
                    .max((arc_at(ctx.goal_curve, a) - arc_at(ctx.goal_curve, b)).abs());
                l.0 < r.0 && span >= MIN_NODE_GAP && needed <= span as f64 * seg
            })
            .map(|r| (l, r))
    });
    let (left_plan, right_plan, grasps) = match (pair, left.first(), right.first()) {
        (Some((l, r)), _, _) => (
            ArmPlan::pick_place(l.1, l.2.clone()),
            ArmPlan::pick_place(r.1, r.2.clone()),
            [Some(l.0), Some(r.0)],
        ),
        (None, Some(l), _) => (
            ArmPlan::pick_place(l.1, l.2.clone()),
            ArmPlan::idle(),
            [Some(l.0), None],
        ),
        (None, None, Some(r)) => (
            ArmPlan::idle(),
            ArmPlan::pick_place(r.1, r.2.clone()),
            [None, Some(r.0)],
        ),
        (None, None, None) => {
            return Err(Error::PlanningInfeasible(format!(
                "no feasible shape grasp around keypoints {} and {}",
                g_l + 1,
                g_r + 1
            )))
        }
    };
    Ok(PrimitivePlan {
        primitive: Primitive::Shape,
        plan: ActionPlan::new(left_plan, right_plan),
        mover: None,
        grasp_keypoints: grasps,
    })
}
