//! Constraint projection that settles the rope.

use super::{Contact, SimConfig, WorldState};
use crate::geometry::vector_angle;
use crate::{Point, Vec2};

/// Outcome of one [`relax`] call.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelaxReport {
    pub iterations: usize,
    /// Largest remaining violation: segment length error, penetration or pin
    /// error, in meters.
    pub violation: f64,
    pub converged: bool,
}

/// Settle the rope of `world` and return the settled copy. The report of the
/// last call is kept in [`WorldState::last_relax`].
pub fn relax(world: &WorldState) -> WorldState {
    let mut w = world.clone();
    w.relax_in_place();
    w
}

pub(crate) struct Pin {
    pub node: usize,
    pub target: Point,
}

/// Iterate until every constraint is within tolerance or the cap is hit.
///
/// Each iteration pins grasped nodes, smooths kinks tighter than the minimum
/// bend radius (first half of the budget only), runs a forward then a
/// backward sweep over segment-length constraints and finally pushes nodes out of the contact disks inflated by
/// the rope half thickness. Corrections run away from the pins: the forward
/// sweep moves the node after a pinned one, the backward sweep the node
/// before, so free tails trail the grippers and rope between two grippers is
/// tightened from both sides. Without pins the correction is split evenly.
pub(crate) fn relax_nodes(
    nodes: &mut [Point],
    segment_length: f64,
    half_thickness: f64,
    pins: &[Pin],
    contacts: &[Contact],
    cfg: &SimConfig,
) -> RelaxReport {
    let n = nodes.len();
    let mut pinned = vec![false; n];
    for p in pins {
        pinned[p.node] = true;
    }
    // left_pin[i]: some node at or before i is pinned; right_pin likewise.
    let left_pin: Vec<bool> = pinned
        .iter()
        .scan(false, |seen, &p| {
            *seen |= p;
            Some(*seen)
        })
        .collect();
    let mut right_pin: Vec<bool> = pinned
        .iter()
        .rev()
        .scan(false, |seen, &p| {
            *seen |= p;
            Some(*seen)
        })
        .collect();
    right_pin.reverse();
    let max_turn = segment_length / cfg.min_bend_radius;
    // Smoothing shortens the chain; on crumpled rope it can fight the length
    // constraints forever, so the last half of the budget runs without it.
    let smoothing_budget = cfg.max_iterations / 2;

    straighten_taut_spans(nodes, segment_length, pins);
    let mut violation = measure(nodes, segment_length, half_thickness, pins, contacts);
    let mut iterations = 0;
    while violation >= cfg.tolerance && iterations < cfg.max_iterations {
        iterations += 1;
        for p in pins {
            nodes[p.node] = p.target;
        }
        for i in 1..n - 1 {
            if pinned[i] || iterations > smoothing_budget {
                continue;
            }
            let a = nodes[i] - nodes[i - 1];
            let b = nodes[i + 1] - nodes[i];
            let turn = vector_angle(&a, &b);
            if turn > max_turn {
                let mid = Point::from((nodes[i - 1].coords + nodes[i + 1].coords) * 0.5);
                nodes[i] += (mid - nodes[i]) * (0.5 * (1.0 - max_turn / turn));
            }
        }
        for i in 0..n - 1 {
            if let Some(w) = weights(i, Sweep::Forward, &pinned, &left_pin, &right_pin) {
                project_segment(nodes, i, segment_length, w);
            }
        }
        for i in (0..n - 1).rev() {
            if let Some(w) = weights(i, Sweep::Backward, &pinned, &left_pin, &right_pin) {
                project_segment(nodes, i, segment_length, w);
            }
        }
        push_out(nodes, half_thickness, contacts);
        violation = measure(nodes, segment_length, half_thickness, pins, contacts);
    }
    RelaxReport {
        iterations,
        violation,
        converged: violation < cfg.tolerance,
    }
}

/// Rope between two pins held at least its rest length apart has a single
/// feasible shape, the straight chord; place those nodes on it directly.
fn straighten_taut_spans(nodes: &mut [Point], rest: f64, pins: &[Pin]) {
    let mut sorted: Vec<&Pin> = pins.iter().collect();
    sorted.sort_by_key(|p| p.node);
    for pair in sorted.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        let span = b.node - a.node;
        if span < 2 || (b.target - a.target).norm() < rest * span as f64 {
            continue;
        }
        for k in 1..span {
            let t = k as f64 / span as f64;
            nodes[a.node + k] = a.target + (b.target - a.target) * t;
        }
    }
}

#[derive(Clone, Copy)]
enum Sweep {
    Forward,
    Backward,
}

/// Which side of segment `i`-`i+1` takes the correction.
fn weights(i: usize, sweep: Sweep, pinned: &[bool], left_pin: &[bool], right_pin: &[bool]) -> Option<(f64, f64)> {
    let j = i + 1;
    if pinned[i] && pinned[j] {
        return None;
    }
    if !left_pin[pinned.len() - 1] {
        return Some((0.5, 0.5));
    }
    match sweep {
        Sweep::Forward if pinned[j] => Some((1.0, 0.0)),
        Sweep::Forward if left_pin[i] => Some((0.0, 1.0)),
        Sweep::Backward if pinned[i] => Some((0.0, 1.0)),
        Sweep::Backward if right_pin[j] => Some((1.0, 0.0)),
        _ => None,
    }
}

fn project_segment(nodes: &mut [Point], i: usize, rest: f64, (wi, wj): (f64, f64)) {
    let j = i + 1;
    let d = nodes[j] - nodes[i];
    let len = d.norm();
    if len < 1e-15 {
        return;
    }
    let corr: Vec2 = d * ((len - rest) / len);
    nodes[i] += corr * wi;
    nodes[j] -= corr * wj;
}

fn push_out(nodes: &mut [Point], half_thickness: f64, contacts: &[Contact]) {
    for p in nodes.iter_mut() {
        for c in contacts {
            let r = c.radius + half_thickness;
            let d = *p - c.center;
            let dist = d.norm();
            if dist < r {
                let dir = if dist > 1e-12 { d / dist } else { Vec2::new(0.0, 1.0) };
                *p = c.center + dir * r;
            }
        }
    }
}

fn measure(nodes: &[Point], rest: f64, half_thickness: f64, pins: &[Pin], contacts: &[Contact]) -> f64 {
    let seg = nodes
        .windows(2)
        .map(|w| ((w[1] - w[0]).norm() - rest).abs())
        .fold(0.0, f64::max);
    let pen = nodes
        .iter()
        .flat_map(|p| {
            contacts
                .iter()
                .map(move |c| c.radius + half_thickness - (p - c.center).norm())
        })
        .fold(0.0, f64::max);
    let pin = pins
        .iter()
        .map(|p| (nodes[p.node] - p.target).norm())
        .fold(0.0, f64::max);
    seg.max(pen).max(pin)
}
