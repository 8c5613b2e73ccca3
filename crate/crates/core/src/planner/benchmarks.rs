//! Contact benchmarks: where the goal rope touches each contact, and the
//! checks that tell whether a state reproduces that contact.

use super::PlannerConfig;
use crate::geometry::vector_angle;
use crate::sim::Contact;
use crate::{Error, Point, Result};

/// Benchmarks of one contact, ordered along the goal rope.
#[derive(Debug, Clone, PartialEq)]
pub struct ContactBenchmarks {
    pub points: [Point; 3],
    /// Index of each benchmark's goal-curve point; nondecreasing.
    pub curve_index: [usize; 3],
    /// Extended benchmarks at distance `tau_b` from the center.
    pub extended: [Point; 3],
    /// Index of the goal keypoint nearest each benchmark.
    pub keypoint: [usize; 3],
}

/// Benchmarks for every contact, in contact order.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkSet {
    pub contacts: Vec<ContactBenchmarks>,
}

/// The three benchmarks of one contact as goal-curve indices, unordered:
/// farthest annulus point from the center, annulus point farthest from that
/// one, and the curve point nearest the center.
pub fn contact_benchmark_indices(
    goal: &[Point],
    contact: &Contact,
    k: usize,
    cfg: &PlannerConfig,
) -> Result<[usize; 3]> {
    let dist = |p: &Point| (p - contact.center).norm();
    let in_annulus: Vec<usize> = (0..goal.len())
        .filter(|&i| {
            let d = dist(&goal[i]);
            cfg.tau_i < d && d < cfg.tau_e
        })
        .collect();
    let argmax = |f: &dyn Fn(usize) -> f64| {
        in_annulus
            .iter()
            .copied()
            .fold(None, |best: Option<(usize, f64)>, i| match best {
                Some((_, v)) if v >= f(i) => best,
                _ => Some((i, f(i))),
            })
            .map(|(i, _)| i)
    };
    let b1 = argmax(&|i| dist(&goal[i])).ok_or(Error::InfeasibleGoal { contact: k + 1 })?;
    let b2 = argmax(&|i| (goal[i] - goal[b1]).norm()).expect("annulus is non-empty");
    let b3 = (0..goal.len())
        .fold((0, f64::INFINITY), |(bi, bd), i| {
            let d = dist(&goal[i]);
            if d < bd {
                (i, d)
            } else {
                (bi, bd)
            }
        })
        .0;
    Ok([b1, b2, b3])
}

/// `c + tau_b * unit(B - c)`.
pub fn extend_benchmark(contact: &Contact, b: &Point, tau_b: f64, k: usize) -> Result<Point> {
    let d = b - contact.center;
    let n = d.norm();
    if n < 1e-12 {
        return Err(Error::DegenerateDirection { contact: k + 1 });
    }
    Ok(contact.center + d * (tau_b / n))
}

/// Index of the keypoint nearest `b`; ties go to the smaller index.
pub fn pair_index(keypoints: &[Point], b: &Point) -> usize {
    keypoints
        .iter()
        .enumerate()
        .fold((0, f64::INFINITY), |(bi, bd), (j, p)| {
            let d = (p - b).norm();
            if d < bd {
                (j, d)
            } else {
                (bi, bd)
            }
        })
        .0
}

/// Benchmarks of every contact against a goal curve (densely sampled, in
/// rope order) and its keypoints.
pub fn compute_benchmarks(
    goal: &[Point],
    goal_keypoints: &[Point],
    contacts: &[Contact],
    cfg: &PlannerConfig,
) -> Result<BenchmarkSet> {
    let mut out = Vec::with_capacity(contacts.len());
    for (k, c) in contacts.iter().enumerate() {
        let mut idx = contact_benchmark_indices(goal, c, k, cfg)?;
        idx.sort_unstable();
        let points = idx.map(|i| goal[i]);
        let mut extended = [Point::origin(); 3];
        for b in 0..3 {
            extended[b] = extend_benchmark(c, &points[b], cfg.tau_b, k)?;
        }
        out.push(ContactBenchmarks {
            points,
            curve_index: idx,
            extended,
            keypoint: points.map(|p| pair_index(goal_keypoints, &p)),
        });
    }
    Ok(BenchmarkSet { contacts: out })
}

/// A state point within `tau_c` of the center whose direction from the
/// center is within `tau_a` of the benchmark's.
pub fn benchmark_satisfied(state: &[Point], contact: &Contact, b: &Point, cfg: &PlannerConfig) -> bool {
    let to_b = b - contact.center;
    state.iter().any(|s| {
        let v = s - contact.center;
        v.norm() < cfg.tau_c && vector_angle(&v, &to_b) < cfg.tau_a
    })
}

pub fn contact_satisfied(state: &[Point], contact: &Contact, bench: &ContactBenchmarks, cfg: &PlannerConfig) -> bool {
    bench.points.iter().all(|b| benchmark_satisfied(state, contact, b, cfg))
}

/// First unqualified contact in the order 2, ..., q, 1 (zero-based index).
pub fn contact_search(state: &[Point], contacts: &[Contact], set: &BenchmarkSet, cfg: &PlannerConfig) -> Option<usize> {
    let q = contacts.len();
    (1..q)
        .chain((q > 0).then_some(0))
        .find(|&k| !contact_satisfied(state, &contacts[k], &set.contacts[k], cfg))
}

/// Contact order along the goal: by goal-curve index of each contact's
/// nearest goal point. Returns the permutation (new position -> old index).
pub fn order_contacts_along(goal: &[Point], contacts: &[Contact]) -> Vec<usize> {
    let nearest = |c: &Contact| {
        (0..goal.len())
            .min_by(|&a, &b| (goal[a] - c.center).norm().total_cmp(&(goal[b] - c.center).norm()))
            .unwrap_or(0)
    };
    let mut order: Vec<usize> = (0..contacts.len()).collect();
    order.sort_by_key(|&k| (nearest(&contacts[k]), k));
    order
}
