//! Gripper paths around contacts.

use std::f64::consts::TAU;

use crate::geometry::perp;
use crate::sim::Contact;
use crate::{Point, Vec2};

/// Points on the circle of `radius` around `center` from angle `from`,
/// turning by `sweep` (signed), spaced at most `spacing` apart. Includes
/// both ends.
pub fn arc_path(center: Point, radius: f64, from: f64, sweep: f64, spacing: f64) -> Vec<Point> {
    let count = ((sweep.abs() * radius / spacing).ceil() as usize).max(1);
    (0..=count)
        .map(|i| {
            let a = from + sweep * i as f64 / count as f64;
            center + Vec2::new(a.cos(), a.sin()) * radius
        })
        .collect()
}

/// Signed sweep from angle `a` to `b` turning in direction `sign`
/// (positive: counter-clockwise), in `[0, 2pi)` magnitude.
pub(crate) fn sweep_between(a: f64, b: f64, sign: f64) -> f64 {
    if sign >= 0.0 {
        (b - a).rem_euclid(TAU)
    } else {
        -(a - b).rem_euclid(TAU)
    }
}

/// Path from `start` to `goal` that keeps `clearance` from every contact.
///
/// Straight if the segment is clear. Otherwise steps of `step` follow an
/// attractive pull toward the goal plus, near a contact, a repulsive push and
/// a tangential term that slides around it on the side closer to the goal.
/// Points ending up inside the clearance are projected out radially.
pub fn potential_field_path(start: Point, goal: Point, contacts: &[Contact], clearance: f64, step: f64) -> Vec<Point> {
    let margin = 0.005;
    let clear = |a: &Point, b: &Point| {
        contacts
            .iter()
            .all(|c| !c.blocks_segment(a, b, c.radius + clearance + margin))
    };
    if clear(&start, &goal) {
        return vec![start, goal];
    }
    let influence = 0.04;
    let mut path = vec![start];
    let mut x = start;
    for _ in 0..4000 {
        if (goal - x).norm() <= step || clear(&x, &goal) {
            break;
        }
        let to_goal = goal - x;
        let mut force = to_goal / to_goal.norm();
        for c in contacts {
            let d = x - c.center;
            let dist = d.norm();
            let surface = dist - c.radius - clearance;
            if surface < influence {
                let n = d / dist.max(1e-12);
                let w = (influence - surface.max(0.0)) / influence;
                let mut t = perp(&n);
                if t.dot(&to_goal) < 0.0 {
                    t = -t;
                }
                force += n * (2.0 * w * w) + t * (2.0 * w);
            }
        }
        x += force.normalize() * step;
        for c in contacts {
            let d = x - c.center;
            let min = c.radius + clearance + margin;
            if d.norm() < min {
                x = c.center + d.normalize() * min;
            }
        }
        path.push(x);
    }
    path.push(goal);
    path
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn arc_endpoints_and_radius() {
        let c = Point::new(1.0, 2.0);
        let p = arc_path(c, 0.1, 0.0, std::f64::consts::PI, 0.01);
        assert_relative_eq!(p[0], Point::new(1.1, 2.0), epsilon = 1e-12);
        assert_relative_eq!(*p.last().unwrap(), Point::new(0.9, 2.0), epsilon = 1e-12);
        assert!(p.iter().all(|q| ((q - c).norm() - 0.1).abs() < 1e-12));
        assert!(p.windows(2).all(|w| (w[1] - w[0]).norm() <= 0.0101));
        assert!(p[p.len() / 2].y > 2.0);
    }

    #[test]
    fn sweep_direction() {
        assert_relative_eq!(sweep_between(0.0, 1.0, 1.0), 1.0);
        assert_relative_eq!(sweep_between(0.0, 1.0, -1.0), 1.0 - TAU);
        assert_relative_eq!(sweep_between(1.0, 0.0, -1.0), -1.0);
    }

    #[test]
    fn field_path_avoids_contact() {
        let c = Contact::new(0.0, 0.0, 0.04);
        let p = potential_field_path(Point::new(-0.2, 0.0), Point::new(0.2, 0.01), &[c], 0.01, 0.005);
        assert!(p.len() > 2);
        assert_eq!(*p.last().unwrap(), Point::new(0.2, 0.01));
        assert!(p.iter().all(|q| (q - c.center).norm() >= 0.05 - 1e-9));
        for w in p.windows(2) {
            assert!(!c.blocks_segment(&w[0], &w[1], 0.05 - 1e-6), "{w:?}");
        }
        let straight = potential_field_path(Point::new(-0.2, 0.2), Point::new(0.2, 0.2), &[c], 0.01, 0.005);
        assert_eq!(straight.len(), 2);
    }
}
