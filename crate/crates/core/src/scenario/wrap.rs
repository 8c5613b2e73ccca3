//! Goal curves of a taut rope wrapped around contacts: straight tangent
//! spans joined by arcs hugging each contact at rope-center radius.

use serde::{Deserialize, Serialize};

use crate::planner::arc_path;
use crate::sim::Contact;
use crate::{Error, Point, PolylineCurve, Result, Vec2};

/// Direction of travel around a contact, following the rope from its first
/// end to its last.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Turn {
    Ccw,
    Cw,
}

impl Turn {
    pub fn sign(self) -> f64 {
        match self {
            Turn::Ccw => 1.0,
            Turn::Cw => -1.0,
        }
    }
}

fn rotate(v: Vec2, a: f64) -> Vec2 {
    let (s, c) = a.sin_cos();
    Vec2::new(c * v.x - s * v.y, s * v.x + c * v.y)
}

/// Tangent point on circle `(c, r)` for a line arriving from `p` that then
/// continues around the circle turning with `sign`.
fn arrive(p: Point, c: Point, r: f64, sign: f64) -> Option<Point> {
    let d = p - c;
    let n = d.norm();
    (n > r).then(|| c + rotate(d / n, sign * (r / n).acos()) * r)
}

/// Tangent points of the span leaving circle 1 (turning `s1`) toward circle
/// 2 (turning `s2`), both of radius `r`.
fn bridge(c1: Point, c2: Point, r: f64, s1: f64, s2: f64) -> Option<(Point, Point)> {
    let d = c2 - c1;
    let n = d.norm();
    let u = d / n;
    let theta = if s1 == s2 {
        -s1 * std::f64::consts::FRAC_PI_2
    } else {
        if n <= 2.0 * r {
            return None;
        }
        -s1 * (2.0 * r / n).acos()
    };
    let n1 = rotate(u, theta);
    let n2 = if s1 == s2 { n1 } else { -n1 };
    Some((c1 + n1 * r, c2 + n2 * r))
}

fn push_line(out: &mut Vec<Point>, to: Point, spacing: f64) {
    let from = *out.last().expect("path has a start");
    let count = ((to - from).norm() / spacing).ceil().max(1.0) as usize;
    for i in 1..=count {
        out.push(from + (to - from) * (i as f64 / count as f64));
    }
}

fn push_arc(out: &mut Vec<Point>, c: Point, r: f64, to: Point, sign: f64, spacing: f64) {
    let from = *out.last().expect("path has a start");
    let a0 = (from.y - c.y).atan2(from.x - c.x);
    let a1 = (to.y - c.y).atan2(to.x - c.x);
    let sweep = if sign > 0.0 {
        (a1 - a0).rem_euclid(std::f64::consts::TAU)
    } else {
        -(a0 - a1).rem_euclid(std::f64::consts::TAU)
    };
    out.extend(arc_path(c, r, a0, sweep, spacing).into_iter().skip(1));
}

/// Taut path from `start` around `wraps` (contact, turn) in order to `end`,
/// keeping the rope center `half_thickness` off each contact surface.
/// Points are at most `spacing` apart.
pub fn wrap_path(
    start: Point,
    end: Point,
    wraps: &[(Contact, Turn)],
    half_thickness: f64,
    spacing: f64,
) -> Result<PolylineCurve> {
    let fail = |what: String| Error::Config(format!("wrap goal: {what}"));
    let mut out = vec![start];
    for (i, &(c, turn)) in wraps.iter().enumerate() {
        let r = c.radius + half_thickness;
        let s = turn.sign();
        if i == 0 {
            let t = arrive(start, c.center, r, s).ok_or_else(|| fail("start lies inside the first contact".into()))?;
            push_line(&mut out, t, spacing);
        }
        let leave = match wraps.get(i + 1) {
            Some(&(next, next_turn)) => {
                if (next.radius - c.radius).abs() > 1e-12 {
                    return Err(fail("consecutive wrapped contacts must share a radius".into()));
                }
                let (a, b) = bridge(c.center, next.center, r, s, next_turn.sign())
                    .ok_or_else(|| fail(format!("contacts {} and {} too close to cross between", i + 1, i + 2)))?;
                push_arc(&mut out, c.center, r, a, s, spacing);
                push_line(&mut out, b, spacing);
                continue;
            }
            None => arrive(end, c.center, r, -s).ok_or_else(|| fail("end lies inside the last contact".into()))?,
        };
        push_arc(&mut out, c.center, r, leave, s, spacing);
    }
    push_line(&mut out, end, spacing);
    PolylineCurve::from_points_dedup(out)
}
