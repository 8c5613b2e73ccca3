use nalgebra::Rotation2;

use super::{vector_angle, Point, Vec2};
use crate::{Error, Result};

/// Ordered 2D point sequence; the order is the curve parameterization.
#[derive(Debug, Clone, PartialEq)]
pub struct PolylineCurve {
    points: Vec<Point>,
}

impl PolylineCurve {
    /// Requires at least two points and no repeated consecutive points.
    pub fn new(points: Vec<Point>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::param(format!(
                "a curve needs at least 2 points, got {}",
                points.len()
            )));
        }
        if let Some(i) = points.windows(2).position(|w| w[0] == w[1]) {
            return Err(Error::param(format!("points {i} and {} coincide", i + 1)));
        }
        if points.iter().any(|p| !p.x.is_finite() || !p.y.is_finite()) {
            return Err(Error::param("non-finite curve point"));
        }
        Ok(Self { points })
    }

    /// Build a curve, dropping consecutive duplicates first.
    pub fn from_points_dedup(mut points: Vec<Point>) -> Result<Self> {
        points.dedup();
        Self::new(points)
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn into_points(self) -> Vec<Point> {
        self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn first(&self) -> Point {
        self.points[0]
    }

    pub fn last(&self) -> Point {
        self.points[self.points.len() - 1]
    }

    /// Cumulative arc length at every point, starting at 0.
    pub fn arc_lengths(&self) -> Vec<f64> {
        let mut acc = Vec::with_capacity(self.points.len());
        let mut s = 0.0;
        acc.push(0.0);
        for w in self.points.windows(2) {
            s += (w[1] - w[0]).norm();
            acc.push(s);
        }
        acc
    }

    pub fn length(&self) -> f64 {
        self.points.windows(2).map(|w| (w[1] - w[0]).norm()).sum()
    }

    pub fn centroid(&self) -> Point {
        let sum = self.points.iter().fold(Vec2::zeros(), |acc, p| acc + p.coords);
        Point::from(sum / self.points.len() as f64)
    }

    /// Point at arc length `s`, clamped to the curve.
    pub fn point_at(&self, arcs: &[f64], s: f64) -> Point {
        let total = *arcs.last().unwrap();
        let s = s.clamp(0.0, total);
        let i = match arcs.binary_search_by(|a| a.partial_cmp(&s).unwrap()) {
            Ok(i) => return self.points[i],
            Err(i) => i.clamp(1, arcs.len() - 1),
        };
        let (s0, s1) = (arcs[i - 1], arcs[i]);
        let t = if s1 > s0 { (s - s0) / (s1 - s0) } else { 0.0 };
        self.points[i - 1] + (self.points[i] - self.points[i - 1]) * t
    }

    /// `count` points spaced uniformly by arc length, endpoints included.
    pub fn resample(&self, count: usize) -> Result<Self> {
        if count < 2 {
            return Err(Error::param("resample count must be at least 2"));
        }
        let arcs = self.arc_lengths();
        let total = *arcs.last().unwrap();
        let pts = (0..count)
            .map(|k| self.point_at(&arcs, total * k as f64 / (count - 1) as f64))
            .collect();
        Self::from_points_dedup(pts)
    }

    /// Insert points so that consecutive points are at most `max_spacing`
    /// apart. Original points are kept.
    pub fn densify(&self, max_spacing: f64) -> Vec<Point> {
        assert!(max_spacing > 0.0);
        let mut out = Vec::with_capacity(self.points.len());
        out.push(self.points[0]);
        for w in self.points.windows(2) {
            let d = (w[1] - w[0]).norm();
            let k = (d / max_spacing).floor() as usize + 1;
            for j in 1..=k {
                out.push(w[0] + (w[1] - w[0]) * (j as f64 / k as f64));
            }
        }
        out
    }

    pub fn reversed(&self) -> Self {
        let mut pts = self.points.clone();
        pts.reverse();
        Self { points: pts }
    }
}

/// Turning angle at interior point `i`: the angle between `s_i - s_{i-1}`
/// and `s_{i+1} - s_i`, in `[0, pi]`.
pub fn curvature_angle(curve: &PolylineCurve, i: usize) -> Result<f64> {
    let n = curve.len();
    if i == 0 || i + 1 >= n {
        return Err(Error::param(format!(
            "curvature needs an interior index, got {i} of {n}"
        )));
    }
    let p = curve.points();
    Ok(vector_angle(&(p[i] - p[i - 1]), &(p[i + 1] - p[i])))
}

/// Rotate by `rotation` radians about the curve centroid, then translate.
pub fn transform_curve(curve: &PolylineCurve, translation: Vec2, rotation: f64) -> PolylineCurve {
    let c = curve.centroid();
    let rot = Rotation2::new(rotation);
    let points = curve.points().iter().map(|p| c + rot * (p - c) + translation).collect();
    PolylineCurve { points }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn pts(v: &[(f64, f64)]) -> Vec<Point> {
        v.iter().map(|&(x, y)| Point::new(x, y)).collect()
    }

    #[test]
    fn rejects_degenerate_curves() {
        assert!(PolylineCurve::new(pts(&[(0.0, 0.0)])).is_err());
        assert!(PolylineCurve::new(pts(&[(0.0, 0.0), (0.0, 0.0), (1.0, 0.0)])).is_err());
    }

    #[test]
    fn curvature_examples() {
        let c = PolylineCurve::new(pts(&[(0.0, 0.0), (1.0, 0.0), (2.0, 0.0)])).unwrap();
        assert_eq!(curvature_angle(&c, 1).unwrap(), 0.0);
        let c = PolylineCurve::new(pts(&[(0.0, 0.0), (1.0, 0.0), (1.0, 1.0)])).unwrap();
        assert_relative_eq!(curvature_angle(&c, 1).unwrap(), FRAC_PI_2, epsilon = 1e-15);
        // acos(a.b / |a||b|) with a = (1, 0), b = (1, 0.5)
        let c = PolylineCurve::new(pts(&[(0.0, 0.0), (1.0, 0.0), (2.0, 0.5)])).unwrap();
        assert_relative_eq!(curvature_angle(&c, 1).unwrap(), 0.46364760900080615, epsilon = 1e-12);
        assert!(curvature_angle(&c, 0).is_err());
        assert!(curvature_angle(&c, 2).is_err());
    }

    #[test]
    fn hairpin_turn_is_pi() {
        let c = PolylineCurve::new(pts(&[(0.0, 0.0), (1.0, 0.0), (0.0, 0.0)])).unwrap();
        assert_relative_eq!(curvature_angle(&c, 1).unwrap(), PI);
    }

    #[test]
    fn transform_examples() {
        let c = PolylineCurve::new(pts(&[(0.0, 0.0), (1.0, 2.0), (3.0, 1.0)])).unwrap();
        assert_eq!(transform_curve(&c, Vec2::zeros(), 0.0), c);
        let t = transform_curve(&c, Vec2::new(3.0, -2.0), 0.0);
        for (a, b) in t.points().iter().zip(c.points()) {
            assert_eq!(a - b, Vec2::new(3.0, -2.0));
        }
        let twice = transform_curve(&transform_curve(&c, Vec2::zeros(), PI), Vec2::zeros(), PI);
        for (a, b) in twice.points().iter().zip(c.points()) {
            assert!((a - b).norm() < 1e-9);
        }
    }

    #[test]
    fn resample_and_densify() {
        let c = PolylineCurve::new(pts(&[(0.0, 0.0), (2.0, 0.0), (2.0, 2.0)])).unwrap();
        let r = c.resample(5).unwrap();
        assert_eq!(r.len(), 5);
        assert_relative_eq!(r.points()[2].x, 2.0);
        assert_relative_eq!(r.points()[2].y, 0.0);
        let d = c.densify(0.3);
        assert!(d.windows(2).all(|w| (w[1] - w[0]).norm() <= 0.3 + 1e-12));
        assert_eq!(d[0], c.first());
        assert_eq!(*d.last().unwrap(), c.last());
    }

    proptest! {
        #[test]
        fn transform_preserves_distances(
            raw in prop::collection::vec((-10.0..10.0f64, -10.0..10.0f64), 3..12),
            dx in -5.0..5.0f64, dy in -5.0..5.0f64, rot in -7.0..7.0f64,
        ) {
            let c = PolylineCurve::from_points_dedup(pts(&raw));
            prop_assume!(c.is_ok());
            let c = c.unwrap();
            let t = transform_curve(&c, Vec2::new(dx, dy), rot);
            let (p, q) = (c.points(), t.points());
            for i in 0..p.len() {
                for j in i + 1..p.len() {
                    let a = (p[i] - p[j]).norm();
                    let b = (q[i] - q[j]).norm();
                    prop_assert!((a - b).abs() <= 1e-9 * a.max(1.0));
                }
            }
        }

        #[test]
        fn curvature_in_range(
            raw in prop::collection::vec((-10.0..10.0f64, -10.0..10.0f64), 3..12),
        ) {
            let c = PolylineCurve::from_points_dedup(pts(&raw));
            prop_assume!(c.is_ok());
            let c = c.unwrap();
            for i in 1..c.len() - 1 {
                let a = curvature_angle(&c, i).unwrap();
                prop_assert!((0.0..=PI).contains(&a));
            }
        }
    }
}
