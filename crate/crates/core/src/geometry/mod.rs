//! Curve generation, curvature, keypoint sampling, rigid transforms and
//! rasterization.

mod curve;
mod fourier;
mod keypoints;
mod raster;

pub use curve::{curvature_angle, transform_curve, PolylineCurve};
pub use fourier::{concatenate_segments, fourier_segment, FourierSegment};
pub use keypoints::{sample_keypoint_indices, sample_keypoints, Frame, KeypointSequence};
pub use raster::{rasterize, rasterize_pixels, BinaryImage, Roi, WorldImageMap};

pub type Point = nalgebra::Point2<f64>;
pub type Vec2 = nalgebra::Vector2<f64>;

/// Default curvature threshold for keypoint substitution.
pub const DEFAULT_TAU_U: f64 = std::f64::consts::FRAC_PI_4;

/// Angle between two vectors in `[0, pi]`.
pub fn vector_angle(a: &Vec2, b: &Vec2) -> f64 {
    let cross = a.x * b.y - a.y * b.x;
    cross.abs().atan2(a.dot(b))
}

/// z-component of the 2D cross product.
#[inline]
pub fn cross(a: &Vec2, b: &Vec2) -> f64 {
    a.x * b.y - a.y * b.x
}

/// Counter-clockwise perpendicular.
#[inline]
pub fn perp(v: &Vec2) -> Vec2 {
    Vec2::new(-v.y, v.x)
}

/// Distance from `p` to the segment `a`-`b`.
pub fn point_segment_distance(p: &Point, a: &Point, b: &Point) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_squared();
    if len2 == 0.0 {
        return (p - a).norm();
    }
    let t = ((p - a).dot(&ab) / len2).clamp(0.0, 1.0);
    (p - (a + ab * t)).norm()
}

/// Wrap an angle to `(-pi, pi]`.
pub fn wrap_angle(a: f64) -> f64 {
    use std::f64::consts::PI;
    let mut r = a.rem_euclid(2.0 * PI);
    if r > PI {
        r -= 2.0 * PI;
    }
    r
}
