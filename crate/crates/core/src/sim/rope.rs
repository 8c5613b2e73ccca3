use crate::geometry::PolylineCurve;
use crate::{Error, Point, Result};

/// Node chain with uniform rest length between consecutive nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct Rope {
    pub nodes: Vec<Point>,
    pub segment_length: f64,
    pub half_thickness: f64,
}

impl Rope {
    pub fn new(nodes: Vec<Point>, segment_length: f64, half_thickness: f64) -> Result<Self> {
        if nodes.len() < 2 {
            return Err(Error::param("rope needs at least 2 nodes"));
        }
        if !(segment_length > 0.0) || !(half_thickness >= 0.0) {
            return Err(Error::param("rope lengths must be positive"));
        }
        Ok(Self {
            nodes,
            segment_length,
            half_thickness,
        })
    }

    /// `n` nodes evenly spaced by arc length along `curve`; the rest length is
    /// the curve length over `n - 1`.
    pub fn from_curve(curve: &PolylineCurve, n: usize, half_thickness: f64) -> Result<Self> {
        let resampled = curve.resample(n)?;
        Self::new(resampled.into_points(), curve.length() / (n - 1) as f64, half_thickness)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn rest_length(&self) -> f64 {
        self.segment_length * (self.nodes.len() - 1) as f64
    }

    pub fn length(&self) -> f64 {
        self.nodes.windows(2).map(|w| (w[1] - w[0]).norm()).sum()
    }

    /// Relative deviation of the current length from the rest length.
    pub fn length_drift(&self) -> f64 {
        (self.length() - self.rest_length()).abs() / self.rest_length()
    }

    pub fn max_strain(&self) -> f64 {
        self.nodes
            .windows(2)
            .map(|w| ((w[1] - w[0]).norm() - self.segment_length).abs() / self.segment_length)
            .fold(0.0, f64::max)
    }

    /// Unit tangent angle at node `i` (central difference, one-sided at ends).
    pub fn tangent_angle(&self, i: usize) -> f64 {
        let n = self.nodes.len();
        let a = self.nodes[i.saturating_sub(1)];
        let b = self.nodes[(i + 1).min(n - 1)];
        let d = b - a;
        d.y.atan2(d.x)
    }

    pub fn curve(&self) -> Result<PolylineCurve> {
        PolylineCurve::from_points_dedup(self.nodes.clone())
    }
}
