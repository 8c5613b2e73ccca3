use super::{curvature_angle, Point, PolylineCurve, WorldImageMap};
use crate::{Error, Result};

/// Coordinate frame of a keypoint sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Frame {
    /// Continuous pixel coordinates `(u, v)`, `v` pointing down.
    Image,
    World,
}

/// `m` ordered keypoints summarising a DLO, first end to last end.
#[derive(Debug, Clone, PartialEq)]
pub struct KeypointSequence {
    points: Vec<Point>,
    frame: Frame,
}

impl KeypointSequence {
    pub fn new(points: Vec<Point>, frame: Frame) -> Self {
        Self { points, frame }
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn into_points(self) -> Vec<Point> {
        self.points
    }

    pub fn frame(&self) -> Frame {
        self.frame
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn reversed(&self) -> Self {
        let mut points = self.points.clone();
        points.reverse();
        Self {
            points,
            frame: self.frame,
        }
    }

    /// True when the first point is the end with the smaller horizontal
    /// coordinate (ties: smaller vertical coordinate in the image frame).
    pub fn is_left_first(&self) -> bool {
        let (a, b) = match (self.points.first(), self.points.last()) {
            (Some(a), Some(b)) => (a, b),
            _ => return true,
        };
        if a.x != b.x {
            return a.x < b.x;
        }
        match self.frame {
            Frame::Image => a.y <= b.y,
            Frame::World => a.y >= b.y,
        }
    }

    /// Reorder so the left end comes first.
    pub fn left_first(self) -> Self {
        if self.is_left_first() {
            self
        } else {
            self.reversed()
        }
    }

    pub fn to_world(&self, map: &WorldImageMap) -> Self {
        match self.frame {
            Frame::World => self.clone(),
            Frame::Image => Self {
                points: self.points.iter().map(|p| map.to_world(*p)).collect(),
                frame: Frame::World,
            },
        }
    }

    pub fn to_image(&self, map: &WorldImageMap) -> Self {
        match self.frame {
            Frame::Image => self.clone(),
            Frame::World => Self {
                points: self.points.iter().map(|p| map.to_image(*p)).collect(),
                frame: Frame::Image,
            },
        }
    }

    /// Open polyline through the keypoints (consecutive duplicates dropped).
    pub fn to_curve(&self) -> Result<PolylineCurve> {
        PolylineCurve::from_points_dedup(self.points.clone())
    }
}

/// Indices of the curve points chosen as keypoints.
///
/// `m` candidates are placed uniformly by arc length (snapped to curve
/// points). Interior points whose turning angle exceeds `tau_u` then replace
/// their nearest candidate, highest angle first; a candidate is replaced at
/// most once and the curve ends always stay keypoints. Indices are strictly
/// increasing.
pub fn sample_keypoint_indices(curve: &PolylineCurve, m: usize, tau_u: f64) -> Result<Vec<usize>> {
    let n = curve.len();
    if m < 2 {
        return Err(Error::param("need at least 2 keypoints"));
    }
    if m > n {
        return Err(Error::param(format!(
            "cannot sample {m} keypoints from a {n}-point curve"
        )));
    }
    let arcs = curve.arc_lengths();
    let total = arcs[n - 1];
    let targets: Vec<f64> = (0..m).map(|j| total * j as f64 / (m - 1) as f64).collect();

    let mut idx: Vec<usize> = targets.iter().map(|&s| nearest_arc_index(&arcs, s)).collect();
    for (j, i) in idx.iter_mut().enumerate() {
        *i = (*i).clamp(j, n - m + j);
    }
    idx[0] = 0;
    idx[m - 1] = n - 1;
    for j in 1..m {
        idx[j] = idx[j].max(idx[j - 1] + 1);
    }

    let mut sharp: Vec<(usize, f64)> = (1..n - 1)
        .filter_map(|i| {
            let a = curvature_angle(curve, i).ok()?;
            (a > tau_u).then_some((i, a))
        })
        .collect();
    sharp.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));

    let mut replaced = vec![false; m];
    for (i, _) in sharp {
        if m < 3 {
            break;
        }
        let s = arcs[i];
        // nearest interior candidate, ties to the earlier one
        let j = (1..m - 1)
            .min_by(|&a, &b| {
                (targets[a] - s)
                    .abs()
                    .total_cmp(&(targets[b] - s).abs())
                    .then(a.cmp(&b))
            })
            .unwrap();
        if replaced[j] || idx[j] == i {
            replaced[j] = true;
            continue;
        }
        if idx[j - 1] < i && i < idx[j + 1] {
            idx[j] = i;
            replaced[j] = true;
        }
    }
    Ok(idx)
}

/// Keypoints of a curve, in the curve's own (world) frame.
pub fn sample_keypoints(curve: &PolylineCurve, m: usize, tau_u: f64) -> Result<KeypointSequence> {
    let idx = sample_keypoint_indices(curve, m, tau_u)?;
    let points = idx.iter().map(|&i| curve.points()[i]).collect();
    Ok(KeypointSequence::new(points, Frame::World))
}

fn nearest_arc_index(arcs: &[f64], s: f64) -> usize {
    let i = arcs.partition_point(|&a| a < s);
    if i == 0 {
        return 0;
    }
    if i >= arcs.len() {
        return arcs.len() - 1;
    }
    if (s - arcs[i - 1]) <= (arcs[i] - s) {
        i - 1
    } else {
        i
    }
}
