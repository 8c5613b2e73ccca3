//! Geometric keypoint detector: skeleton, end search, nearest-neighbour
//! ordering and uniform sampling by traversal length.

use super::skeleton::{skeletonize, Skeleton};
use crate::geometry::Frame;
use crate::{BinaryImage, Error, KeypointSequence, Point, Result};

/// Spurs shorter than this (pixels) are pruned before counting endpoints.
pub const MIN_SPUR_LEN: usize = 3;

/// Anything that maps a binary DLO image to `m` ordered image-frame keypoints.
pub trait KeypointDetector: Sync {
    fn detect(&self, image: &BinaryImage, m: usize) -> Result<KeypointSequence>;
}

/// Strict geometric detection.
///
/// The largest skeleton component is pruned of short spurs and must then
/// have exactly two endpoints. The endpoint with the smaller `u` (ties:
/// smaller `v`) becomes the first keypoint; skeleton pixels are ordered by
/// greedy nearest-neighbour traversal until the other endpoint is reached,
/// and `m` pixel centers are picked uniformly by traversal length.
pub fn detect_keypoints_geometric(image: &BinaryImage, m: usize) -> Result<KeypointSequence> {
    let skel = main_skeleton(image)?;
    if skel.endpoints.len() != 2 {
        return Err(Error::AmbiguousSkeleton {
            endpoints: skel.endpoints.len(),
        });
    }
    let (start, end) = order_ends(skel.endpoints[0], skel.endpoints[1]);
    let order = nearest_neighbour_order(&skel.pixels, start, Some(end));
    sample_by_traversal(&order, m, skel.len())
}

fn main_skeleton(image: &BinaryImage) -> Result<Skeleton> {
    let skel = skeletonize(image)?;
    let comp = skel
        .components()
        .into_iter()
        .next()
        .ok_or(Error::EmptyInput("no skeleton pixels"))?;
    Ok(comp.prune_spurs(MIN_SPUR_LEN))
}

fn order_ends(a: (usize, usize), b: (usize, usize)) -> ((usize, usize), (usize, usize)) {
    if (a.0, a.1) <= (b.0, b.1) {
        (a, b)
    } else {
        (b, a)
    }
}

/// Greedy nearest-neighbour tour from `start`. Stops once `terminal` is
/// visited or every pixel has been visited. Ties go to the pixel listed
/// first (row-major input gives smaller `v`, then smaller `u`).
pub fn nearest_neighbour_order(
    pixels: &[(usize, usize)],
    start: (usize, usize),
    terminal: Option<(usize, usize)>,
) -> Vec<(usize, usize)> {
    let mut visited = vec![false; pixels.len()];
    let mut order = Vec::with_capacity(pixels.len());
    let Some(mut cur) = pixels.iter().position(|&p| p == start) else {
        return order;
    };
    loop {
        visited[cur] = true;
        order.push(pixels[cur]);
        if Some(pixels[cur]) == terminal {
            break;
        }
        let (cu, cv) = (pixels[cur].0 as i64, pixels[cur].1 as i64);
        let mut best: Option<(i64, usize)> = None;
        for (i, &(u, v)) in pixels.iter().enumerate() {
            if visited[i] {
                continue;
            }
            let d = (u as i64 - cu).pow(2) + (v as i64 - cv).pow(2);
            if best.is_none_or(|(bd, _)| d < bd) {
                best = Some((d, i));
            }
        }
        match best {
            Some((_, i)) => cur = i,
            None => break,
        }
    }
    order
}

fn sample_by_traversal(order: &[(usize, usize)], m: usize, skeleton_pixels: usize) -> Result<KeypointSequence> {
    if m < 2 {
        return Err(Error::param("need at least 2 keypoints"));
    }
    if order.len() < m {
        return Err(Error::SkeletonTooShort {
            pixels: skeleton_pixels.min(order.len()),
            m,
        });
    }
    let centers: Vec<Point> = order
        .iter()
        .map(|&(u, v)| Point::new(u as f64 + 0.5, v as f64 + 0.5))
        .collect();
    let mut cum = Vec::with_capacity(centers.len());
    let mut s = 0.0;
    cum.push(0.0);
    for w in centers.windows(2) {
        s += (w[1] - w[0]).norm();
        cum.push(s);
    }
    let total = s;
    let points = (0..m)
        .map(|j| {
            let target = total * j as f64 / (m - 1) as f64;
            let i = cum.partition_point(|&c| c < target);
            let i = if i == 0 {
                0
            } else if i >= cum.len() {
                cum.len() - 1
            } else if target - cum[i - 1] <= cum[i] - target {
                i - 1
            } else {
                i
            };
            centers[i]
        })
        .collect();
    Ok(KeypointSequence::new(points, Frame::Image))
}

/// Geometric detector that tolerates imperfect skeletons.
///
/// Tries [`detect_keypoints_geometric`]; on an ambiguous skeleton it retries
/// on a morphologically closed image, then falls back to the two endpoints
/// farthest apart (or the leftmost pixel of a loop) as tour ends.
#[derive(Debug, Clone, Copy, Default)]
pub struct GeometricDetector;

impl KeypointDetector for GeometricDetector {
    fn detect(&self, image: &BinaryImage, m: usize) -> Result<KeypointSequence> {
        match detect_keypoints_geometric(image, m) {
            Err(Error::AmbiguousSkeleton { .. }) => {}
            other => return other,
        }
        let closed = close3(image);
        match detect_keypoints_geometric(&closed, m) {
            Ok(k) => return Ok(k),
            Err(Error::AmbiguousSkeleton { .. }) | Err(Error::SkeletonTooShort { .. }) => {}
            Err(e) => return Err(e),
        }
        let skel = main_skeleton(image)?;
        let (start, terminal) = if skel.endpoints.len() >= 2 {
            let mut best = (skel.endpoints[0], skel.endpoints[1], 0i64);
            for (i, &a) in skel.endpoints.iter().enumerate() {
                for &b in &skel.endpoints[i + 1..] {
                    let d = (a.0 as i64 - b.0 as i64).pow(2) + (a.1 as i64 - b.1 as i64).pow(2);
                    if d > best.2 {
                        best = (a, b, d);
                    }
                }
            }
            let (s, t) = order_ends(best.0, best.1);
            (s, Some(t))
        } else {
            let first = skel
                .endpoints
                .first()
                .copied()
                .or_else(|| skel.pixels.iter().copied().min())
                .ok_or(Error::EmptyInput("no skeleton pixels"))?;
            (first, None)
        };
        let order = nearest_neighbour_order(&skel.pixels, start, terminal);
        sample_by_traversal(&order, m, skel.len())
    }
}

/// Ground-truth passthrough, useful to validate evaluation plumbing.
#[derive(Debug, Clone)]
pub struct FixedDetector(pub KeypointSequence);

impl KeypointDetector for FixedDetector {
    fn detect(&self, _image: &BinaryImage, m: usize) -> Result<KeypointSequence> {
        if self.0.len() != m {
            return Err(Error::LengthMismatch {
                expected: m,
                actual: self.0.len(),
            });
        }
        Ok(self.0.clone())
    }
}

/// 3x3 dilation followed by 3x3 erosion.
pub fn close3(image: &BinaryImage) -> BinaryImage {
    let (w, h) = image.dims();
    let mut dil = BinaryImage::new(w, h);
    for (u, v) in image.ones() {
        for dv in -1..=1 {
            for du in -1..=1 {
                dil.set_signed(u as i64 + du, v as i64 + dv);
            }
        }
    }
    let mut out = BinaryImage::new(w, h);
    for (u, v) in dil.ones() {
        let keep = (-1..=1).all(|dv| {
            (-1..=1).all(|du| {
                let (a, b) = (u as i64 + du, v as i64 + dv);
                // the border does not erode
                a < 0 || b < 0 || a >= w as i64 || b >= h as i64 || dil.get(a as usize, b as usize)
            })
        });
        if keep {
            out.set(u, v, true);
        }
    }
    out
}
