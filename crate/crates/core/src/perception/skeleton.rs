//! Zhang-Suen thinning and skeleton clean-up.

use crate::{BinaryImage, Error, Result};

/// 8-neighbour offsets in Zhang-Suen order P2..P9 (N, NE, E, SE, S, SW, W, NW).
const RING: [(i64, i64); 8] = [(0, -1), (1, -1), (1, 0), (1, 1), (0, 1), (-1, 1), (-1, 0), (-1, -1)];

/// One-pixel-wide, 8-connected skeleton of a binary image.
#[derive(Debug, Clone, PartialEq)]
pub struct Skeleton {
    mask: BinaryImage,
    /// Row-major.
    pub pixels: Vec<(usize, usize)>,
    /// Pixels with exactly one skeleton neighbour, row-major.
    pub endpoints: Vec<(usize, usize)>,
}

impl Skeleton {
    pub fn from_mask(mask: BinaryImage) -> Self {
        let pixels: Vec<_> = mask.ones().collect();
        let endpoints = pixels
            .iter()
            .copied()
            .filter(|&(u, v)| neighbour_count(&mask, u, v) == 1)
            .collect();
        Self {
            mask,
            pixels,
            endpoints,
        }
    }

    pub fn mask(&self) -> &BinaryImage {
        &self.mask
    }

    pub fn len(&self) -> usize {
        self.pixels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pixels.is_empty()
    }

    pub fn neighbours(&self, u: usize, v: usize) -> Vec<(usize, usize)> {
        neighbours(&self.mask, u, v)
    }

    /// 8-connected components, largest first (ties: first in row-major order).
    pub fn components(&self) -> Vec<Skeleton> {
        let mut seen = BinaryImage::new(self.mask.width(), self.mask.height());
        let mut comps: Vec<Vec<(usize, usize)>> = Vec::new();
        for &(u, v) in &self.pixels {
            if seen.get(u, v) {
                continue;
            }
            let mut stack = vec![(u, v)];
            seen.set(u, v, true);
            let mut comp = Vec::new();
            while let Some((a, b)) = stack.pop() {
                comp.push((a, b));
                for n in neighbours(&self.mask, a, b) {
                    if !seen.get(n.0, n.1) {
                        seen.set(n.0, n.1, true);
                        stack.push(n);
                    }
                }
            }
            comps.push(comp);
        }
        comps.sort_by_key(|c| std::cmp::Reverse(c.len()));
        comps
            .into_iter()
            .map(|c| {
                let mut mask = BinaryImage::new(self.mask.width(), self.mask.height());
                for (u, v) in c {
                    mask.set(u, v, true);
                }
                Skeleton::from_mask(mask)
            })
            .collect()
    }

    /// Remove side branches of fewer than `min_len` pixels that end in a
    /// junction. Repeats until nothing changes.
    pub fn prune_spurs(&self, min_len: usize) -> Skeleton {
        let mut mask = self.mask.clone();
        loop {
            let current = Skeleton::from_mask(mask.clone());
            if current.endpoints.len() <= 2 {
                return current;
            }
            let mut removed = false;
            for &e in &current.endpoints {
                let mut path = vec![e];
                let mut cur = e;
                let hit_junction = loop {
                    let next: Vec<_> = neighbours(&mask, cur.0, cur.1)
                        .into_iter()
                        .filter(|n| !path.contains(n))
                        .collect();
                    if next.len() >= 2 {
                        // `cur` belongs to the spur only if the branch stays
                        // connected without it.
                        let offsets: Vec<(i64, i64)> = next
                            .iter()
                            .map(|&(u, v)| (u as i64 - cur.0 as i64, v as i64 - cur.1 as i64))
                            .collect();
                        if !single_group(&offsets) {
                            path.pop();
                        }
                        break true;
                    }
                    if next.is_empty() || path.len() > min_len {
                        break false;
                    }
                    cur = next[0];
                    path.push(cur);
                };
                if hit_junction && path.len() < min_len && mask_still_has(&mask, &path) {
                    for &(u, v) in &path {
                        mask.set(u, v, false);
                    }
                    removed = true;
                }
            }
            if !removed {
                return Skeleton::from_mask(thin_redundant(mask));
            }
            mask = thin_redundant(mask);
        }
    }
}

fn mask_still_has(mask: &BinaryImage, path: &[(usize, usize)]) -> bool {
    path.iter().all(|&(u, v)| mask.get(u, v))
}

fn ring_values(img: &BinaryImage, u: usize, v: usize) -> [bool; 8] {
    let mut out = [false; 8];
    for (k, (du, dv)) in RING.iter().enumerate() {
        out[k] = img.get_signed(u as i64 + du, v as i64 + dv);
    }
    out
}

fn neighbour_count(img: &BinaryImage, u: usize, v: usize) -> usize {
    ring_values(img, u, v).iter().filter(|&&b| b).count()
}

fn neighbours(img: &BinaryImage, u: usize, v: usize) -> Vec<(usize, usize)> {
    RING.iter()
        .filter_map(|(du, dv)| {
            let (a, b) = (u as i64 + du, v as i64 + dv);
            img.get_signed(a, b).then_some((a as usize, b as usize))
        })
        .collect()
}

/// Number of background -> foreground transitions around the ring.
fn transitions(ring: &[bool; 8]) -> usize {
    (0..8).filter(|&k| !ring[k] && ring[(k + 1) % 8]).count()
}

/// Zhang-Suen thinning until fixpoint, followed by removal of staircase
/// pixels that are redundant for 8-connectivity.
pub fn skeletonize(image: &BinaryImage) -> Result<Skeleton> {
    if image.is_empty() {
        return Err(Error::EmptyInput("cannot skeletonize an empty image"));
    }
    let mut img = image.clone();
    loop {
        let mut changed = false;
        for step in 0..2 {
            let mut delete = Vec::new();
            for (u, v) in img.ones() {
                let p = ring_values(&img, u, v);
                let b = p.iter().filter(|&&x| x).count();
                if !(2..=6).contains(&b) || transitions(&p) != 1 {
                    continue;
                }
                // p[0]=P2 (N), p[2]=P4 (E), p[4]=P6 (S), p[6]=P8 (W)
                let (c1, c2) = if step == 0 {
                    (p[0] && p[2] && p[4], p[2] && p[4] && p[6])
                } else {
                    (p[0] && p[2] && p[6], p[0] && p[4] && p[6])
                };
                if !c1 && !c2 {
                    delete.push((u, v));
                }
            }
            changed |= !delete.is_empty();
            for (u, v) in delete {
                img.set(u, v, false);
            }
        }
        if !changed {
            break;
        }
    }
    Ok(Skeleton::from_mask(thin_redundant(img)))
}

/// Sequentially delete staircase corners: pixels that join two perpendicular
/// 4-neighbours (which are already diagonal neighbours of each other) and
/// whose set neighbours stay one connected group without them.
fn thin_redundant(mut img: BinaryImage) -> BinaryImage {
    loop {
        let mut changed = false;
        let pixels: Vec<_> = img.ones().collect();
        for (u, v) in pixels {
            let p = ring_values(&img, u, v);
            // N E S W are ring slots 0 2 4 6
            let corner = (0..4).any(|k| p[2 * k] && p[(2 * k + 2) % 8]);
            if !corner {
                continue;
            }
            let set: Vec<(i64, i64)> = RING
                .iter()
                .zip(p.iter())
                .filter_map(|(o, &s)| s.then_some(*o))
                .collect();
            if single_group(&set) {
                img.set(u, v, false);
                changed = true;
            }
        }
        if !changed {
            return img;
        }
    }
}

fn single_group(offsets: &[(i64, i64)]) -> bool {
    if offsets.is_empty() {
        return true;
    }
    let mut reached = vec![false; offsets.len()];
    reached[0] = true;
    let mut stack = vec![0];
    while let Some(i) = stack.pop() {
        for j in 0..offsets.len() {
            let (a, b) = (offsets[i], offsets[j]);
            if !reached[j] && (a.0 - b.0).abs() <= 1 && (a.1 - b.1).abs() <= 1 {
                reached[j] = true;
                stack.push(j);
            }
        }
    }
    reached.into_iter().all(|r| r)
}
