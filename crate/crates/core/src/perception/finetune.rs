//! Geometric finetuning: move off-body keypoints back onto the DLO.

use crate::{BinaryImage, Error, KeypointSequence, Point, Result, Vec2};

/// Step of the perpendicular search, in pixels.
pub const SEARCH_STEP: f64 = 0.5;

/// Snap every off-body keypoint onto a positive pixel.
///
/// End keypoints go to the center of the nearest positive pixel. Interior
/// keypoint `j` searches along both directions perpendicular to
/// `p[j+1] - p[j-1]` in [`SEARCH_STEP`] increments up to the image diagonal;
/// the nearer hit wins and ties go to the smaller `v`. A failed search falls
/// back to the nearest-pixel snap. Neighbours are taken from the raw input.
pub fn finetune_keypoints(raw: &KeypointSequence, image: &BinaryImage) -> Result<KeypointSequence> {
    if image.is_empty() {
        return Err(Error::EmptyInput("cannot finetune against an empty image"));
    }
    let p = raw.points();
    let m = p.len();
    let out = (0..m)
        .map(|j| {
            if image.at_point(p[j]) {
                return p[j];
            }
            if j == 0 || j + 1 == m {
                return nearest_positive(image, p[j]);
            }
            let tangent = p[j + 1] - p[j - 1];
            perpendicular_hit(image, p[j], tangent).unwrap_or_else(|| nearest_positive(image, p[j]))
        })
        .collect();
    Ok(KeypointSequence::new(out, raw.frame()))
}

fn perpendicular_hit(image: &BinaryImage, p: Point, tangent: Vec2) -> Option<Point> {
    let len = tangent.norm();
    if len == 0.0 {
        return None;
    }
    let normal = Vec2::new(-tangent.y, tangent.x) / len;
    let (w, h) = image.dims();
    let max_r = ((w * w + h * h) as f64).sqrt();
    let steps = (max_r / SEARCH_STEP).ceil() as usize;
    for k in 1..=steps {
        let t = k as f64 * SEARCH_STEP;
        let a = p + normal * t;
        let b = p - normal * t;
        match (image.at_point(a), image.at_point(b)) {
            (true, true) => return Some(if b.y < a.y { b } else { a }),
            (true, false) => return Some(a),
            (false, true) => return Some(b),
            _ => {}
        }
    }
    None
}

/// Center of the positive pixel nearest to `p` (ties: smaller `v`, then `u`).
pub fn nearest_positive(image: &BinaryImage, p: Point) -> Point {
    let mut best: Option<(f64, Point)> = None;
    for (u, v) in image.ones() {
        let c = Point::new(u as f64 + 0.5, v as f64 + 0.5);
        let d = (c - p).norm_squared();
        if best.is_none_or(|(bd, _)| d < bd) {
            best = Some((d, c));
        }
    }
    best.map(|(_, c)| c).unwrap_or(p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Frame;

    fn horizontal_band() -> BinaryImage {
        let mut img = BinaryImage::new(40, 20);
        for v in 10..13 {
            for u in 0..40 {
                img.set(u, v, true);
            }
        }
        img
    }

    #[test]
    fn on_body_points_unchanged() {
        let img = horizontal_band();
        let k = KeypointSequence::new(
            vec![Point::new(1.5, 11.2), Point::new(20.1, 10.0), Point::new(38.0, 12.9)],
            Frame::Image,
        );
        assert_eq!(finetune_keypoints(&k, &img).unwrap(), k);
    }

    #[test]
    fn interior_point_drops_onto_band() {
        let img = horizontal_band();
        // 2 px above the band top edge (v = 10)
        let k = KeypointSequence::new(
            vec![Point::new(5.5, 11.5), Point::new(20.5, 8.0), Point::new(35.5, 11.5)],
            Frame::Image,
        );
        let out = finetune_keypoints(&k, &img).unwrap();
        // brute force along the vertical ray through u = 20.5
        let first_hit = (1..100)
            .map(|i| 8.0 + 0.5 * i as f64)
            .find(|&v| img.at_point(Point::new(20.5, v)))
            .unwrap();
        assert_eq!(out.points()[1], Point::new(20.5, first_hit));
        assert_eq!(first_hit, 10.0);
    }

    #[test]
    fn end_point_snaps_to_nearest_pixel() {
        let img = horizontal_band();
        let raw = Point::new(-3.2, 4.7);
        let k = KeypointSequence::new(vec![raw, Point::new(20.5, 11.5)], Frame::Image);
        let out = finetune_keypoints(&k, &img).unwrap();
        // brute force over all positive pixels
        let mut best = (f64::MAX, Point::origin());
        for v in 0..20 {
            for u in 0..40 {
                if img.get(u, v) {
                    let c = Point::new(u as f64 + 0.5, v as f64 + 0.5);
                    let d = (c - raw).norm();
                    if d < best.0 {
                        best = (d, c);
                    }
                }
            }
        }
        assert_eq!(out.points()[0], best.1);
    }

    #[test]
    fn empty_image_errors() {
        let k = KeypointSequence::new(vec![Point::new(1.0, 1.0), Point::new(2.0, 2.0)], Frame::Image);
        assert!(finetune_keypoints(&k, &BinaryImage::new(4, 4)).is_err());
    }

    #[test]
    fn degenerate_tangent_falls_back() {
        let img = horizontal_band();
        let k = KeypointSequence::new(
            vec![Point::new(5.5, 2.0), Point::new(20.5, 2.0), Point::new(5.5, 2.0)],
            Frame::Image,
        );
        let out = finetune_keypoints(&k, &img).unwrap();
        assert!(out.points().iter().all(|p| img.at_point(*p)));
    }
}
