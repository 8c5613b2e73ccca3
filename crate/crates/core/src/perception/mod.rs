//! Keypoint detection from binary DLO images, geometric finetuning and
//! detection-quality metrics.

mod detect;
mod eval;
mod finetune;
mod skeleton;

pub use detect::{
    close3, detect_keypoints_geometric, nearest_neighbour_order, FixedDetector, GeometricDetector, KeypointDetector,
    MIN_SPUR_LEN,
};
pub use eval::{evaluate_detector, DetectorKind, DetectorReport};
pub use finetune::{finetune_keypoints, nearest_positive, SEARCH_STEP};
pub use skeleton::{skeletonize, Skeleton};

use crate::geometry::rasterize_pixels;
use crate::{BinaryImage, Error, KeypointSequence, Result};

fn check_lengths(pred: &KeypointSequence, truth: &KeypointSequence) -> Result<()> {
    if pred.len() != truth.len() {
        return Err(Error::LengthMismatch {
            expected: truth.len(),
            actual: pred.len(),
        });
    }
    if truth.is_empty() {
        return Err(Error::EmptyInput("keypoint sequences are empty"));
    }
    Ok(())
}

/// Mean distance of the two end keypoints.
pub fn corner_error(pred: &KeypointSequence, truth: &KeypointSequence) -> Result<f64> {
    check_lengths(pred, truth)?;
    let (p, t) = (pred.points(), truth.points());
    let m = p.len();
    Ok(0.5 * ((p[0] - t[0]).norm() + (p[m - 1] - t[m - 1]).norm()))
}

/// Mean distance over all keypoints.
pub fn keypoint_error(pred: &KeypointSequence, truth: &KeypointSequence) -> Result<f64> {
    check_lengths(pred, truth)?;
    let sum: f64 = pred
        .points()
        .iter()
        .zip(truth.points())
        .map(|(a, b)| (a - b).norm())
        .sum();
    Ok(sum / pred.len() as f64)
}

/// Rasterize the keypoint polyline (image frame) with the given half
/// thickness in pixels.
pub fn reconstruct_from_keypoints(
    kps: &KeypointSequence,
    half_thickness: f64,
    width: usize,
    height: usize,
) -> Result<BinaryImage> {
    if kps.len() < 2 {
        return Err(Error::param("reconstruction needs at least 2 keypoints"));
    }
    Ok(rasterize_pixels(
        kps.points(),
        (half_thickness, half_thickness),
        width,
        height,
    ))
}
