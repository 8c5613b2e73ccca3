//! Corner and keypoint error statistics of a detector over labeled samples.

use std::fmt;

use super::{corner_error, finetune_keypoints, keypoint_error, FixedDetector, GeometricDetector, KeypointDetector};
use crate::dataset::LabeledSample;
use crate::metrics::MetricReport;
use crate::par::{map_slice, ExecMode};
use crate::{KeypointSequence, Result};

/// Detector under evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DetectorKind {
    Geometric,
    /// Passes the ground-truth labels through.
    Oracle,
}

impl DetectorKind {
    pub fn name(self) -> &'static str {
        match self {
            DetectorKind::Geometric => "geometric",
            DetectorKind::Oracle => "oracle",
        }
    }
}

/// Corner and keypoint error statistics in pixels.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectorReport {
    pub detector: String,
    pub finetuned: bool,
    pub samples: usize,
    /// Samples on which detection returned an error; excluded from the stats.
    pub failures: usize,
    pub corner: MetricReport,
    pub keypoint: MetricReport,
    /// Keypoints not on a positive pixel, summed over evaluated samples.
    pub off_body: usize,
    pub keypoints_total: usize,
}

impl DetectorReport {
    pub fn mean_off_body(&self) -> f64 {
        if self.keypoints_total == 0 {
            0.0
        } else {
            self.off_body as f64 / (self.keypoints_total as f64)
        }
    }

    /// Machine-readable `key=value` line.
    pub fn record(&self) -> String {
        format!(
            "detector={} finetune={} samples={} failures={} mu_c={:.4} var_c={:.4} mu_p={:.4} var_p={:.4} off_body={}",
            self.detector,
            self.finetuned,
            self.samples,
            self.failures,
            self.corner.mean,
            self.corner.variance,
            self.keypoint.mean,
            self.keypoint.variance,
            self.off_body
        )
    }
}

impl fmt::Display for DetectorReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = if self.finetuned {
            format!("{}+finetune", self.detector)
        } else {
            self.detector.clone()
        };
        writeln!(
            f,
            "{:<20} {:>9} {:>9} {:>9} {:>9} {:>9}",
            "detector", "mu_C", "var_C", "mu_P", "var_P", "off-body"
        )?;
        writeln!(
            f,
            "{:<20} {:>9.3} {:>9.3} {:>9.3} {:>9.3} {:>9}",
            name, self.corner.mean, self.corner.variance, self.keypoint.mean, self.keypoint.variance, self.off_body
        )?;
        write!(f, "samples {} failures {}", self.samples, self.failures)
    }
}

struct Outcome {
    corner: f64,
    keypoint: f64,
    off_body: usize,
    m: usize,
}

fn evaluate_one(sample: &LabeledSample, kind: DetectorKind, finetune: bool) -> Result<Outcome> {
    let truth = &sample.keypoints;
    let m = truth.len();
    let raw = match kind {
        DetectorKind::Geometric => GeometricDetector.detect(&sample.image, m)?,
        DetectorKind::Oracle => FixedDetector(truth.clone()).detect(&sample.image, m)?,
    };
    let pred: KeypointSequence = if finetune {
        finetune_keypoints(&raw, &sample.image)?
    } else {
        raw
    };
    let off_body = pred.points().iter().filter(|p| !sample.image.at_point(**p)).count();
    Ok(Outcome {
        corner: corner_error(&pred, truth)?,
        keypoint: keypoint_error(&pred, truth)?,
        off_body,
        m,
    })
}

/// Run a detector (optionally followed by finetuning) on every sample and
/// aggregate `E_C` / `E_P`.
pub fn evaluate_detector(
    samples: &[LabeledSample],
    kind: DetectorKind,
    finetune: bool,
    mode: ExecMode,
) -> DetectorReport {
    let outcomes = map_slice(mode, samples, |s| evaluate_one(s, kind, finetune).ok());
    let ok: Vec<&Outcome> = outcomes.iter().flatten().collect();
    let corners: Vec<f64> = ok.iter().map(|o| o.corner).collect();
    let kps: Vec<f64> = ok.iter().map(|o| o.keypoint).collect();
    DetectorReport {
        detector: kind.name().to_string(),
        finetuned: finetune,
        samples: samples.len(),
        failures: samples.len() - ok.len(),
        corner: MetricReport::from_samples("E_C", &corners),
        keypoint: MetricReport::from_samples("E_P", &kps),
        off_body: ok.iter().map(|o| o.off_body).sum(),
        keypoints_total: ok.iter().map(|o| o.m).sum(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{generate_samples, GenConfig};

    #[test]
    fn oracle_scores_zero() {
        let cfg = GenConfig {
            samples: 20,
            ..GenConfig::default()
        };
        let samples = generate_samples(&cfg, ExecMode::Sequential).unwrap();
        let r = evaluate_detector(&samples, DetectorKind::Oracle, false, ExecMode::Sequential);
        assert_eq!((r.failures, r.off_body), (0, 0));
        assert_eq!(r.corner.mean, 0.0);
        assert_eq!(r.keypoint.variance, 0.0);
        let f = evaluate_detector(&samples, DetectorKind::Oracle, true, ExecMode::Sequential);
        assert_eq!(f.keypoint.mean, 0.0);
    }

    #[test]
    fn finetuned_geometric_is_on_body() {
        let cfg = GenConfig {
            samples: 40,
            ..GenConfig::default()
        };
        let samples = generate_samples(&cfg, ExecMode::Parallel).unwrap();
        let r = evaluate_detector(&samples, DetectorKind::Geometric, true, ExecMode::Parallel);
        assert_eq!(r.off_body, 0);
        assert!(r.failures < 4, "{r}");
    }
}
