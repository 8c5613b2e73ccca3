use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::format::{write_dataset, Manifest};
use super::{GenConfig, Split};
use crate::geometry::{
    concatenate_segments, fourier_segment, rasterize, sample_keypoint_indices, transform_curve, FourierSegment, Frame,
    PolylineCurve, Roi, WorldImageMap,
};
use crate::par::{map_indices, ExecMode};
use crate::{BinaryImage, Error, KeypointSequence, Point, Result, Vec2};

/// Rejected attempts allowed per sample.
pub const MAX_RETRIES: usize = 16;
/// Minimum fraction of set pixels for an accepted sample.
pub const MIN_OCCUPANCY: f64 = 0.01;

/// Generation metadata stored with a sample.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleMeta {
    pub index: usize,
    pub seed: u64,
    /// Half thickness used for rendering, in pixels.
    pub half_thickness: f32,
}

/// Binary image with its ordered image-frame keypoint labels.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledSample {
    pub image: BinaryImage,
    pub keypoints: KeypointSequence,
    pub meta: SampleMeta,
}

/// SplitMix64 finalizer.
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of sample `index`: `splitmix64(seed ^ splitmix64(index))`.
pub fn sample_seed(master: u64, index: usize) -> u64 {
    splitmix64(master ^ splitmix64(index as u64))
}

/// Split membership: within every block of `train + test` consecutive
/// indices the last `test` are test samples.
pub fn split_of(cfg: &GenConfig, index: usize) -> Split {
    let [train, test] = cfg.split_ratio;
    let period = train + test;
    if index % period >= train {
        Split::Test
    } else {
        Split::Train
    }
}

fn uniform(rng: &mut ChaCha8Rng, r: [f64; 2]) -> f64 {
    if r[0] == r[1] {
        r[0]
    } else {
        rng.gen_range(r[0]..r[1])
    }
}

fn uniform_int(rng: &mut ChaCha8Rng, r: [usize; 2]) -> usize {
    rng.gen_range(r[0]..=r[1])
}

fn random_curve(cfg: &GenConfig, rng: &mut ChaCha8Rng) -> Result<PolylineCurve> {
    let count = uniform_int(rng, cfg.segments);
    let segments = (0..count)
        .map(|_| {
            let length = uniform(rng, cfg.segment_length);
            let n = uniform_int(rng, cfg.harmonics);
            let amp = uniform(rng, cfg.amplitude) * length;
            let harmonics = (1..=n)
                .map(|k| {
                    let a = amp / k as f64;
                    (rng.gen_range(-1.0..=1.0) * a, rng.gen_range(-1.0..=1.0) * a)
                })
                .collect();
            let omega = std::f64::consts::TAU * uniform(rng, cfg.cycles) / length;
            fourier_segment(&FourierSegment {
                a0: 0.0,
                harmonics,
                omega,
                x_span: (0.0, length),
                sample_count: (length / 0.25).ceil() as usize + 1,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    concatenate_segments(&segments)
}

/// Generate one sample; a pure function of `(cfg, seed)`.
///
/// Draw segments, concatenate, label keypoints, apply a random rotation,
/// shrink to fit the image if needed, translate uniformly inside the margin,
/// rasterize and map labels to the image frame (rounded to `f32`, left end
/// first). Attempts whose raster covers less than 1% of the image or whose
/// labels miss the body are redrawn with the next sub-seed.
pub fn generate_sample(cfg: &GenConfig, index: usize, seed: u64) -> Result<LabeledSample> {
    for attempt in 0..=MAX_RETRIES {
        let mut rng = ChaCha8Rng::seed_from_u64(splitmix64(seed.wrapping_add(attempt as u64)));
        if let Some(sample) = try_sample(cfg, index, seed, &mut rng)? {
            return Ok(sample);
        }
    }
    Err(Error::GenerationFailed {
        index,
        retries: MAX_RETRIES,
    })
}

fn try_sample(cfg: &GenConfig, index: usize, seed: u64, rng: &mut ChaCha8Rng) -> Result<Option<LabeledSample>> {
    let raw = random_curve(cfg, rng)?;
    if raw.len() < cfg.m {
        return Ok(None);
    }
    let label_idx = sample_keypoint_indices(&raw, cfg.m, cfg.tau_u)?;

    let rotation = rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI);
    let rotated = transform_curve(&raw, Vec2::zeros(), rotation);
    let (w, h) = (cfg.width as f64, cfg.height as f64);
    let ht = uniform(rng, cfg.half_thickness);
    let pad = cfg.margin + ht;
    let (lo, hi) = bbox(rotated.points());
    let extent = hi - lo;
    let scale = ((w - 2.0 * pad) / extent.x).min((h - 2.0 * pad) / extent.y).min(1.0);
    let c = rotated.centroid();
    let scaled: Vec<Point> = rotated.points().iter().map(|p| c + (p - c) * scale).collect();
    let (lo, hi) = bbox(&scaled);
    let tx = rng.gen_range(0.0..=1.0) * (w - 2.0 * pad - (hi.x - lo.x)).max(0.0) + pad - lo.x;
    let ty = rng.gen_range(0.0..=1.0) * (h - 2.0 * pad - (hi.y - lo.y)).max(0.0) + pad - lo.y;
    let placed = PolylineCurve::from_points_dedup(scaled.iter().map(|p| p + Vec2::new(tx, ty)).collect())?;

    let roi = Roi::new(0.0, 0.0, w, h);
    let image = rasterize(&placed, ht, cfg.width, cfg.height, roi)?;
    if (image.count_ones() as f64) < MIN_OCCUPANCY * image.pixel_count() as f64 {
        return Ok(None);
    }
    let map = WorldImageMap::new(roi, cfg.width, cfg.height)?;
    let labels: Vec<Point> = label_idx
        .iter()
        .map(|&i| {
            let q = map.to_image(placed.points()[i]);
            Point::new(q.x as f32 as f64, q.y as f32 as f64)
        })
        .collect();
    let keypoints = KeypointSequence::new(labels, Frame::Image).left_first();
    if !keypoints.points().iter().all(|p| image.at_point(*p)) {
        return Ok(None);
    }
    Ok(Some(LabeledSample {
        image,
        keypoints,
        meta: SampleMeta {
            index,
            seed,
            half_thickness: ht as f32,
        },
    }))
}

fn bbox(points: &[Point]) -> (Point, Point) {
    points.iter().fold(
        (
            Point::new(f64::INFINITY, f64::INFINITY),
            Point::new(f64::NEG_INFINITY, f64::NEG_INFINITY),
        ),
        |(lo, hi), p| {
            (
                Point::new(lo.x.min(p.x), lo.y.min(p.y)),
                Point::new(hi.x.max(p.x), hi.y.max(p.y)),
            )
        },
    )
}

/// Generate samples `0..cfg.samples` in index order.
pub fn generate_samples(cfg: &GenConfig, mode: ExecMode) -> Result<Vec<LabeledSample>> {
    cfg.validate()?;
    map_indices(mode, cfg.samples, |i| generate_sample(cfg, i, sample_seed(cfg.seed, i)))
        .into_iter()
        .collect()
}

/// Outcome of [`generate_dataset`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DatasetSummary {
    pub train: usize,
    pub test: usize,
    /// The output already held an identical dataset and nothing was written.
    pub skipped: bool,
}

/// Write the dataset described by `cfg` to `out`: a manifest plus one record
/// per sample under `train/` and `test/`. If `out` already holds the same
/// manifest and all listed records, nothing is regenerated.
pub fn generate_dataset(cfg: &GenConfig, out: &Path, mode: ExecMode) -> Result<DatasetSummary> {
    cfg.validate()?;
    let manifest = Manifest::for_config(cfg);
    let (train, test) = cfg.split_counts();
    if manifest.matches_existing(out) {
        return Ok(DatasetSummary {
            train,
            test,
            skipped: true,
        });
    }
    let samples = generate_samples(cfg, mode)?;
    write_dataset(out, &manifest, &samples)?;
    Ok(DatasetSummary {
        train,
        test,
        skipped: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(samples: usize) -> GenConfig {
        GenConfig {
            samples,
            ..GenConfig::default()
        }
    }

    #[test]
    fn deterministic() {
        let cfg = small(1);
        let a = generate_sample(&cfg, 0, 42).unwrap();
        let b = generate_sample(&cfg, 0, 42).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, generate_sample(&cfg, 0, 43).unwrap());
    }

    #[test]
    fn straight_degenerate_config() {
        let cfg = GenConfig {
            segments: [1, 1],
            harmonics: [0, 0],
            half_thickness: [1.5, 1.5],
            ..small(1)
        };
        let s = generate_sample(&cfg, 0, 7).unwrap();
        let p = s.keypoints.points();
        assert_eq!(p.len(), 16);
        let d: Vec<f64> = p.windows(2).map(|w| (w[1] - w[0]).norm()).collect();
        let mean = d.iter().sum::<f64>() / d.len() as f64;
        assert!(d.iter().all(|x| (x - mean).abs() < 0.3), "{d:?}");
        // collinear
        let dir = (p[15] - p[0]).normalize();
        for q in p {
            let off = q - p[0];
            assert!((off.x * dir.y - off.y * dir.x).abs() < 0.01);
        }
    }

    #[test]
    fn labels_on_body_and_left_first() {
        let cfg = small(200);
        let samples = generate_samples(&cfg, ExecMode::Parallel).unwrap();
        for s in &samples {
            assert_eq!(s.keypoints.len(), 16);
            assert!(s.keypoints.points().iter().all(|p| s.image.at_point(*p)));
            assert!(s.keypoints.is_left_first());
        }
    }

    #[test]
    fn sequential_equals_parallel() {
        let cfg = small(24);
        assert_eq!(
            generate_samples(&cfg, ExecMode::Sequential).unwrap(),
            generate_samples(&cfg, ExecMode::Parallel).unwrap()
        );
    }

    #[test]
    fn seeds_are_distinct() {
        let seeds: std::collections::BTreeSet<u64> = (0..1000).map(|i| sample_seed(5, i)).collect();
        assert_eq!(seeds.len(), 1000);
    }
}
