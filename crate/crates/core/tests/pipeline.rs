use std::fs;
use std::path::Path;

use dlo_core::dataset::*;
use dlo_core::geometry::{Frame, KeypointSequence};
use dlo_core::metrics::{chamfer, iou, l1_pixel};
use dlo_core::par::ExecMode;
use dlo_core::perception::*;
use dlo_core::{BinaryImage, Point};
use proptest::prelude::*;

fn small(samples: usize) -> GenConfig {
    GenConfig {
        samples,
        ..GenConfig::default()
    }
}

fn tree(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out = Vec::new();
    for sub in ["", "train", "test"] {
        let Ok(rd) = fs::read_dir(dir.join(sub)) else { continue };
        let mut files: Vec<_> = rd.map(|e| e.unwrap().path()).filter(|p| p.is_file()).collect();
        files.sort();
        for f in files {
            out.push((
                f.strip_prefix(dir).unwrap().display().to_string(),
                fs::read(&f).unwrap(),
            ));
        }
    }
    out
}

#[test]
fn datasets_are_byte_identical_across_modes_and_runs() {
    let cfg = small(33);
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let sa = generate_dataset(&cfg, a.path(), ExecMode::Parallel).unwrap();
    let sb = generate_dataset(&cfg, b.path(), ExecMode::Sequential).unwrap();
    assert_eq!((sa.train, sa.test, sa.skipped), (30, 3, false));
    assert!(!sb.skipped);
    let ta = tree(a.path());
    assert_eq!(ta.len(), 34);
    assert_eq!(ta, tree(b.path()));
    assert!(generate_dataset(&cfg, a.path(), ExecMode::Parallel).unwrap().skipped);
}

#[test]
fn saved_splits_load_back_exactly() {
    let cfg = small(22);
    let dir = tempfile::tempdir().unwrap();
    generate_dataset(&cfg, dir.path(), ExecMode::Parallel).unwrap();
    let all = generate_samples(&cfg, ExecMode::Sequential).unwrap();
    let test = load_split(dir.path(), Split::Test).unwrap();
    let expected: Vec<_> = all
        .iter()
        .filter(|s| split_of(&cfg, s.meta.index) == Split::Test)
        .cloned()
        .collect();
    assert_eq!(test, expected);
    assert_eq!(load_split(dir.path(), Split::Train).unwrap().len(), 20);
}

#[test]
fn labels_cover_every_quadrant() {
    let cfg = small(1000);
    let samples = generate_samples(&cfg, ExecMode::Parallel).unwrap();
    let (w, h) = (cfg.width as f64 / 2.0, cfg.height as f64 / 2.0);
    let mut quadrants = [0usize; 4];
    for s in &samples {
        for p in s.keypoints.points() {
            assert!(s.image.at_point(*p), "label off the band in sample {}", s.meta.index);
            quadrants[(p.x >= w) as usize + 2 * (p.y >= h) as usize] += 1;
        }
    }
    assert!(quadrants.iter().all(|&q| q > 0), "{quadrants:?}");
}

#[test]
fn reconstruction_is_idempotent() {
    let cfg = small(100);
    for s in generate_samples(&cfg, ExecMode::Parallel).unwrap() {
        let ht = s.meta.half_thickness as f64;
        let first = reconstruct_from_keypoints(&s.keypoints, ht, cfg.width, cfg.height).unwrap();
        let again = finetune_keypoints(&s.keypoints, &first).unwrap();
        let second = reconstruct_from_keypoints(&again, ht, cfg.width, cfg.height).unwrap();
        assert!(iou(&second, &first).unwrap() >= iou(&first, &s.image).unwrap());
    }
}

#[test]
fn detected_keypoints_follow_the_labels() {
    let cfg = small(40);
    let mut close = 0;
    let samples = generate_samples(&cfg, ExecMode::Parallel).unwrap();
    for s in &samples {
        let Ok(raw) = detect_keypoints_geometric(&s.image, cfg.m) else {
            continue;
        };
        let fine = finetune_keypoints(&raw, &s.image).unwrap();
        assert!(fine.points().iter().all(|p| s.image.at_point(*p)));
        if corner_error(&fine, &s.keypoints).unwrap() < 4.0 {
            close += 1;
        }
    }
    assert!(
        close * 4 >= samples.len() * 3,
        "corners found in {close}/{}",
        samples.len()
    );
}

fn image(w: usize, h: usize, bits: &[bool]) -> BinaryImage {
    let mut img = BinaryImage::new(w, h);
    for v in 0..h {
        for u in 0..w {
            img.set(u, v, bits[v * w + u]);
        }
    }
    img
}

fn image_pair() -> impl Strategy<Value = (usize, usize, Vec<bool>, Vec<bool>)> {
    (1usize..20, 1usize..12).prop_flat_map(|(w, h)| {
        (
            Just(w),
            Just(h),
            prop::collection::vec(any::<bool>(), w * h),
            prop::collection::vec(any::<bool>(), w * h),
        )
    })
}

proptest! {
    #[test]
    fn image_metrics_match_pixel_counts((w, h, a, b) in image_pair()) {
        let (ia, ib) = (image(w, h, &a), image(w, h, &b));
        let inter = a.iter().zip(&b).filter(|(x, y)| **x && **y).count();
        let union = a.iter().zip(&b).filter(|(x, y)| **x || **y).count();
        let diff = a.iter().zip(&b).filter(|(x, y)| x != y).count();
        let expected = if union == 0 { 0.0 } else { inter as f64 / union as f64 };
        prop_assert_eq!(iou(&ia, &ib).unwrap(), expected);
        prop_assert_eq!(iou(&ib, &ia).unwrap(), expected);
        prop_assert_eq!(l1_pixel(&ia, &ib).unwrap(), diff as f64 / (w * h) as f64);
    }

    #[test]
    fn chamfer_matches_brute_force(
        a in prop::collection::vec((-5.0..5.0f64, -5.0..5.0f64), 1..30),
        b in prop::collection::vec((-5.0..5.0f64, -5.0..5.0f64), 1..30),
    ) {
        let pa: Vec<Point> = a.iter().map(|&(x, y)| Point::new(x, y)).collect();
        let pb: Vec<Point> = b.iter().map(|&(x, y)| Point::new(x, y)).collect();
        let near = |p: &Point, set: &[Point]| set.iter().map(|q| (p.x - q.x).powi(2) + (p.y - q.y).powi(2)).fold(f64::INFINITY, f64::min);
        let brute: f64 = pa.iter().map(|p| near(p, &pb)).sum::<f64>() + pb.iter().map(|p| near(p, &pa)).sum::<f64>();
        let got = chamfer(&pa, &pb).unwrap();
        prop_assert!((got - brute).abs() <= 1e-12 * brute.max(1.0));
        prop_assert_eq!(got, chamfer(&pb, &pa).unwrap());
        prop_assert_eq!(chamfer(&pa, &pa).unwrap(), 0.0);
    }

    // A horizontal band rows 20..=24; truth on its centre row, raw points
    // pushed off vertically by less than the band thickness.
    #[test]
    fn finetune_never_worsens_near_misses(offsets in prop::collection::vec(-4i32..=4, 16)) {
        let mut img = BinaryImage::new(64, 48);
        for v in 20..=24 {
            for u in 0..64 {
                img.set(u, v, true);
            }
        }
        let truth: Vec<Point> = (0..16).map(|j| Point::new(2.0 + 4.0 * j as f64, 22.0)).collect();
        let raw: Vec<Point> = truth.iter().zip(&offsets).map(|(p, &d)| Point::new(p.x, p.y + 2.0 * d as f64)).collect();
        let truth = KeypointSequence::new(truth, Frame::Image);
        let raw = KeypointSequence::new(raw, Frame::Image);
        let fine = finetune_keypoints(&raw, &img).unwrap();
        prop_assert!(fine.points().iter().all(|p| img.at_point(*p)));
        prop_assert!(keypoint_error(&fine, &truth).unwrap() <= keypoint_error(&raw, &truth).unwrap() + 1e-12);
    }
}
