use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use dlo_core::dataset::{generate_samples, GenConfig};
use dlo_core::par::{map_slice, ExecMode};
use dlo_core::planner::run_episode;
use dlo_core::scenario::{family_placements, FAMILIES};

const MODES: [(&str, ExecMode); 2] = [("sequential", ExecMode::Sequential), ("parallel", ExecMode::Parallel)];

fn dataset(c: &mut Criterion) {
    let cfg = GenConfig {
        samples: 64,
        ..GenConfig::default()
    };
    let mut group = c.benchmark_group("generate_samples");
    group.sample_size(10);
    for (name, mode) in MODES {
        group.bench_with_input(BenchmarkId::from_parameter(name), &mode, |b, &mode| {
            b.iter(|| generate_samples(&cfg, mode).unwrap())
        });
    }
    group.finish();
}

fn episodes(c: &mut Criterion) {
    let list: Vec<_> = FAMILIES.iter().flat_map(|f| family_placements(f, 2).unwrap()).collect();
    let mut group = c.benchmark_group("episode_batch");
    group.sample_size(10);
    for (name, mode) in MODES {
        group.bench_with_input(BenchmarkId::from_parameter(name), &mode, |b, &mode| {
            b.iter(|| map_slice(mode, &list, |s| run_episode(s, &s.planner).map(|l| l.success)))
        });
    }
    group.finish();
}

criterion_group!(benches, dataset, episodes);
criterion_main!(benches);
