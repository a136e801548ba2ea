use std::hint::black_box;

use adaptile::geometry::{CellGrid, FrameGeometry};
use adaptile::metrics::evaluate;
use adaptile::mnc::partition_grid;
use adaptile::par::{self, Execution};
use adaptile::projection::FovSize;
use adaptile::scheme::{build_video, TilingParams};
use adaptile::synth::{generate, Scenario, SynthConfig};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

const EXECS: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn tiling(c: &mut Criterion) {
    let traces = generate(&SynthConfig::new(Scenario::TwoCluster, 20, 2.0, 1), "bench").unwrap();
    let geom = FrameGeometry::default();
    let params = TilingParams::default();
    let mut group = c.benchmark_group("build_video_5_keyframes");
    group.sample_size(10);
    for (name, exec) in EXECS {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| build_video(black_box(&traces), &geom, &params, exec).unwrap())
        });
    }
    group.finish();
}

fn evaluation(c: &mut Criterion) {
    let traces = generate(&SynthConfig::new(Scenario::RandomWalk, 30, 2.0, 2), "bench").unwrap();
    let tiling = build_video(
        &traces,
        &FrameGeometry::default(),
        &TilingParams::default(),
        Execution::Parallel,
    )
    .unwrap();
    let scheme = tiling.scheme(1.0).unwrap();
    let mut group = c.benchmark_group("evaluate_30_users");
    group.sample_size(10);
    for (name, exec) in EXECS {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| evaluate(&[&scheme], black_box(&traces), FovSize::default(), exec).unwrap())
        });
    }
    group.finish();
}

fn mnc_batch(c: &mut Criterion) {
    // every 4x4 bit pattern, one partition per connected grid
    let grids: Vec<CellGrid> = (1u32..1 << 16)
        .map(|m| CellGrid::from_cells(4, 4, (0..16).filter(|i| m >> i & 1 == 1).map(|i| (i / 4, i % 4))))
        .collect();
    let mut group = c.benchmark_group("mnc_all_4x4_grids");
    group.sample_size(10);
    for (name, exec) in EXECS {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| par::map(exec, &grids, |g| partition_grid(g).unwrap().len()))
        });
    }
    group.finish();
}

criterion_group!(benches, tiling, evaluation, mnc_batch);
criterion_main!(benches);
