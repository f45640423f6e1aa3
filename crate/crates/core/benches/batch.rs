use std::hint::black_box;

use amodal_core::diffusion::{multiregional_inpaint, InpaintConfig, NoiseSchedule, OracleDenoiser};
use amodal_core::eval::region_report;
use amodal_core::mask::default_dilation_radius;
use amodal_core::par::{self, Execution};
use amodal_core::region::identify_batch;
use amodal_core::synth::{generate_suite, SyntheticScene};
use criterion::{BenchmarkId, Criterion};

const CANVAS: usize = 64;
const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn suite(n: usize) -> Vec<SyntheticScene> {
    generate_suite(n, 1, (0.1, 0.7), CANVAS, Execution::Parallel).unwrap()
}

fn bench_generate(c: &mut Criterion) {
    let mut group = c.benchmark_group("generate_suite");
    for (name, exec) in MODES {
        group.bench_function(BenchmarkId::new(name, 64), |b| {
            b.iter(|| generate_suite(64, 7, (0.1, 0.7), CANVAS, black_box(exec)).unwrap())
        });
    }
    group.finish();
}

fn bench_regions(c: &mut Criterion) {
    let scenes = suite(256);
    let masks: Vec<_> = scenes.iter().map(|s| s.scene_masks.clone()).collect();
    let pairs: Vec<_> = scenes.iter().map(|s| (s.scene_masks.clone(), s.full_object_mask.clone())).collect();
    let radius = default_dilation_radius(CANVAS);

    let mut group = c.benchmark_group("identify_batch");
    for (name, exec) in MODES {
        group.bench_function(BenchmarkId::new(name, masks.len()), |b| {
            b.iter(|| identify_batch(black_box(&masks), radius, exec).unwrap())
        });
    }
    group.finish();

    let mut group = c.benchmark_group("region_report");
    for (name, exec) in MODES {
        group.bench_function(BenchmarkId::new(name, pairs.len()), |b| {
            b.iter(|| region_report(black_box(&pairs), radius, exec).unwrap())
        });
    }
    group.finish();
}

fn bench_inpaint(c: &mut Criterion) {
    let scenes = suite(16);
    let radius = default_dilation_radius(CANVAS);
    let jobs: Vec<_> = scenes
        .iter()
        .map(|s| {
            let regions = amodal_core::identify_regions(&s.scene_masks, radius).unwrap();
            (s.segmented_input(), regions, s.ground_truth_image.clone())
        })
        .collect();
    let sched = NoiseSchedule::default();
    let cfg = InpaintConfig::default();

    let mut group = c.benchmark_group("batch_inpaint");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_function(BenchmarkId::new(name, jobs.len()), |b| {
            b.iter(|| {
                par::map(exec, &jobs, |(input, regions, target)| {
                    let mut oracle = OracleDenoiser::new(target.clone());
                    multiregional_inpaint(input, regions, &cfg, &mut oracle, &sched).unwrap()
                })
            })
        });
    }
    group.finish();
}

fn main() {
    let mut c = Criterion::default().configure_from_args();
    bench_generate(&mut c);
    bench_regions(&mut c);
    bench_inpaint(&mut c);
    c.final_summary();
}
