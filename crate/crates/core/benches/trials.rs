//! Sequential against rayon-parallel execution of the main Monte-Carlo loops.
//! On a single-core machine the two should be close; the gap shows the
//! scheduling overhead.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use hypertree::boundary::Mode;
use hypertree::harness::{annealed_histogram, BallExperiment};
use hypertree::par::{map_trials, trial_rng, Exec, Trials};
use hypertree::sampler::{DppSampler, Verify};
use hypertree::skeleton::{ball_distribution, MatchChoice, DEFAULT_MAX_DEPTH};

const STRATEGIES: [(&str, Exec); 2] = [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)];

fn dpp_draws(c: &mut Criterion) {
    let mut group = c.benchmark_group("dpp_draws_6_2");
    let sampler = DppSampler::new(6, 2, Mode::Exact).unwrap();
    for (name, exec) in STRATEGIES {
        group.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| {
                map_trials(exec, 256, |t| {
                    sampler.draw(&mut trial_rng(1, t), t, Verify::Never).unwrap().ranks.len()
                })
            })
        });
    }
    group.finish();
}

fn skeleton_histogram(c: &mut Criterion) {
    let mut group = c.benchmark_group("skeleton_2_4");
    for (name, exec) in STRATEGIES {
        group.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| {
                let trials = Trials::new(2_000, 2).with_exec(exec);
                black_box(ball_distribution(2, 4, trials, MatchChoice::Uniform, DEFAULT_MAX_DEPTH).unwrap())
            })
        });
    }
    group.finish();
}

fn annealed_balls(c: &mut Criterion) {
    let mut group = c.benchmark_group("annealed_30_1_4");
    group.sample_size(20);
    for (name, exec) in STRATEGIES {
        let experiment = BallExperiment {
            exec,
            ..BallExperiment::new(30, 1, 4, 500, 3)
        };
        group.bench_with_input(BenchmarkId::from_parameter(name), &experiment, |b, e| {
            b.iter(|| black_box(annealed_histogram(e).unwrap()))
        });
    }
    group.finish();
}

criterion_group!(benches, dpp_draws, skeleton_histogram, annealed_balls);
criterion_main!(benches);
