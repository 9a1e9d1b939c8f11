use beepmis::experiment::{run_experiment_sequential, ExperimentSpec, Family};
use beepmis::graph::erdos_renyi;
use beepmis::policy::Policy;
use beepmis::{run, RunConfig};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

fn spec(policy: Policy, n: usize) -> ExperimentSpec {
    ExperimentSpec {
        policy,
        family: Family::ErdosRenyi(0.5),
        n_values: vec![n],
        trials: 32,
        master_seed: 1,
        max_rounds: None,
    }
}

fn single_run(c: &mut Criterion) {
    let mut group = c.benchmark_group("single_run");
    for n in [64, 256, 1024] {
        let g = erdos_renyi(n, 0.5, 9).unwrap();
        for policy in [Policy::feedback(), Policy::GlobalSweep] {
            group.bench_with_input(BenchmarkId::new(policy.to_string(), n), &g, |b, g| {
                b.iter(|| run(black_box(g), &policy, 3, RunConfig::default()))
            });
        }
    }
    group.finish();
}

fn trials(c: &mut Criterion) {
    let mut group = c.benchmark_group("trials");
    group.sample_size(10);
    for n in [128, 512] {
        let s = spec(Policy::feedback(), n);
        group.bench_with_input(BenchmarkId::new("sequential", n), &s, |b, s| {
            b.iter(|| run_experiment_sequential(s).unwrap())
        });
        #[cfg(feature = "parallel")]
        group.bench_with_input(BenchmarkId::new("parallel", n), &s, |b, s| {
            b.iter(|| beepmis::experiment::run_experiment_parallel(s).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, single_run, trials);
criterion_main!(benches);
