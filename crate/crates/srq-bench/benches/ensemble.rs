use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

use srq_core::sweep::{run_sweep, PartitionChoice, SweepConfig};

fn bench_grid_point(c: &mut Criterion) {
    let config = SweepConfig {
        n_values: vec![4],
        d_values: vec![4],
        partitions: PartitionChoice::AllOrdered { cap: 8 },
        samples: 100,
        master_seed: 17,
        dim_cap: 1 << 20,
    };
    c.bench_function("sweep_point_n4_d4_100_samples", |b| {
        b.iter(|| black_box(run_sweep(&config).unwrap()))
    });
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(10);
    targets = bench_grid_point
}
criterion_main!(benches);
