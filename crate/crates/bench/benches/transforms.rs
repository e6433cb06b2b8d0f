use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use wigmarg_core::gaussian::CovarianceMatrix;
use wigmarg_core::grid::{Partition, PhaseSpaceGrid};
use wigmarg_core::states;
use wigmarg_core::wigner::{
    density_from_wigner, marginalize_b, wigner_of_density, wigner_transform,
};

fn bench_wigner_transform(c: &mut Criterion) {
    let mut group = c.benchmark_group("wigner_transform_1dof");
    for points in [64usize, 128] {
        let grid = states::standard_grid(1, points, 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let psi = states::random_packet(&grid, &mut rng).unwrap();
        group.bench_function(format!("N{points}"), |b| {
            b.iter(|| wigner_transform(&psi).unwrap())
        });
    }
    group.finish();
}

fn bench_bipartite_pipeline(c: &mut Criterion) {
    let grid = states::standard_grid(2, 32, 1.0).unwrap();
    let part = Partition::new(1, 1).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let rho = states::random_mixed(&grid, &part, 3, &mut rng).unwrap();
    let mut group = c.benchmark_group("bipartite_N32");
    group.sample_size(20);
    group.bench_function("wigner_of_density", |b| {
        b.iter(|| wigner_of_density(&rho).unwrap())
    });
    group.bench_function("partial_trace", |b| {
        b.iter(|| rho.partial_trace(&part).unwrap())
    });
    let w = wigner_of_density(&rho).unwrap();
    group.bench_function("marginalize_b", |b| {
        b.iter(|| marginalize_b(&w, &part).unwrap())
    });
    group.finish();
}

fn bench_reconstruction(c: &mut Criterion) {
    let grid = states::standard_grid(1, 64, 1.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let rho = states::random_density(&grid, 3, &mut rng).unwrap();
    let w = wigner_of_density(&rho).unwrap();
    c.bench_function("density_from_wigner_N64", |b| {
        b.iter(|| density_from_wigner(&w).unwrap())
    });
}

fn bench_spectral(c: &mut Criterion) {
    let grid = states::standard_grid(1, 64, 1.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let rho = states::random_density(&grid, 4, &mut rng).unwrap();
    c.bench_function("spectral_decompose_N64", |b| {
        b.iter_batched(
            || rho.clone(),
            |r| r.spectral_decompose(1e-12).unwrap(),
            BatchSize::SmallInput,
        )
    });
}

fn bench_gaussian_sampling(c: &mut Criterion) {
    let cov = CovarianceMatrix::two_mode_squeezed(0.5, 1.0).unwrap();
    let grid = PhaseSpaceGrid::new(2, 64, -8.0, 8.0, 1.0).unwrap();
    let mut group = c.benchmark_group("gaussian");
    group.sample_size(10);
    group.bench_function("sample_wigner_2dof_N64", |b| {
        b.iter(|| cov.sample_wigner(&grid).unwrap())
    });
    group.finish();
}

criterion_group!(
    benches,
    bench_wigner_transform,
    bench_bipartite_pipeline,
    bench_reconstruction,
    bench_spectral,
    bench_gaussian_sampling
);
criterion_main!(benches);
