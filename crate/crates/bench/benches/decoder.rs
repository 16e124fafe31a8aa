use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use edgeinfer_core::fountain::{inactivation_decode, sample_rows, DegreeDistribution};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn decode(c: &mut Criterion) {
    let mut group = c.benchmark_group("inactivation_decode");
    group.sample_size(10);
    for (k, gamma, zeta) in [(1000, 50, 0.01), (5000, 105, 1e-4), (10_000, 210, 1e-4)] {
        let dist = DegreeDistribution::robust_soliton(k, gamma, zeta).unwrap();
        let rows = sample_rows(&dist, k, k + k / 5, &mut ChaCha8Rng::seed_from_u64(1));
        group.bench_with_input(BenchmarkId::from_parameter(k), &rows, |b, rows| {
            b.iter(|| inactivation_decode(rows, k))
        });
    }
    group.finish();
}

criterion_group!(benches, decode);
criterion_main!(benches);
