use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use schro_maxlab::maximal::maximal_field;
use schro_maxlab::timesets::{seq_generate, SequenceKind};
use schro_maxlab::{ExponentParams, FrequencyGrid, SpectralSampler, SpectrumKind};

fn evaluation(c: &mut Criterion) {
    let params = ExponentParams::new(2.0, 0.5, 1).unwrap();
    let mut group = c.benchmark_group("evaluate");
    for m in [64usize, 256, 1024] {
        let grid = FrequencyGrid::new(1, std::f64::consts::TAU, m).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let f = SpectralSampler::new(grid, SpectrumKind::default()).sample(&mut rng);
        let resolution = 2 * grid.side();
        let points: Vec<f64> = (0..resolution)
            .map(|j| j as f64 * grid.period() / resolution as f64)
            .collect();
        group.bench_with_input(BenchmarkId::new("lattice", m), &m, |b, _| {
            b.iter(|| f.evaluate_lattice(black_box(0.3), &params, resolution).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("direct", m), &m, |b, _| {
            b.iter(|| f.evaluate(black_box(0.3), &params, &points).unwrap())
        });
    }
    group.finish();
}

fn maximal(c: &mut Criterion) {
    let params = ExponentParams::new(2.0, 0.5, 1).unwrap();
    let grid = FrequencyGrid::new(1, std::f64::consts::TAU, 64).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let f = SpectralSampler::new(grid, SpectrumKind::default()).sample(&mut rng);
    let e = seq_generate(SequenceKind::Power(2.0), 200).unwrap();
    c.bench_function("maximal_field/power2_200", |b| {
        b.iter(|| maximal_field(&f, &e, &params, 258).unwrap())
    });
}

criterion_group!(benches, evaluation, maximal);
criterion_main!(benches);
