use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};

use qmo::loss::{BatchLoss, QmoLoss};
use qmo::metrics::{align_global, tanimoto, AlignmentParams};
use qmo::rng::{stream, Role};
use qmo::zo::{estimate_gradient, estimate_gradient_batched, perturbed_points, sample_directions, EstimatorConfig};
use qmo_bench::{codebook, fingerprint, protein, quadratic};

fn estimator(c: &mut Criterion) {
    let mut group = c.benchmark_group("zo_estimate");
    for (d, q) in [(32, 20), (100, 100), (512, 50)] {
        let (problem, z) = quadratic(d);
        let cfg = EstimatorConfig::new(q, 1e-2).unwrap();
        let dirs = sample_directions(d, q, &mut stream(0, Role::Directions, 0)).unwrap();
        group.throughput(Throughput::Elements((q + 1) as u64));
        group.bench_with_input(BenchmarkId::new("quadratic", format!("d{d}_q{q}")), &(d, q), |b, _| {
            b.iter(|| estimate_gradient(|p| Ok(problem.loss(p)), black_box(&z), &cfg, &dirs).unwrap())
        });
    }
    let d = 100;
    group.bench_function("sample_directions/d100_q100", |b| {
        let mut rng = stream(0, Role::Directions, 1);
        b.iter(|| sample_directions(black_box(d), 100, &mut rng).unwrap())
    });
    group.finish();
}

fn codebook_iteration(c: &mut Criterion) {
    let setup = codebook();
    let start = &setup.starts[0];
    let objective = setup.objective_for(start);
    let loss = QmoLoss::new(&objective, &setup.suite).unwrap();
    let cfg = EstimatorConfig::new(100, 2.0).unwrap();
    let dirs = sample_directions(loss.dim(), 100, &mut stream(0, Role::Directions, 0)).unwrap();
    c.bench_function("codebook_iteration/q100", |b| {
        b.iter(|| {
            estimate_gradient_batched(
                |zs| Ok(loss.evaluate_batch(zs)?.into_iter().map(|a| a.loss).collect()),
                black_box(&start.latent),
                &cfg,
                &dirs,
            )
            .unwrap()
        })
    });
    c.bench_function("perturbed_points/d24_q100", |b| {
        b.iter(|| perturbed_points(black_box(&start.latent), 2.0, &dirs).unwrap())
    });
}

fn alignment(c: &mut Criterion) {
    let p = AlignmentParams::blosum62();
    let mut group = c.benchmark_group("align_global");
    for len in [12, 50, 200] {
        let x = protein(len, 1);
        let y = protein(len, 2);
        group.throughput(Throughput::Elements((len * len) as u64));
        group.bench_with_input(BenchmarkId::from_parameter(len), &len, |b, _| {
            b.iter(|| align_global(black_box(&x), black_box(&y), &p).unwrap())
        });
    }
    group.finish();
}

fn tanimoto_bench(c: &mut Criterion) {
    let mut group = c.benchmark_group("tanimoto");
    for width in [64, 2048] {
        let a = fingerprint(width, 0.3, 1);
        let b = fingerprint(width, 0.3, 2);
        group.bench_with_input(BenchmarkId::from_parameter(width), &width, |bench, _| {
            bench.iter(|| tanimoto(black_box(&a), black_box(&b)).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, estimator, codebook_iteration, alignment, tanimoto_bench);
criterion_main!(benches);
