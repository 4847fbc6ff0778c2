use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use tropkern::sampling::{self, trial_rng};
use tropkern::semimetric::{star_closure, star_closure_serial};
use tropkern::semimodule::GroundSet;
use tropkern::semiring::{Scalar, SemiringKind};
use tropkern::KernelMatrix;

const KIND: SemiringKind = SemiringKind::RmaxComplete;

fn nonpositive_matrix(n: usize, seed: u64) -> KernelMatrix {
    let g = GroundSet::indexed(n).unwrap();
    let mut rng = trial_rng(seed, 0);
    let raw = sampling::random_kernel(&g, &g, KIND, &mut rng);
    let entries = (0..n)
        .flat_map(|x| {
            let row = raw.row(x);
            (0..n)
                .map(|y| {
                    let e = row.get(y);
                    if e.is_zero() {
                        e
                    } else {
                        Scalar::new(KIND, -e.value().abs()).unwrap()
                    }
                })
                .collect::<Vec<_>>()
        })
        .collect();
    KernelMatrix::new(g.clone(), g, KIND, entries).unwrap()
}

fn bench_compose(c: &mut Criterion) {
    let mut group = c.benchmark_group("compose");
    for n in [16usize, 48, 96] {
        let a = nonpositive_matrix(n, 11);
        let b = nonpositive_matrix(n, 12);
        group.bench_with_input(BenchmarkId::new("parallel", n), &n, |bench, _| {
            bench.iter(|| a.compose(&b).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("serial", n), &n, |bench, _| {
            bench.iter(|| a.compose_serial(&b).unwrap())
        });
    }
    group.finish();
}

fn bench_star_closure(c: &mut Criterion) {
    let mut group = c.benchmark_group("star_closure");
    for n in [16usize, 48, 96] {
        let m = nonpositive_matrix(n, 13);
        group.bench_with_input(BenchmarkId::new("parallel", n), &n, |bench, _| {
            bench.iter(|| star_closure(&m).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("serial", n), &n, |bench, _| {
            bench.iter(|| star_closure_serial(&m).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, bench_compose, bench_star_closure);
criterion_main!(benches);
