use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use pplab::FieldCtx;

fn construction(c: &mut Criterion) {
    let mut group = c.benchmark_group("field_construction");
    for (p, n) in [(2, 8), (3, 8), (2, 16), (5, 6)] {
        group.bench_with_input(
            BenchmarkId::from_parameter(format!("{p}^{n}")),
            &(p, n),
            |b, &(p, n)| b.iter(|| FieldCtx::new(black_box(p), black_box(n)).unwrap()),
        );
    }
    group.finish();
}

fn multiplication(c: &mut Criterion) {
    let mut group = c.benchmark_group("mul");
    for (p, n) in [(3, 4), (2, 12)] {
        let field = FieldCtx::new(p, n).unwrap();
        let pairs: Vec<_> = (1..=256u64)
            .map(|i| {
                let a = field.element_at(i * 7 % field.order()).unwrap();
                let b = field.element_at(i * 13 % field.order()).unwrap();
                (a, b)
            })
            .collect();
        group.bench_function(BenchmarkId::new("table", format!("{p}^{n}")), |b| {
            b.iter(|| {
                for &(x, y) in &pairs {
                    black_box(field.mul(x, y));
                }
            })
        });
        group.bench_function(BenchmarkId::new("schoolbook", format!("{p}^{n}")), |b| {
            b.iter(|| {
                for &(x, y) in &pairs {
                    black_box(field.mul_by_coeffs(x, y));
                }
            })
        });
    }
    group.finish();
}

criterion_group!(benches, construction, multiplication);
criterion_main!(benches);
