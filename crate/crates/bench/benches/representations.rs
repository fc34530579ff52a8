use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use dmatroid::field::{random_uniform_rep, AnyField};

const SEED: u64 = 7;

fn ow_derived(c: &mut Criterion) {
    let mut group = c.benchmark_group("ow_derived");
    for (label, field) in [("gf7^2", "7^2"), ("gf10007", "10007"), ("q", "Q")] {
        let rep = random_uniform_rep(3, 6, AnyField::from_cli(field).unwrap(), SEED).unwrap();
        group.bench_with_input(BenchmarkId::new("u3_6", label), &rep, |b, rep| {
            b.iter(|| rep.ow_derived().unwrap())
        });
    }
    group.finish();
}

fn column_matroid(c: &mut Criterion) {
    let mut group = c.benchmark_group("column_matroid");
    for (k, n) in [(3, 7), (4, 9), (5, 11)] {
        let rep = random_uniform_rep(k, n, AnyField::from_cli("10007").unwrap(), SEED).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(format!("u{k}_{n}")), &rep, |b, rep| {
            b.iter(|| rep.matroid().unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, ow_derived, column_matroid);
criterion_main!(benches);
