use criterion::{criterion_group, criterion_main, Criterion};
use polyreg::oracle::{assemble_pencil, solve_qep};
use polyreg::pencil::BcPair;
use polyreg::{BcKind, SearchBox};
use std::f64::consts::PI;
use std::hint::black_box;

fn pair(a: u8, b: u8) -> BcPair {
    BcPair::new(BcKind::new(a).unwrap(), BcKind::new(b).unwrap())
}

fn bench_assemble(c: &mut Criterion) {
    c.bench_function("assemble_pencil N=48", |b| {
        b.iter(|| assemble_pencil(black_box(pair(0, 0)), black_box(PI / 2.0), 48).unwrap())
    });
}

fn bench_solve(c: &mut Criterion) {
    // The slow path: companion eigensolve at N plus the 2N stability refine.
    let pencil = assemble_pencil(pair(0, 0), PI / 2.0, 24).unwrap();
    let search = SearchBox::new(0.05, 3.0, -1.0, 1.0).unwrap();
    let mut group = c.benchmark_group("qep");
    group.sample_size(10);
    group.bench_function("solve_qep N=24 (refined at 48)", |b| {
        b.iter(|| solve_qep(black_box(&pencil), search).unwrap())
    });
    group.finish();
}

criterion_group!(benches, bench_assemble, bench_solve);
criterion_main!(benches);
