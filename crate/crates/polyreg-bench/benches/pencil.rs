use criterion::{criterion_group, criterion_main, Criterion};
use polyreg::certificates::{certify, VertexConfig};
use polyreg::exact::Exact;
use polyreg::pencil::{self, BcPair, MuBound, PencilConfig};
use polyreg::windows::{max_s_range, TheoremId};
use polyreg::{BcKind, SearchBox};
use std::f64::consts::PI;
use std::hint::black_box;

fn pair(a: u8, b: u8) -> BcPair {
    BcPair::new(BcKind::new(a).unwrap(), BcKind::new(b).unwrap())
}

fn bench_char_fn(c: &mut Criterion) {
    let z = num_complex::Complex64::new(1.3, 0.7);
    c.bench_function("char_fn (0,3)", |b| {
        b.iter(|| pencil::char_fn(black_box(pair(0, 3)), black_box(1.9), black_box(z)).unwrap())
    });
}

fn bench_count_zeros(c: &mut Criterion) {
    let cfg = PencilConfig::default();
    let search = SearchBox::new(0.05, 3.0, -2.0, 2.0).unwrap();
    c.bench_function("count_zeros (0,0) reentrant box", |b| {
        b.iter(|| pencil::count_zeros(pair(0, 0), black_box(1.5 * PI), search, &cfg).unwrap())
    });
}

fn bench_mu(c: &mut Criterion) {
    let cfg = PencilConfig::default();
    c.bench_function("mu (0,0) reentrant", |b| {
        b.iter(|| pencil::mu(pair(0, 0), black_box(1.5 * PI), &cfg).unwrap())
    });
    c.bench_function("mu (0,3) mixed", |b| {
        b.iter(|| pencil::mu(pair(0, 3), black_box(1.25 * PI), &cfg).unwrap())
    });
}

fn bench_max_s_range(c: &mut Criterion) {
    let cert = certify(&VertexConfig {
        vertex_id: "v".into(),
        incident_bcs: vec![BcKind::DIRICHLET; 3],
        edge_pairs: vec![pair(0, 0); 3],
        convex: false,
        lipschitz: true,
        cond_ii_face_special: false,
    })
    .unwrap();
    let mus = vec![MuBound::strict_lower(Exact::ratio(1, 2)); 12];
    let certs = vec![cert; 8];
    c.bench_function("max_s_range dirichlet weak", |b| {
        b.iter(|| max_s_range(TheoremId::WeakBounded, 1, black_box(&mus), black_box(&certs)))
    });
}

criterion_group!(benches, bench_char_fn, bench_count_zeros, bench_mu, bench_max_s_range);
criterion_main!(benches);
