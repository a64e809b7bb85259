//! Worker-pool vs sequential twins on the hot paths: moment assembly,
//! solution enumeration, certificate verification, and the modular
//! characteristic polynomial. Run with `cargo bench -p soslab-core`;
//! build with `--no-default-features` to measure the pure sequential
//! library (both columns then coincide).

use criterion::{criterion_group, criterion_main, Criterion};

use soslab_core::certificate::{gram_expansion, gram_expansion_seq};
use soslab_core::charpoly::{charpoly_int, charpoly_int_seq};
use soslab_core::counterexample::boolean_chain_certificate;
use soslab_core::moment::{moment_matrix, moment_matrix_seq};
use soslab_core::ratio::{rat, Rat};
use soslab_core::systems::{self};

fn bench_moment_assembly(c: &mut Criterion) {
    let sys = systems::max_bisection(8).unwrap();
    let mut g = c.benchmark_group("moment_matrix bisection(8) d=3");
    g.sample_size(10);
    g.bench_function("parallel", |b| {
        b.iter(|| moment_matrix(&sys, 3).unwrap())
    });
    g.bench_function("sequential", |b| {
        b.iter(|| moment_matrix_seq(&sys, 3).unwrap())
    });
    g.finish();
}

fn bench_enumeration(c: &mut Criterion) {
    let sys = systems::balanced_separator(16).unwrap();
    let mut g = c.benchmark_group("enumerate_solutions separator(16)");
    g.sample_size(10);
    g.bench_function("parallel", |b| {
        b.iter(|| sys.enumerate_solutions().unwrap())
    });
    g.bench_function("sequential", |b| {
        b.iter(|| sys.enumerate_solutions_seq().unwrap())
    });
    g.finish();
}

fn bench_verify(c: &mut Criterion) {
    let (sys, cert) = boolean_chain_certificate(3, 3, &rat(1, 4)).unwrap();
    let mut g = c.benchmark_group("verify boolean_chain(3, 3)");
    g.sample_size(10);
    g.bench_function("parallel", |b| b.iter(|| cert.verify(&sys).unwrap()));
    g.bench_function("sequential", |b| {
        b.iter(|| cert.verify_seq(&sys).unwrap())
    });
    g.finish();
}

fn bench_gram_expansion(c: &mut Criterion) {
    let (_, cert) = boolean_chain_certificate(3, 3, &rat(1, 4)).unwrap();
    let mut g = c.benchmark_group("gram_expansion boolean_chain(3, 3)");
    g.sample_size(10);
    g.bench_function("parallel", |b| {
        b.iter(|| gram_expansion(&cert.gram_basis, &cert.gram_c, cert.nvars))
    });
    g.bench_function("sequential", |b| {
        b.iter(|| gram_expansion_seq(&cert.gram_basis, &cert.gram_c, cert.nvars))
    });
    g.finish();
}

fn bench_charpoly(c: &mut Criterion) {
    // Scaled integer moment matrix of the bisection slice, 37 x 37.
    let sys = systems::max_bisection(8).unwrap();
    let mm = moment_matrix(&sys, 2).unwrap();
    let scaled = mm.mat.scale(&Rat::from(mm.scale.clone()));
    let mut g = c.benchmark_group("charpoly bisection(8) d=2 scaled");
    g.sample_size(10);
    g.bench_function("parallel", |b| b.iter(|| charpoly_int(&scaled).unwrap()));
    g.bench_function("sequential", |b| {
        b.iter(|| charpoly_int_seq(&scaled).unwrap())
    });
    g.finish();
}

criterion_group!(
    benches,
    bench_moment_assembly,
    bench_enumeration,
    bench_verify,
    bench_gram_expansion,
    bench_charpoly
);
criterion_main!(benches);
