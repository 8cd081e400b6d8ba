use std::collections::BTreeSet;

use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};

use lsc_core::net::{net_hash, net_iso};
use lsc_core::netrewrite::normalize_net;
use lsc_core::readback::{read_back, read_back_all};
use lsc_core::rewrite::{church, normalize, Strategy};
use lsc_core::{parse, translate, Expression};

fn programs() -> Vec<(&'static str, Expression)> {
    let plus = parse("\\m. \\n. \\f. \\x. m f (n f x)").unwrap();
    let two_plus_two = Expression::app(Expression::app(plus, church(2)), church(2));
    vec![
        ("identity", parse("(\\x. x) y").unwrap()),
        ("shared", parse("(\\x. x x x)[y<-\\z. z] w").unwrap()),
        ("two-plus-two", two_plus_two.well_name()),
        ("church-8", church(8).well_name()),
    ]
}

fn translation(c: &mut Criterion) {
    let mut g = c.benchmark_group("translate");
    for (name, t) in programs() {
        g.bench_with_input(BenchmarkId::from_parameter(name), &t, |b, t| {
            b.iter(|| translate(black_box(t), &BTreeSet::new()).unwrap())
        });
    }
    g.finish();
}

fn isomorphism(c: &mut Criterion) {
    let mut g = c.benchmark_group("net_iso");
    for (name, t) in programs() {
        let p = translate(&t, &BTreeSet::new()).unwrap();
        let q = translate(&t.well_name(), &BTreeSet::new()).unwrap();
        g.bench_with_input(BenchmarkId::from_parameter(name), &(p, q), |b, (p, q)| {
            b.iter(|| net_iso(black_box(p), black_box(q)).unwrap())
        });
    }
    g.finish();
    c.bench_function("net_hash/church-8", |b| {
        let p = translate(&church(8).well_name(), &BTreeSet::new()).unwrap();
        b.iter(|| net_hash(black_box(&p)))
    });
}

fn reading_back(c: &mut Criterion) {
    let mut g = c.benchmark_group("read_back");
    for (name, t) in programs() {
        let p = translate(&t, &BTreeSet::new()).unwrap();
        g.bench_with_input(BenchmarkId::new("one", name), &p, |b, p| b.iter(|| read_back(black_box(p)).unwrap()));
    }
    let p = translate(&parse("(\\x. x x x)[y<-\\z. z] w").unwrap(), &BTreeSet::new()).unwrap();
    g.bench_function("all/shared", |b| b.iter(|| read_back_all(black_box(&p))));
    g.finish();
}

fn normalisation(c: &mut Criterion) {
    let mut g = c.benchmark_group("normalize");
    g.sample_size(20);
    for (name, t) in programs() {
        g.bench_with_input(BenchmarkId::new("term", name), &t, |b, t| {
            b.iter(|| normalize(black_box(t), Strategy::LeftmostOutermost, 10_000).unwrap())
        });
        let p = translate(&t, &BTreeSet::new()).unwrap();
        g.bench_with_input(BenchmarkId::new("net", name), &p, |b, p| {
            b.iter(|| normalize_net(black_box(p), Strategy::LeftmostOutermost, 10_000, |_, _, _| {}).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, translation, isomorphism, reading_back, normalisation);
criterion_main!(benches);
