use std::hint::black_box;

use c2rf_bench::planted;
use c2rf_core::bnb::{branching_priorities, solve_milp, SolverConfig};
use c2rf_core::milp::{solve_lp, write_mps};
use c2rf_core::model::{build_milp, ModelSpec};
use c2rf_core::presolve::presolve;
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

fn model_building(c: &mut Criterion) {
    let mut g = c.benchmark_group("build");
    for m in [100, 500, 2000] {
        let (r, spec) = planted(20, m, 1);
        g.bench_with_input(BenchmarkId::new("milp", m), &m, |b, _| {
            b.iter(|| build_milp(black_box(&r), &spec).unwrap())
        });
        g.bench_with_input(BenchmarkId::new("presolve", m), &m, |b, _| {
            b.iter(|| presolve(black_box(&r), &spec).unwrap())
        });
        let model = build_milp(&r, &spec).unwrap();
        g.bench_with_input(BenchmarkId::new("mps", m), &m, |b, _| {
            b.iter(|| write_mps(black_box(&model)).unwrap())
        });
    }
    g.finish();
}

fn lp_relaxation(c: &mut Criterion) {
    let mut g = c.benchmark_group("lp");
    for m in [50, 200] {
        let (r, spec) = planted(20, m, 2);
        let model = build_milp(&r, &spec).unwrap();
        g.bench_with_input(BenchmarkId::new("root", m), &m, |b, _| {
            b.iter(|| solve_lp(black_box(&model), &[]))
        });
    }
    g.finish();
}

fn branch_and_bound(c: &mut Criterion) {
    let mut g = c.benchmark_group("bnb");
    g.sample_size(10);
    for m in [30, 60] {
        let (r, spec) = planted(10, m, 3);
        let p = presolve(&r, &spec).unwrap();
        let reduced = build_milp(&p.reduced, &ModelSpec::new(spec.ell, spec.u, p.lambda)).unwrap();
        let cfg = SolverConfig {
            priorities: Some(branching_priorities(&p.reduced)),
            time_limit_secs: Some(60.0),
            ..SolverConfig::default()
        };
        g.bench_with_input(BenchmarkId::new("p-c2rf", m), &m, |b, _| {
            b.iter(|| solve_milp(black_box(&reduced), &cfg).unwrap())
        });
        let full = build_milp(&r, &spec).unwrap();
        let plain = SolverConfig {
            time_limit_secs: Some(60.0),
            ..SolverConfig::default()
        };
        g.bench_with_input(BenchmarkId::new("c2rf", m), &m, |b, _| {
            b.iter(|| solve_milp(black_box(&full), &plain).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, model_building, lp_relaxation, branch_and_bound);
criterion_main!(benches);
