use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use vmadmm::{solve, SolverConfig, Variant};
use vmadmm_bench::instance;

fn variants(c: &mut Criterion) {
    let prob = instance(200, 100, 10.0, 0);
    let mut g = c.benchmark_group("solve_desk");
    g.sample_size(10);
    for v in Variant::ALL {
        let cfg = match v {
            Variant::LbfgsR => SolverConfig::new(v, 10.0).with_k_bar(50),
            Variant::BfgsR => SolverConfig::new(v, 10.0).with_damping(1e-5, 0.99),
            _ => SolverConfig::new(v, 10.0),
        };
        g.bench_with_input(BenchmarkId::from_parameter(v.key()), &cfg, |b, cfg| {
            b.iter(|| solve(&prob, cfg).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, variants);
criterion_main!(benches);
