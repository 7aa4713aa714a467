use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use narygw::joint::{default_j_max, joint_run};
use narygw::mc::{mc_estimate, McConfig};
use narygw::{Execution, LawSpec, OffspringLaw};

fn executions() -> [(&'static str, Execution); 2] {
    [("sequential", Execution::Sequential), ("parallel", Execution::Parallel { workers: 0 })]
}

fn monte_carlo(c: &mut Criterion) {
    let law = OffspringLaw::new(LawSpec::geometric_with_mean(13.0)).unwrap();
    let mut group = c.benchmark_group("mc_estimate");
    group.sample_size(10);
    for (name, exec) in executions() {
        let mut cfg = McConfig::new(2, 6, 20_000, 1);
        cfg.execution = exec;
        group.bench_with_input(BenchmarkId::new(name, "geometric m=13 N=2 n=6"), &cfg, |b, cfg| {
            b.iter(|| mc_estimate(&law, cfg).unwrap())
        });
    }
    group.finish();
}

fn joint(c: &mut Criterion) {
    let law = OffspringLaw::new(LawSpec::Poisson { m: 2.0 }).unwrap();
    let mut group = c.benchmark_group("joint_run");
    group.sample_size(10);
    for degree in [64, 256] {
        for (name, exec) in executions() {
            group.bench_with_input(BenchmarkId::new(name, degree), &degree, |b, &t| {
                b.iter(|| joint_run(&law, 2, 4, t, default_j_max(t, 2), exec).unwrap())
            });
        }
    }
    group.finish();
}

criterion_group!(benches, monte_carlo, joint);
criterion_main!(benches);
