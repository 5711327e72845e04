//! Sequential against rayon execution for the two batch workloads: the
//! all-pairs embeddedness test on one fine curve and a batch of short
//! independent flow runs.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use lagflow_core::exec::{self, Mode};
use lagflow_core::predicates::is_embedded;
use lagflow_core::{flow, DiscreteCurve, FlowConfig, Vec2};

const MODES: [(&str, Mode); 2] = [("sequential", Mode::Sequential), ("parallel", Mode::Parallel)];

fn wobbly(nodes: usize, phase: f64) -> DiscreteCurve {
    DiscreteCurve::from_fn(nodes, 2, |p| Vec2::from_polar(1.0 + 0.2 * (5.0 * p + phase).cos(), p)).unwrap()
}

fn embeddedness(c: &mut Criterion) {
    let mut group = c.benchmark_group("embedded_all_pairs");
    for nodes in [256usize, 1024] {
        let curve = wobbly(nodes, 0.0);
        for (name, mode) in MODES {
            group.bench_with_input(BenchmarkId::new(name, nodes), &curve, |b, curve| {
                b.iter(|| is_embedded(mode, black_box(curve.points())))
            });
        }
    }
    group.finish();
}

fn batch_runs(c: &mut Criterion) {
    let seeds: Vec<DiscreteCurve> = (0..8).map(|i| wobbly(64, i as f64)).collect();
    let config = FlowConfig { t_max: Some(0.02), ..FlowConfig::with_n(2) };
    let mut group = c.benchmark_group("flow_batch");
    group.sample_size(10);
    for (name, mode) in MODES {
        group.bench_function(name, |b| {
            b.iter(|| exec::map(mode, &seeds, |s| flow::run(s, &config).map(|o| o.final_state.t).unwrap_or(f64::NAN)))
        });
    }
    group.finish();
}

criterion_group!(benches, embeddedness, batch_runs);
criterion_main!(benches);
