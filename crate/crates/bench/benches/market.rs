use criterion::{black_box, criterion_group, criterion_main, Criterion};
use relaymatch::{
    dac_fixed, g_dac, g_rdac, generate_topology, inverse_utf, solve_utf, MechanismConfig,
    PreferenceLists, SolverConfig, TopologyConfig,
};

fn utf(c: &mut Criterion) {
    let inst = generate_topology(&TopologyConfig::default(), 1, 1, 3).unwrap();
    let cfg = SolverConfig::default();
    c.bench_function("solve_utf", |b| {
        b.iter(|| solve_utf(&inst, 0, 0, black_box(0.01), &cfg).unwrap())
    });
    c.bench_function("inverse_utf", |b| {
        b.iter(|| inverse_utf(&inst, 0, 0, black_box(0.0), &cfg))
    });
}

fn mechanisms(c: &mut Criterion) {
    let inst = generate_topology(&TopologyConfig::default(), 4, 4, 5).unwrap();
    let cfg = MechanismConfig::default();
    let mut group = c.benchmark_group("mechanisms_4x4");
    group.sample_size(20);
    group.bench_function("g_dac", |b| b.iter(|| g_dac(&inst, 0.01, &cfg).unwrap()));
    group.bench_function("g_rdac", |b| b.iter(|| g_rdac(&inst, 0.01, &cfg).unwrap()));
    group.finish();
}

fn fixed_lists(c: &mut Criterion) {
    let n = 50;
    let rot = |k: usize| {
        (0..n)
            .map(|i| (0..n).map(|j| (i + j * k) % n).collect())
            .collect()
    };
    let prefs = PreferenceLists::new(rot(1), rot(7)).unwrap();
    c.bench_function("dac_fixed_50", |b| b.iter(|| dac_fixed(black_box(&prefs))));
}

criterion_group!(benches, utf, mechanisms, fixed_lists);
criterion_main!(benches);
