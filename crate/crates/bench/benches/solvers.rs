use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use qwi_core::oracle::transfer_matrix_solve;
use qwi_core::{
    energy_sweep, find_bound_states, find_resonances, solve_scattering, IntegrationConfig, ModelParams,
    PiecewisePotential, Potential, PotentialSegment, SampledPotential, SearchOptions, Side,
};

const P: ModelParams = ModelParams { hbar: 1.0, mass: 1.0 };

fn stack() -> PiecewisePotential {
    let segments = (0..8)
        .map(|i| PotentialSegment::new(i as f64 * 0.5, (i + 1) as f64 * 0.5, if i % 2 == 0 { 1.5 } else { -0.5 }))
        .collect();
    PiecewisePotential::new(0.0, segments, 0.0).unwrap()
}

fn gaussian() -> Potential {
    SampledPotential::from_fn(0.0, 0.0, -3.0, 3.0, 241, |x| 1.5 * (-x * x).exp())
        .unwrap()
        .into()
}

fn scattering(c: &mut Criterion) {
    let pw = stack();
    let pot: Potential = pw.clone().into();
    let smooth = gaussian();
    let cfg = IntegrationConfig::default();
    let numeric = IntegrationConfig::numeric();
    c.bench_function("scatter/stack/analytic", |b| {
        b.iter(|| solve_scattering(&pot, black_box(1.3), Side::Left, &cfg, P))
    });
    c.bench_function("scatter/stack/numeric", |b| {
        b.iter(|| solve_scattering(&pot, black_box(1.3), Side::Left, &numeric, P))
    });
    c.bench_function("scatter/stack/transfer_matrix", |b| {
        b.iter(|| transfer_matrix_solve(&pw, black_box(1.3), P))
    });
    c.bench_function("scatter/gaussian", |b| {
        b.iter(|| solve_scattering(&smooth, black_box(0.9), Side::Left, &cfg, P))
    });
    let grid: Vec<f64> = (1..=400).map(|i| i as f64 * 0.01).collect();
    c.bench_function("sweep/stack/400", |b| {
        b.iter(|| energy_sweep(&pot, black_box(&grid), Side::Left, &cfg, P))
    });
}

fn spectra(c: &mut Criterion) {
    let well: Potential = PiecewisePotential::barrier(0.0, -5.0, 0.0, 2.0).unwrap().into();
    let barrier: Potential = PiecewisePotential::barrier(0.0, 1.0, 0.0, 2.0).unwrap().into();
    let harmonic: Potential = SampledPotential::from_fn(8.0, 8.0, -4.0, 4.0, 161, |x| 0.5 * x * x)
        .unwrap()
        .into();
    let cfg = IntegrationConfig::default();
    let opts = SearchOptions::default();
    let mut g = c.benchmark_group("spectra");
    g.sample_size(10);
    g.bench_function("bound/square_well", |b| b.iter(|| find_bound_states(&well, &cfg, P, &opts)));
    g.bench_function("bound/harmonic", |b| b.iter(|| find_bound_states(&harmonic, &cfg, P, &opts)));
    g.bench_function("resonances/barrier", |b| {
        b.iter(|| find_resonances(&barrier, (1.0, 13.0), Side::Left, &cfg, P, &opts))
    });
    g.finish();
}

criterion_group!(benches, scattering, spectra);
criterion_main!(benches);
