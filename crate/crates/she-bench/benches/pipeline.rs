//! Benchmarks for the simulation pipeline: noise generation, stepping,
//! full trajectories, the mollified-drift ladder, exponential weights, and
//! the regularity estimator.

use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

use she_bench::{bump, desk_lattice};
use she_core::coefficients::{LadderConfig, MollifierLadder};
use she_core::{
    build_lattice, from_label, holder_exponent_estimate, log_weight, sample_noise, simulate, Axis,
    Boundary, Field, SolverConfig, ZField,
};

fn bench_noise(c: &mut Criterion) {
    let lat = desk_lattice();
    c.bench_function("noise/sheet_desk", |b| {
        b.iter(|| sample_noise(black_box(&lat), black_box(7)))
    });
}

fn bench_solver(c: &mut Criterion) {
    let lat = desk_lattice();
    let u0 = bump(lat.clone());
    let sigma = from_label("linear:1").unwrap();
    let drift = from_label("const:1").unwrap();
    let noise = sample_noise(&lat, 7);
    let cfg = SolverConfig::new(lat.clone());

    c.bench_function("solver/em_step", |b| {
        let row = noise.row(0);
        b.iter(|| she_core::em_step(black_box(&u0), black_box(row), &sigma, &drift, 0.0).unwrap())
    });

    c.bench_function("solver/simulate_desk", |b| {
        b.iter(|| simulate(&cfg, black_box(&u0), &sigma, &drift, &noise).unwrap())
    });
}

fn bench_ladder(c: &mut Criterion) {
    let base = from_label("power_drift:0.95").unwrap();
    let config = LadderConfig { k_max: 16, table_spacing: 1e-3 };

    c.bench_function("ladder/build_and_combine", |b| {
        b.iter(|| {
            let ladder = MollifierLadder::new(base.clone(), config.clone()).unwrap();
            ladder.cached_coefficient(black_box(4), black_box(16)).unwrap()
        })
    });

    let ladder = MollifierLadder::new(base, config).unwrap();
    let coeff = ladder.cached_coefficient(4, 16).unwrap();
    c.bench_function("ladder/eval_sweep", |b| {
        b.iter(|| {
            let mut acc = 0.0;
            let mut u = -6.0;
            while u <= 6.0 {
                acc += coeff.eval(0.0, 0.0, black_box(u));
                u += 0.01;
            }
            acc
        })
    });
}

fn bench_girsanov(c: &mut Criterion) {
    let lat = desk_lattice();
    let noise = sample_noise(&lat, 7);
    let z = ZField::constant(lat, 0.5).unwrap();
    c.bench_function("girsanov/log_weight_desk", |b| {
        b.iter(|| log_weight(black_box(&z), black_box(&noise)).unwrap())
    });
}

fn bench_holder(c: &mut Criterion) {
    // A long, narrow run so the time-lag ladder has room to span 1.5 decades.
    let lat = build_lattice(2.0, 0.1, 0.004, 2.0, Boundary::DirichletZero).unwrap();
    let u0 = Field::constant(lat.clone(), 0.0).unwrap();
    let sigma = from_label("const:1").unwrap();
    let drift = from_label("zero").unwrap();
    let noise = sample_noise(&lat, 7);
    let traj = simulate(&SolverConfig::new(lat), &u0, &sigma, &drift, &noise).unwrap();

    c.bench_function("holder/time_axis", |b| {
        b.iter(|| holder_exponent_estimate(black_box(&traj), Axis::Time).unwrap())
    });
}

criterion_group!(benches, bench_noise, bench_solver, bench_ladder, bench_girsanov, bench_holder);
criterion_main!(benches);
