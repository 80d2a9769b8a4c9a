use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use qtsvm::data::Example;
use qtsvm::eval::{cross_validate, Cl1Trainer, CvSpec, Selection};
use qtsvm::quadvec::lift_rows;
use qtsvm::solver::cl1::{fit_lifted, ReweightState, Side, Subproblem};
use qtsvm::solver::{fit, fit_lsq};
use qtsvm::{LiftingMode, LsqConfig, SolverConfig};
use qtsvm_bench::{example, lifted};

fn lifting(c: &mut Criterion) {
    let d = example(Example::One, 200);
    let mut g = c.benchmark_group("lift_rows");
    for mode in [LiftingMode::Full, LiftingMode::Reduced] {
        g.bench_function(mode.as_str(), |b| {
            b.iter(|| lift_rows(black_box(d.features()), mode).unwrap())
        });
    }
    g.finish();
}

fn reweighted_step(c: &mut Criterion) {
    let mut g = c.benchmark_group("reweighted_step");
    let cfg = SolverConfig::default();
    // few negatives against the 6 lifted coordinates puts SMW in play
    for m_other in [3, 5, 50, 400] {
        let (zp, _) = lifted(&example(Example::Three, 200), LiftingMode::Full);
        let (_, zm) = lifted(&example(Example::Three, m_other), LiftingMode::Full);
        let sp = Subproblem::new(&zp, &zm, Side::Positive);
        let state = ReweightState {
            own: nalgebra::DVector::from_element(zp.ncols(), 1.0),
            other: nalgebra::DVector::from_element(zm.ncols(), 1.0),
        };
        g.bench_with_input(BenchmarkId::new("direct", m_other), &m_other, |b, _| {
            b.iter(|| sp.solve_direct(black_box(&state), &cfg).unwrap())
        });
        g.bench_with_input(BenchmarkId::new("smw", m_other), &m_other, |b, _| {
            b.iter(|| sp.solve_smw(black_box(&state), &cfg).unwrap())
        });
    }
    g.finish();
}

fn training(c: &mut Criterion) {
    let mut g = c.benchmark_group("fit");
    for m in [50, 200, 800] {
        let d = example(Example::Three, m);
        g.bench_with_input(BenchmarkId::new("cl1qtsvm", m), &d, |b, d| {
            b.iter(|| fit(d, &SolverConfig::default(), LiftingMode::Full).unwrap())
        });
        g.bench_with_input(BenchmarkId::new("lsqtsvm", m), &d, |b, d| {
            b.iter(|| fit_lsq(d, &LsqConfig::with_c(1e-3), LiftingMode::Full).unwrap())
        });
    }
    let (zp, zm) = lifted(&example(Example::Three, 200), LiftingMode::Full);
    g.bench_function("cl1qtsvm_lifted/200", |b| {
        b.iter(|| fit_lifted(&zp, &zm, &SolverConfig::default()).unwrap())
    });
    g.finish();
}

fn grid_search(c: &mut Criterion) {
    let d = example(Example::One, 50);
    let spec = CvSpec {
        folds: 3,
        repeats: 1,
        grid: vec![1e-3, 1.0, 1e3],
        selection: Selection::Flat,
        ..CvSpec::default()
    };
    let trainer = Cl1Trainer::default();
    let mut g = c.benchmark_group("cross_validate");
    g.sample_size(10);
    g.bench_function("cl1qtsvm_3fold_3x3", |b| {
        b.iter(|| cross_validate(&d, &trainer, &spec).unwrap())
    });
    g.finish();
}

criterion_group!(benches, lifting, reweighted_step, training, grid_search);
criterion_main!(benches);
