//! Data-parallel kernels on the default rayon pool versus a one-thread pool.
//! Built with `--no-default-features`, both variants take the sequential path.

use std::f64::consts::PI;
use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use dualgap::solver::{assemble_primal_gradient, SolveOptions};
use dualgap::uncertainty::report;
use dualgap::verification::{convergence_study, manufacture, StudyMode, StudyPlan, StudySource};
use dualgap::{gap_breakdown, Degree, Mesh1D, ProblemData, ScalarFn, UncertaintySpec};
use rayon::ThreadPoolBuilder;

fn case() -> dualgap::verification::ManufacturedCase {
    manufacture(
        ScalarFn::new(|x| (2.0 * PI * x).sin()),
        ScalarFn::new(|x| 2.0 * PI * (2.0 * PI * x).cos()),
        ScalarFn::new(|x| -4.0 * PI * PI * (2.0 * PI * x).sin()),
        ScalarFn::new(|x| 1.0 + x),
        1.2,
        0.0,
        1.0,
    )
    .unwrap()
}

fn pools() -> Vec<(String, rayon::ThreadPool)> {
    let n = std::thread::available_parallelism().map_or(1, |n| n.get());
    let mut out = vec![(
        "threads-1".to_string(),
        ThreadPoolBuilder::new().num_threads(1).build().unwrap(),
    )];
    if n > 1 {
        out.push((
            format!("threads-{n}"),
            ThreadPoolBuilder::new().num_threads(n).build().unwrap(),
        ));
    }
    out
}

fn kernels(c: &mut Criterion) {
    let case = case();
    let data: &ProblemData = &case.data;
    let mesh = Mesh1D::uniform(0.0, 1.0, 4096).unwrap().into_shared();
    let (v, y) = case.interpolated_pair(mesh, Degree::P2).unwrap();
    let spec = UncertaintySpec::new(0.01).unwrap();
    let pools = pools();

    let mut group = c.benchmark_group("gap_breakdown_p2_4096");
    for (name, pool) in &pools {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| pool.install(|| black_box(gap_breakdown(&v, &y, data).unwrap())))
        });
    }
    group.finish();

    let mut group = c.benchmark_group("primal_gradient_p2_4096");
    for (name, pool) in &pools {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| pool.install(|| black_box(assemble_primal_gradient(&v, data).unwrap())))
        });
    }
    group.finish();

    let mut group = c.benchmark_group("indeterminacy_report_p2_4096");
    for (name, pool) in &pools {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| pool.install(|| black_box(report(&v, &y, data, &spec).unwrap())))
        });
    }
    group.finish();

    let source = StudySource::Manufactured(case.clone());
    let plan = StudyPlan {
        degrees: vec![Degree::P1, Degree::P2],
        element_counts: vec![64, 128, 256, 512, 1024],
        epsilons: vec![0.005, 0.01, 0.05],
        mode: StudyMode::Interpolate,
        solve_options: SolveOptions::default(),
    };
    let mut group = c.benchmark_group("interpolate_study");
    group.sample_size(20);
    for (name, pool) in &pools {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| pool.install(|| black_box(convergence_study(&source, &plan).unwrap())))
        });
    }
    group.finish();
}

criterion_group!(benches, kernels);
criterion_main!(benches);
