use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use ngmres_flow::accel::solve_constrained_ls;
use ngmres_flow::flow::{nonlinear_residual, picard_solve, riesz_representer};
use ngmres_flow::sparse::lu_factor;
use ngmres_flow_bench::{cavity_state, oseen_matrix};

fn lu(c: &mut Criterion) {
    let mut group = c.benchmark_group("oseen_lu_factor");
    group.sample_size(10);
    for n in [32, 64] {
        let a = oseen_matrix(n, 1000.0);
        group.bench_with_input(BenchmarkId::from_parameter(n), &a, |b, a| b.iter(|| lu_factor(black_box(a)).unwrap()));
    }
    group.finish();
}

fn picard(c: &mut Criterion) {
    let mut group = c.benchmark_group("picard_solve");
    group.sample_size(10);
    for n in [32, 64] {
        let (prob, u1) = cavity_state(n, 1000.0);
        group.bench_with_input(BenchmarkId::from_parameter(n), &u1, |b, u| {
            b.iter(|| picard_solve(&prob, black_box(u)).unwrap())
        });
    }
    group.finish();
}

fn riesz(c: &mut Criterion) {
    let (prob, u1) = cavity_state(64, 1000.0);
    let r = nonlinear_residual(&prob, &u1).unwrap();
    // first call factorizes; the benchmark measures the repeated solve
    riesz_representer(&prob, &r).unwrap();
    c.bench_function("riesz_solve/64", |b| b.iter(|| riesz_representer(&prob, black_box(&r)).unwrap()));
}

fn least_squares(c: &mut Criterion) {
    let n = 7;
    let g = hilbert_gram(n);
    c.bench_function("constrained_ls/7", |b| b.iter(|| solve_constrained_ls(black_box(&g))));
}

/// Hilbert-like PSD Gram matrix, the shape the driver produces late in a run.
fn hilbert_gram(n: usize) -> ngmres_flow::accel::GramMatrix {
    ngmres_flow::accel::GramMatrix::from_fn(n, n, |i, j| 1.0 / (1 + i + j) as f64 + if i == j { 1e-3 } else { 0.0 })
}

criterion_group!(benches, lu, picard, riesz, least_squares);
criterion_main!(benches);
