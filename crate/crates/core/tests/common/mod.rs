//! Oracles and fixtures shared by the integration tests.
#![allow(dead_code)]

use nalgebra::DMatrix;
use ngmres_flow::grid::VelocityField;
use ngmres_flow::MacGrid;
use rand::Rng;

/// Dense Gaussian elimination with complete pivoting. Returns `None` when a
/// pivot falls below `tiny` relative to the largest entry.
#[allow(clippy::needless_range_loop)]
pub fn dense_solve_full_pivot(a: &[Vec<f64>], b: &[f64], tiny: f64) -> Option<Vec<f64>> {
    let n = b.len();
    let mut a: Vec<Vec<f64>> = a.to_vec();
    let mut b = b.to_vec();
    let mut cols: Vec<usize> = (0..n).collect();
    let scale = a.iter().flatten().fold(0.0f64, |m, x| m.max(x.abs())).max(f64::MIN_POSITIVE);
    for k in 0..n {
        let (mut pr, mut pc, mut best) = (k, k, -1.0);
        for (i, row) in a.iter().enumerate().skip(k) {
            for (j, x) in row.iter().enumerate().skip(k) {
                if x.abs() > best {
                    best = x.abs();
                    pr = i;
                    pc = j;
                }
            }
        }
        if best <= tiny * scale {
            return None;
        }
        a.swap(k, pr);
        b.swap(k, pr);
        for row in a.iter_mut() {
            row.swap(k, pc);
        }
        cols.swap(k, pc);
        for i in k + 1..n {
            let l = a[i][k] / a[k][k];
            if l != 0.0 {
                for j in k..n {
                    a[i][j] -= l * a[k][j];
                }
                b[i] -= l * b[k];
            }
        }
    }
    let mut y = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|j| a[i][j] * y[j]).sum();
        y[i] = (b[i] - s) / a[i][i];
    }
    let mut x = vec![0.0; n];
    for (k, &c) in cols.iter().enumerate() {
        x[c] = y[k];
    }
    Some(x)
}

pub fn quad_form(g: &DMatrix<f64>, a: &[f64]) -> f64 {
    let n = a.len();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            s += a[i] * g[(i, j)] * a[j];
        }
    }
    s
}

/// `BᵀB` with `B` of random height, so rank deficiency happens regularly.
pub fn random_psd(n: usize, rng: &mut impl Rng) -> DMatrix<f64> {
    let rows = rng.gen_range(1..=n + 2);
    let scale = 10f64.powf(rng.gen_range(-4.0..2.0));
    let b = DMatrix::from_fn(rows, n, |_, _| scale * rng.gen_range(-1.0..1.0));
    b.transpose() * b
}

/// Smallest `sqrt(αᵀGα)` with `Σα = 1` found by a dense KKT solve, the
/// vertices, and `probes` random feasible points.
pub fn brute_force_min(g: &DMatrix<f64>, probes: usize, rng: &mut impl Rng) -> f64 {
    let n = g.nrows();
    let mut best = f64::INFINITY;
    let consider = |a: &[f64], best: &mut f64| {
        let v = quad_form(g, a).max(0.0).sqrt();
        if v.is_finite() && v < *best {
            *best = v;
        }
    };
    let mut kkt = vec![vec![0.0; n + 1]; n + 1];
    for i in 0..n {
        for j in 0..n {
            kkt[i][j] = g[(i, j)];
        }
        kkt[i][n] = 1.0;
        kkt[n][i] = 1.0;
    }
    let mut rhs = vec![0.0; n + 1];
    rhs[n] = 1.0;
    if let Some(x) = dense_solve_full_pivot(&kkt, &rhs, 1e-14) {
        consider(&x[..n], &mut best);
    }
    for i in 0..n {
        let mut e = vec![0.0; n];
        e[i] = 1.0;
        consider(&e, &mut best);
    }
    for _ in 0..probes {
        let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let s: f64 = x.iter().sum();
        if s.abs() < 1e-3 {
            continue;
        }
        let a: Vec<f64> = x.iter().map(|v| v / s).collect();
        consider(&a, &mut best);
    }
    best
}

/// Random interior faces with homogeneous boundary data.
pub fn random_homogeneous(g: &MacGrid, rng: &mut impl Rng) -> VelocityField {
    let w = VelocityField::zeros(g);
    let vals: Vec<f64> = (0..g.velocity_unknowns()).map(|_| rng.gen_range(-1.0..1.0)).collect();
    g.scatter(&vals, &w).unwrap()
}

/// Random interior faces and tangential wall values; normal wall velocity zero.
pub fn random_advecting(g: &MacGrid, rng: &mut impl Rng) -> VelocityField {
    let mut a = random_homogeneous(g, rng);
    for w in [&mut a.top_u, &mut a.bottom_u, &mut a.left_v, &mut a.right_v] {
        w.iter_mut().for_each(|x| *x = rng.gen_range(-1.0..1.0));
    }
    a
}

/// Location of the stream function minimum, `ψ = ∫₀^y u dy` at grid vertices.
pub fn primary_vortex_center(g: &MacGrid, u: &VelocityField) -> (f64, f64) {
    let n = g.n();
    let h = g.h();
    let mut best = (f64::INFINITY, 0.0, 0.0);
    for i in 0..=n {
        let mut psi = 0.0;
        for j in 0..n {
            psi += h * u.u[g.u_at(i, j)];
            if psi < best.0 {
                best = (psi, i as f64 * h, (j + 1) as f64 * h);
            }
        }
    }
    (best.1, best.2)
}
