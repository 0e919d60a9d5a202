//! Discrete operators against smooth fields and structural identities.

mod common;

use std::f64::consts::PI;

use ngmres_flow::grid::{convect, discrete_inner_product_h1, divergence, vector_laplacian, VelocityField};
use ngmres_flow::sparse::dot;
use ngmres_flow::MacGrid;
use proptest::prelude::{any, proptest, prop_assert, ProptestConfig};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn smooth(g: &MacGrid) -> VelocityField {
    VelocityField::sample(
        g,
        |x, y| (PI * x).sin() * (2.0 * PI * y).sin(),
        |x, y| (2.0 * PI * x).cos() * (PI * y).sin(),
    )
}

/// Max Laplacian error on faces at least two cells away from every wall.
fn laplacian_error(n: usize) -> f64 {
    let g = MacGrid::new(n).unwrap();
    let h = g.h();
    let lap = vector_laplacian(&g, &smooth(&g)).unwrap();
    let mut err: f64 = 0.0;
    for j in 2..n - 2 {
        for i in 2..=n - 2 {
            let (x, y) = (i as f64 * h, (j as f64 + 0.5) * h);
            let exact = -5.0 * PI * PI * (PI * x).sin() * (2.0 * PI * y).sin();
            err = err.max((lap.u[g.u_at(i, j)] - exact).abs());
        }
    }
    for j in 2..=n - 2 {
        for i in 2..n - 2 {
            let (x, y) = ((i as f64 + 0.5) * h, j as f64 * h);
            let exact = -5.0 * PI * PI * (2.0 * PI * x).cos() * (PI * y).sin();
            err = err.max((lap.v[g.v_at(i, j)] - exact).abs());
        }
    }
    err
}

fn divergence_error(n: usize) -> f64 {
    let g = MacGrid::new(n).unwrap();
    let h = g.h();
    let div = divergence(&g, &smooth(&g)).unwrap();
    let mut err: f64 = 0.0;
    for j in 0..n {
        for i in 0..n {
            let (x, y) = ((i as f64 + 0.5) * h, (j as f64 + 0.5) * h);
            let exact = PI * (PI * x).cos() * (2.0 * PI * y).sin() + PI * (2.0 * PI * x).cos() * (PI * y).cos();
            err = err.max((div.p[g.cell_at(i, j)] - exact).abs());
        }
    }
    err
}

#[test]
fn laplacian_is_second_order_in_the_interior() {
    let (e1, e2) = (laplacian_error(16), laplacian_error(32));
    assert!(e1 / e2 > 3.5, "error ratio {}", e1 / e2);
    assert!(e2 < 1e-2 * 5.0 * PI * PI, "{e2}");
}

#[test]
fn divergence_is_second_order() {
    let (e1, e2) = (divergence_error(16), divergence_error(32));
    assert!(e1 / e2 > 3.5, "error ratio {}", e1 / e2);
}

#[test]
fn h1_seminorm_converges_to_the_continuous_value() {
    // w = (s, s) with s = sin(πx) sin(πy) has |∇w|² = π²
    let err = |n: usize| {
        let g = MacGrid::new(n).unwrap();
        let s = |x: f64, y: f64| (PI * x).sin() * (PI * y).sin();
        let w = VelocityField::sample(&g, s, s);
        (discrete_inner_product_h1(&g, &w, &w).unwrap() - PI * PI).abs()
    };
    let (e1, e2, e3) = (err(16), err(32), err(64));
    assert!(e2 < e1 && e3 < e2, "{e1} {e2} {e3}");
    assert!(e3 < 1e-2 * PI * PI, "{e3}");
}

#[test]
fn h1_inner_product_matches_laplacian_pairing() {
    let g = MacGrid::new(12).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let a = common::random_homogeneous(&g, &mut rng);
    let b = common::random_homogeneous(&g, &mut rng);
    let lap = g.gather(&vector_laplacian(&g, &a).unwrap());
    let pairing = -g.h() * g.h() * dot(&lap, &g.gather(&b));
    let ip = discrete_inner_product_h1(&g, &a, &b).unwrap();
    assert!((ip - pairing).abs() <= 1e-12 * ip.abs().max(1.0), "{ip} vs {pairing}");
    assert!((ip - discrete_inner_product_h1(&g, &b, &a).unwrap()).abs() <= 1e-12 * ip.abs().max(1.0));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn convection_is_skew_symmetric(seed in any::<u64>(), n in 4usize..20) {
        let g = MacGrid::new(n).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = common::random_advecting(&g, &mut rng);
        let w = common::random_homogeneous(&g, &mut rng);
        let cw = g.gather(&convect(&g, &a, &w).unwrap());
        let wv = g.gather(&w);
        let form = dot(&cw, &wv);
        prop_assert!(form.abs() <= 1e-12 * dot(&wv, &wv), "<C(a)w, w> = {form}");
    }

    #[test]
    fn h1_seminorm_is_nonnegative(seed in any::<u64>(), n in 4usize..16) {
        let g = MacGrid::new(n).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let w = common::random_advecting(&g, &mut rng);
        prop_assert!(discrete_inner_product_h1(&g, &w, &w).unwrap() >= 0.0);
    }
}
