//! Oseen solves, residuals and Riesz representers.

mod common;

use ngmres_flow::flow::{nonlinear_residual, picard_solve, riesz_representer, step_bound_check};
use ngmres_flow::grid::{discrete_inner_product_h1, divergence, vector_laplacian};
use ngmres_flow::sparse::dot;
use ngmres_flow::{drive, DriveStatus, DriverConfig, FlowProblem, Mode, Residual};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_residual(prob: &FlowProblem, rng: &mut impl Rng) -> Residual {
    let g = prob.grid();
    let raw: Vec<f64> = (0..g.velocity_unknowns()).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let r = Residual::from_momentum(g, prob.project_divergence_free(&raw).unwrap());
    riesz_representer(prob, &r).unwrap()
}

#[test]
fn picard_converges_quickly_at_low_reynolds_number() {
    let prob = FlowProblem::cavity(16, 1.0).unwrap();
    let cfg = DriverConfig {
        mode: Mode::Picard,
        tol: 1e-10,
        ..DriverConfig::default()
    };
    let out = drive(&prob, &cfg).unwrap();
    assert_eq!(out.status, DriveStatus::Converged);
    assert!(out.records.len() - 1 <= 5, "{} iterations", out.records.len() - 1);
    assert!(out.solution.satisfies(prob.grid(), prob.bc()));
}

#[test]
fn oseen_solutions_are_divergence_free_and_keep_the_lid() {
    let prob = FlowProblem::cavity(24, 400.0).unwrap();
    let mut u = prob.initial_guess();
    for _ in 0..3 {
        let step = picard_solve(&prob, &u).unwrap();
        assert!(step.div_max <= 1e-10, "{}", step.div_max);
        assert!(divergence(prob.grid(), &step.u_new).unwrap().max_abs() <= 1e-10);
        assert!(step.u_new.satisfies(prob.grid(), prob.bc()));
        u = step.u_new;
    }
}

#[test]
fn representer_round_trips_through_the_laplacian() {
    let prob = FlowProblem::cavity(16, 100.0).unwrap();
    let g = prob.grid();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let r = random_residual(&prob, &mut rng);
    let chi = &r.representer.as_ref().unwrap().chi;
    assert!(divergence(g, chi).unwrap().max_abs() <= 1e-10);

    // -Δχ differs from r by a gradient, which the projection removes
    let lap = g.gather(&vector_laplacian(g, chi).unwrap());
    let neg: Vec<f64> = lap.iter().map(|x| -x).collect();
    let back = prob.project_divergence_free(&neg).unwrap();
    let scale = r.momentum.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let err = back.iter().zip(&r.momentum).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    assert!(err <= 1e-10 * scale, "{err}");

    let again = riesz_representer(&prob, &Residual::from_momentum(g, back)).unwrap();
    let diff = again.representer.unwrap().chi.sub(chi);
    assert!(diff.max_abs() <= 1e-10 * chi.max_abs());
}

#[test]
fn representer_realizes_the_dual_pairing() {
    let prob = FlowProblem::cavity(16, 100.0).unwrap();
    let g = prob.grid();
    let h2 = g.h() * g.h();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let r = random_residual(&prob, &mut rng);
    let s = random_residual(&prob, &mut rng);
    let chi = &r.representer.as_ref().unwrap().chi;
    let psi = &s.representer.as_ref().unwrap().chi;

    let norm2 = discrete_inner_product_h1(g, chi, chi).unwrap();
    let pairing = h2 * dot(&r.momentum, &g.gather(chi));
    assert!((pairing - norm2).abs() <= 1e-10 * norm2, "{pairing} vs {norm2}");
    assert!((r.vprime_norm.unwrap() - norm2.sqrt()).abs() <= 1e-12 * norm2.sqrt());

    let cross = discrete_inner_product_h1(g, chi, psi).unwrap();
    let cross_pairing = h2 * dot(&r.momentum, &g.gather(psi));
    assert!((cross - cross_pairing).abs() <= 1e-10 * norm2.sqrt() * s.vprime_norm.unwrap());
}

#[test]
fn combined_residual_matches_combined_representers() {
    let prob = FlowProblem::cavity(12, 100.0).unwrap();
    let g = prob.grid();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let a = random_residual(&prob, &mut rng);
    let b = random_residual(&prob, &mut rng);
    let c = Residual::combine(g, &[1.5, -0.5], &[&a, &b]);
    let fresh = riesz_representer(&prob, &c).unwrap();
    let diff = fresh.representer.unwrap().chi.sub(&c.representer.unwrap().chi);
    assert!(diff.max_abs() <= 1e-12 * c.vprime_norm.unwrap().max(1.0));
    assert!((fresh.vprime_norm.unwrap() - c.vprime_norm.unwrap()).abs() <= 1e-10 * c.vprime_norm.unwrap());
}

#[test]
fn step_is_bounded_by_the_residual() {
    let prob = FlowProblem::cavity(16, 500.0).unwrap();
    let mut u = prob.initial_guess();
    for _ in 0..4 {
        let r = riesz_representer(&prob, &nonlinear_residual(&prob, &u).unwrap()).unwrap();
        let step = picard_solve(&prob, &u).unwrap();
        let check = step_bound_check(&prob, &step, &r);
        assert!(check.holds, "{} > {}", check.lhs, check.rhs);
        u = step.u_new;
    }
}

#[test]
fn residual_vanishes_at_the_converged_solution() {
    let prob = FlowProblem::cavity(16, 10.0).unwrap();
    let cfg = DriverConfig {
        tol: 1e-11,
        ..DriverConfig::default()
    };
    let out = drive(&prob, &cfg).unwrap();
    assert_eq!(out.status, DriveStatus::Converged);
    let r = nonlinear_residual(&prob, &out.solution).unwrap();
    assert!(r.l2_norm < 1e-8, "{}", r.l2_norm);
}

#[test]
fn primary_vortex_sits_near_the_reference_location() {
    // reference center for Re = 100: (0.6172, 0.7344)
    let prob = FlowProblem::cavity(32, 100.0).unwrap();
    let out = drive(&prob, &DriverConfig::default()).unwrap();
    assert_eq!(out.status, DriveStatus::Converged);
    let (x, y) = common::primary_vortex_center(prob.grid(), &out.solution);
    assert!((x - 0.6172).abs() <= 0.05 && (y - 0.7344).abs() <= 0.05, "center ({x}, {y})");
}
