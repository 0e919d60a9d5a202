//! Shared fixtures for the benchmarks.

use ngmres_flow::flow::{assembly, picard_solve, FlowProblem};
use ngmres_flow::{SparseMatrix, VelocityField};

/// Cavity problem at `re` and a nontrivial advecting field: the first Picard
/// iterate from the zero interior guess.
pub fn cavity_state(n: usize, re: f64) -> (FlowProblem, VelocityField) {
    let prob = FlowProblem::cavity(n, re).expect("valid cavity size");
    let u1 = picard_solve(&prob, &prob.initial_guess()).expect("Oseen solve").u_new;
    (prob, u1)
}

/// Coupled Oseen matrix linearized at the first Picard iterate.
pub fn oseen_matrix(n: usize, re: f64) -> SparseMatrix {
    let (prob, u1) = cavity_state(n, re);
    assembly::oseen_system(prob.grid(), prob.nu(), &u1)
}
