//! The Navier-Stokes fixed-point layer: Picard (Oseen) solves, the nonlinear
//! residual, its Riesz representer and the dual norm it realizes.
//!
//! Residuals are strong-form momentum defects at interior faces, stored as
//! their divergence-free part: only the action on divergence-free fields
//! matters, and the discarded gradient part would keep the plain `h`-weighted
//! Euclidean norm away from zero at the discrete solution. Residuals are
//! paired with velocity fields through `<r, w> = h² Σ r_f w_f`, so the
//! Riesz representer `χ` of a residual `r` is the discretely
//! divergence-free field with `(∇χ, ∇ψ) = <r, ψ>` for every discretely
//! divergence-free `ψ`, and `‖r‖_{V'} = ‖∇χ‖`.

pub mod assembly;

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::OnceLock;

use log::debug;

use crate::grid::{
    convect, discrete_inner_product_h1, divergence, vector_laplacian, BoundaryData, GridError, MacGrid,
    PressureField, VelocityField,
};
use crate::sparse::{self, LuFactors, SparseError};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FlowError {
    #[error("viscosity must be positive and finite, got {0}")]
    InvalidViscosity(f64),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error("{context}: {source}")]
    Solver {
        context: &'static str,
        #[source]
        source: SparseError,
    },
    #[error("residual vector has {found} entries, grid expects {expected}")]
    ResidualShape { expected: usize, found: usize },
}

/// Steady cavity problem `-ν Δu + u·∇u + ∇p = f`, `∇·u = 0`.
#[derive(Debug)]
pub struct FlowProblem {
    grid: MacGrid,
    nu: f64,
    bc: BoundaryData,
    force: Vec<f64>,
    stokes: OnceLock<LuFactors>,
    projection: OnceLock<LuFactors>,
    linear_solves: AtomicUsize,
    riesz_solves: AtomicUsize,
}

impl FlowProblem {
    /// Cavity problem with zero body force.
    pub fn new(grid: MacGrid, nu: f64, bc: BoundaryData) -> Result<Self, FlowError> {
        if !(nu > 0.0 && nu.is_finite()) {
            return Err(FlowError::InvalidViscosity(nu));
        }
        Ok(Self {
            grid,
            nu,
            bc,
            force: vec![0.0; grid.velocity_unknowns()],
            stokes: OnceLock::new(),
            projection: OnceLock::new(),
            linear_solves: AtomicUsize::new(0),
            riesz_solves: AtomicUsize::new(0),
        })
    }

    /// Lid-driven cavity at Reynolds number `re` (`ν = 1/re`, unit lid).
    pub fn cavity(n: usize, re: f64) -> Result<Self, FlowError> {
        Self::new(MacGrid::new(n)?, 1.0 / re, BoundaryData::default())
    }

    /// Replace the body force by the interior face values of `f`.
    pub fn with_force(mut self, f: &VelocityField) -> Result<Self, FlowError> {
        self.grid.check_velocity(f)?;
        self.force = self.grid.gather(f);
        Ok(self)
    }

    pub fn grid(&self) -> &MacGrid {
        &self.grid
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn bc(&self) -> &BoundaryData {
        &self.bc
    }

    /// Zero interior velocity with the boundary data imposed.
    pub fn initial_guess(&self) -> VelocityField {
        VelocityField::cavity(&self.grid, &self.bc)
    }

    /// Oseen solves performed so far.
    pub fn linear_solves(&self) -> usize {
        self.linear_solves.load(Ordering::Relaxed)
    }

    /// Riesz (Stokes-type) solves performed so far.
    pub fn riesz_solves(&self) -> usize {
        self.riesz_solves.load(Ordering::Relaxed)
    }

    /// The Stokes operator never changes, so it is factorized once and shared.
    fn stokes_factors(&self) -> Result<&LuFactors, FlowError> {
        if let Some(f) = self.stokes.get() {
            return Ok(f);
        }
        let a = assembly::stokes_system(&self.grid);
        let f = sparse::lu_factor(&a).map_err(|source| FlowError::Solver {
            context: "Stokes factorization",
            source,
        })?;
        Ok(self.stokes.get_or_init(|| f))
    }

    fn projection_factors(&self) -> Result<&LuFactors, FlowError> {
        if let Some(f) = self.projection.get() {
            return Ok(f);
        }
        let a = assembly::projection_system(&self.grid);
        let f = sparse::lu_factor(&a).map_err(|source| FlowError::Solver {
            context: "projection factorization",
            source,
        })?;
        Ok(self.projection.get_or_init(|| f))
    }

    /// Orthogonal projection of interior face values onto discretely
    /// divergence-free fields.
    pub fn project_divergence_free(&self, values: &[f64]) -> Result<Vec<f64>, FlowError> {
        let nv = self.grid.velocity_unknowns();
        if values.len() != nv {
            return Err(FlowError::ResidualShape {
                expected: nv,
                found: values.len(),
            });
        }
        let mut rhs = vec![0.0; nv + self.grid.cells()];
        rhs[..nv].copy_from_slice(values);
        let mut x = self.projection_factors()?.solve(&rhs).map_err(|source| FlowError::Solver {
            context: "projection solve",
            source,
        })?;
        x.truncate(nv);
        Ok(x)
    }

    /// Split a saddle point solution into a velocity (on `template`'s
    /// boundary data) and a mean-zero pressure.
    fn unpack(&self, x: &[f64], template: &VelocityField) -> (VelocityField, PressureField) {
        let nv = self.grid.velocity_unknowns();
        let w = self.grid.scatter(&x[..nv], template).expect("solution length matches grid");
        let mut p = PressureField { p: x[nv..].to_vec() };
        p.remove_mean();
        (w, p)
    }
}

/// Riesz representer `(χ, λ)` of a residual.
#[derive(Debug, Clone, PartialEq)]
pub struct Representer {
    pub chi: VelocityField,
    pub lambda: PressureField,
}

/// Nonlinear residual `g(u)` at interior faces, with a lazily computed representer.
#[derive(Debug, Clone, PartialEq)]
pub struct Residual {
    /// Divergence-free part of the momentum defect.
    pub momentum: Vec<f64>,
    pub representer: Option<Representer>,
    pub vprime_norm: Option<f64>,
    pub l2_norm: f64,
}

impl Residual {
    /// Wrap an already projected momentum vector; `l2_norm` is `h ‖momentum‖₂`.
    pub fn from_momentum(g: &MacGrid, momentum: Vec<f64>) -> Self {
        let l2_norm = g.h() * sparse::dot(&momentum, &momentum).sqrt();
        Self {
            momentum,
            representer: None,
            vprime_norm: None,
            l2_norm,
        }
    }

    /// Compute and cache the representer if absent; returns `‖g‖_{V'}`.
    pub fn ensure_representer(&mut self, prob: &FlowProblem) -> Result<f64, FlowError> {
        if self.representer.is_none() {
            let (rep, norm) = solve_representer(prob, &self.momentum)?;
            self.representer = Some(rep);
            self.vprime_norm = Some(norm);
        }
        Ok(self.vprime_norm.expect("set together with the representer"))
    }

    /// Linear combination of residuals. Representers combine too when all are present.
    pub fn combine(g: &MacGrid, coeffs: &[f64], parts: &[&Residual]) -> Residual {
        let mut momentum = vec![0.0; parts[0].momentum.len()];
        for (c, r) in coeffs.iter().zip(parts) {
            for (m, x) in momentum.iter_mut().zip(&r.momentum) {
                *m += c * x;
            }
        }
        let mut out = Residual::from_momentum(g, momentum);
        if parts.iter().all(|r| r.representer.is_some()) {
            let chis: Vec<&VelocityField> = parts.iter().map(|r| &r.representer.as_ref().unwrap().chi).collect();
            let chi = VelocityField::combine(coeffs, &chis);
            let mut lambda = PressureField::zeros(g);
            for (c, r) in coeffs.iter().zip(parts) {
                for (l, x) in lambda.p.iter_mut().zip(&r.representer.as_ref().unwrap().lambda.p) {
                    *l += c * x;
                }
            }
            let norm = discrete_inner_product_h1(g, &chi, &chi).expect("same grid").max(0.0).sqrt();
            out.representer = Some(Representer { chi, lambda });
            out.vprime_norm = Some(norm);
        }
        out
    }
}

/// Result of one Picard (Oseen) solve from `u_k`.
#[derive(Debug, Clone)]
pub struct PicardStep {
    /// `q(u_k)`
    pub u_new: VelocityField,
    pub p_new: PressureField,
    /// `q(u_k) - u_k`
    pub w: VelocityField,
    /// `‖∇w‖`
    pub w_h1: f64,
    /// `‖div q(u_k)‖∞`
    pub div_max: f64,
}

/// Momentum operator `-ν Δ_h w + C(a) w` applied to full fields (boundary data included).
fn momentum_operator(prob: &FlowProblem, a: &VelocityField, w: &VelocityField) -> Result<Vec<f64>, FlowError> {
    let g = &prob.grid;
    let lap = g.gather(&vector_laplacian(g, w)?);
    let conv = g.gather(&convect(g, a, w)?);
    Ok(lap.iter().zip(&conv).map(|(l, c)| -prob.nu * l + c).collect())
}

/// Solve the Oseen problem linearized at `u_k`: `q(u_k)`.
pub fn picard_solve(prob: &FlowProblem, u_k: &VelocityField) -> Result<PicardStep, FlowError> {
    let g = &prob.grid;
    g.check_velocity(u_k)?;
    let lift = prob.initial_guess();
    let a = assembly::oseen_system(g, prob.nu, u_k);
    let lifted = momentum_operator(prob, u_k, &lift)?;
    let lift_div = divergence(g, &lift)?;
    let nv = g.velocity_unknowns();
    let mut rhs = Vec::with_capacity(a.nrows());
    rhs.extend(prob.force.iter().zip(&lifted).map(|(f, l)| f - l));
    rhs.extend(lift_div.p.iter().copied());
    rhs[nv] = 0.0;

    let lu = sparse::lu_factor(&a).map_err(|source| FlowError::Solver {
        context: "Oseen factorization",
        source,
    })?;
    let x = lu.solve(&rhs).map_err(|source| FlowError::Solver {
        context: "Oseen solve",
        source,
    })?;
    prob.linear_solves.fetch_add(1, Ordering::Relaxed);
    let (u_new, p_new) = prob.unpack(&x, &lift);
    let w = u_new.sub(u_k);
    let w_h1 = discrete_inner_product_h1(g, &w, &w)?.max(0.0).sqrt();
    let div_max = divergence(g, &u_new)?.max_abs();
    Ok(PicardStep {
        u_new,
        p_new,
        w,
        w_h1,
        div_max,
    })
}

/// Raw momentum defect `-ν Δ_h u + C(u) u - f` at interior faces.
pub fn momentum_defect(prob: &FlowProblem, u: &VelocityField) -> Result<Vec<f64>, FlowError> {
    let mut m = momentum_operator(prob, u, u)?;
    for (x, f) in m.iter_mut().zip(&prob.force) {
        *x -= f;
    }
    Ok(m)
}

/// Nonlinear residual `g(u)`: the divergence-free part of the momentum defect.
pub fn nonlinear_residual(prob: &FlowProblem, u: &VelocityField) -> Result<Residual, FlowError> {
    let m = prob.project_divergence_free(&momentum_defect(prob, u)?)?;
    Ok(Residual::from_momentum(&prob.grid, m))
}

fn solve_representer(prob: &FlowProblem, momentum: &[f64]) -> Result<(Representer, f64), FlowError> {
    let g = &prob.grid;
    let nv = g.velocity_unknowns();
    if momentum.len() != nv {
        return Err(FlowError::ResidualShape {
            expected: nv,
            found: momentum.len(),
        });
    }
    let lu = prob.stokes_factors()?;
    let mut rhs = vec![0.0; nv + g.cells()];
    rhs[..nv].copy_from_slice(momentum);
    let x = lu.solve(&rhs).map_err(|source| FlowError::Solver {
        context: "Riesz solve",
        source,
    })?;
    prob.riesz_solves.fetch_add(1, Ordering::Relaxed);
    let (chi, lambda) = prob.unpack(&x, &VelocityField::zeros(g));
    let norm = discrete_inner_product_h1(g, &chi, &chi)?.max(0.0).sqrt();
    Ok((Representer { chi, lambda }, norm))
}

/// Fill in the Riesz representer and `‖g‖_{V'}` of `r`.
pub fn riesz_representer(prob: &FlowProblem, r: &Residual) -> Result<Residual, FlowError> {
    let mut out = r.clone();
    out.representer = None;
    out.ensure_representer(prob)?;
    Ok(out)
}

/// Runtime check of `ν ‖∇w_{k+1}‖ <= ‖g(u_k)‖_{V'}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepBoundCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

/// Relative slack allowed for rounding in the step bound check.
pub const STEP_BOUND_SLACK: f64 = 1e-10;

pub fn step_bound_check(prob: &FlowProblem, step: &PicardStep, r_k: &Residual) -> StepBoundCheck {
    let lhs = prob.nu * step.w_h1;
    let rhs = r_k.vprime_norm.unwrap_or(f64::NAN);
    let holds = lhs <= rhs * (1.0 + STEP_BOUND_SLACK);
    debug!("step bound: nu*|grad w| = {lhs:.6e}, |g|_V' = {rhs:.6e}, holds = {holds}");
    StepBoundCheck { lhs, rhs, holds }
}
