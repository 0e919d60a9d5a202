use std::time::Instant;

use log::{debug, info, warn};
use serde::{Deserialize, Serialize};

use super::ls::{beta_update, ngmres_update, solve_constrained_ls, solve_unconstrained_ls};
use super::{gram_matrix, AccelError, Depth, DepthSchedule, HistoryEntry, HistoryWindow, Mode, NormChoice};
use crate::flow::{nonlinear_residual, picard_solve, step_bound_check, FlowProblem, Residual, StepBoundCheck};
use crate::grid::{discrete_inner_product_h1, PressureField, VelocityField};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DriverConfig {
    pub mode: Mode,
    pub depth: DepthSchedule,
    pub norm: NormChoice,
    /// Stop once `‖g(u_k)‖_{V'} <= tol`, whatever the optimization norm.
    pub tol: f64,
    pub max_iters: usize,
    /// Use the coefficients `(1, 0, ...)` even in NGMRES mode.
    #[serde(default)]
    pub force_picard_coefficients: bool,
    /// Also solve the unconstrained form each step and record how far its
    /// iterate is from the constrained one.
    #[serde(default)]
    pub check_beta_equivalence: bool,
}

impl Default for DriverConfig {
    fn default() -> Self {
        Self {
            mode: Mode::Ngmres,
            depth: DepthSchedule::Fixed(Depth::Finite(1)),
            norm: NormChoice::VPrime,
            tol: 1e-8,
            max_iters: 100,
            force_picard_coefficients: false,
            check_beta_equivalence: false,
        }
    }
}

impl DriverConfig {
    pub fn validate(&self) -> Result<(), AccelError> {
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(AccelError::InvalidConfig(format!("tol must be positive, got {}", self.tol)));
        }
        Ok(())
    }
}

/// Diagnostics for iterate `u_k` and the step taken from it.
///
/// The last record of a run describes the final iterate only; its step
/// fields are NaN and `alpha` is empty.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    pub k: usize,
    pub g_vprime: f64,
    pub g_l2: f64,
    /// `‖∇(q(u_k) - u_k)‖`
    pub picard_resid_h1: f64,
    /// Optimized residual norm over `‖g(u_k)‖`, in the optimization norm.
    pub theta: f64,
    /// Optimized residual norm over `‖g(q(u_k))‖`, in the optimization norm.
    pub gamma: f64,
    /// `‖g(q(u_k))‖_{V'} / ‖g(u_k)‖_{V'}`
    pub kappa_hat: f64,
    pub alpha: Vec<f64>,
    pub max_abs_alpha: f64,
    pub wall_time_ms: f64,
    /// History depth `m_k` actually offered to the least-squares solve.
    pub depth_used: usize,
    pub dropped: usize,
    pub fallback: bool,
    pub step_bound: Option<StepBoundCheck>,
    /// `‖∇(u_β - u_α)‖` when the equivalence check is enabled.
    pub beta_gap: Option<f64>,
    /// `‖div q(u_k)‖∞`
    pub div_max: f64,
}

impl IterationRecord {
    fn terminal(k: usize, r: &Residual, wall_time_ms: f64) -> Self {
        Self {
            k,
            g_vprime: r.vprime_norm.unwrap_or(f64::NAN),
            g_l2: r.l2_norm,
            picard_resid_h1: f64::NAN,
            theta: f64::NAN,
            gamma: f64::NAN,
            kappa_hat: f64::NAN,
            alpha: Vec::new(),
            max_abs_alpha: f64::NAN,
            wall_time_ms,
            depth_used: 0,
            dropped: 0,
            fallback: false,
            step_bound: None,
            beta_gap: None,
            div_max: f64::NAN,
        }
    }

    /// True for the final record, which carries no step.
    pub fn is_terminal(&self) -> bool {
        self.alpha.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DriveStatus {
    Converged,
    MaxIters,
    Diverged,
}

#[derive(Debug, Clone)]
pub struct DriveOutput {
    pub records: Vec<IterationRecord>,
    pub status: DriveStatus,
    pub solution: VelocityField,
    /// Pressure of the last Oseen solve, if any was performed.
    pub pressure: Option<PressureField>,
}

fn norm_of(r: &Residual, norm: NormChoice) -> f64 {
    match norm {
        NormChoice::VPrime => r.vprime_norm.unwrap_or(f64::NAN),
        NormChoice::L2 => r.l2_norm,
    }
}

/// Run Picard or NGMRES from the problem's initial guess.
pub fn drive(prob: &FlowProblem, cfg: &DriverConfig) -> Result<DriveOutput, AccelError> {
    cfg.validate()?;
    let grid = *prob.grid();
    // plain Picard has no optimization norm; its gains are reported in V'
    let norm = match cfg.mode {
        Mode::Picard => NormChoice::VPrime,
        Mode::Ngmres => cfg.norm,
    };
    let fail = |iteration: usize| move |source| AccelError::Solver { iteration, source };

    let mut u = prob.initial_guess();
    let mut r = nonlinear_residual(prob, &u).map_err(fail(0))?;
    r.ensure_representer(prob).map_err(fail(0))?;

    let mut switched = false;
    let mut window = HistoryWindow::new(grid, cfg.depth.depth(false));
    let mut records = Vec::new();
    let mut pressure = None;

    let status = 'outer: loop {
        let k = records.len();
        let t0 = Instant::now();
        let gv = r.vprime_norm.expect("representer computed for every iterate");
        if !gv.is_finite() || !r.l2_norm.is_finite() {
            records.push(IterationRecord::terminal(k, &r, 0.0));
            break DriveStatus::Diverged;
        }
        if gv <= cfg.tol {
            records.push(IterationRecord::terminal(k, &r, 0.0));
            break DriveStatus::Converged;
        }
        if k == cfg.max_iters {
            records.push(IterationRecord::terminal(k, &r, 0.0));
            break DriveStatus::MaxIters;
        }
        if let DepthSchedule::Switch { switch_tol, .. } = cfg.depth {
            if !switched && gv < switch_tol {
                switched = true;
                info!("iteration {k}: residual {gv:.3e} below {switch_tol:e}, switching depth");
            }
        }
        let depth = match cfg.mode {
            Mode::Picard => Depth::Finite(0),
            Mode::Ngmres => cfg.depth.depth(switched),
        };
        window.set_depth(depth);
        window.push(HistoryEntry {
            u: u.clone(),
            residual: r.clone(),
        });

        let step = picard_solve(prob, &u).map_err(fail(k))?;
        let bound = step_bound_check(prob, &step, &r);
        if !bound.holds {
            warn!("iteration {k}: step bound violated ({:.6e} > {:.6e})", bound.lhs, bound.rhs);
        }
        let mut rt = nonlinear_residual(prob, &step.u_new).map_err(fail(k))?;
        rt.ensure_representer(prob).map_err(fail(k))?;
        window.set_candidate(HistoryEntry {
            u: step.u_new.clone(),
            residual: rt.clone(),
        });
        let n = window.len();
        let gl_k = norm_of(&r, norm);
        let gl_t = norm_of(&rt, norm);

        let mut record = IterationRecord {
            k,
            g_vprime: gv,
            g_l2: r.l2_norm,
            picard_resid_h1: step.w_h1,
            theta: f64::NAN,
            gamma: f64::NAN,
            kappa_hat: rt.vprime_norm.unwrap_or(f64::NAN) / gv,
            alpha: Vec::new(),
            max_abs_alpha: f64::NAN,
            wall_time_ms: 0.0,
            depth_used: n - 2,
            dropped: 0,
            fallback: false,
            step_bound: Some(bound),
            beta_gap: None,
            div_max: step.div_max,
        };
        pressure = Some(step.p_new.clone());

        if !gl_t.is_finite() {
            record.alpha = vec![f64::NAN; n];
            record.wall_time_ms = t0.elapsed().as_secs_f64() * 1e3;
            records.push(record);
            records.push(IterationRecord::terminal(k + 1, &rt, 0.0));
            u = step.u_new;
            break 'outer DriveStatus::Diverged;
        }

        let picard_only = cfg.mode == Mode::Picard || cfg.force_picard_coefficients;
        let mut alpha = if picard_only {
            let mut a = vec![0.0; n];
            a[0] = 1.0;
            a
        } else {
            let g = gram_matrix(&window, norm)?;
            let sol = solve_constrained_ls(&g);
            record.dropped = sol.dropped;
            record.fallback = sol.fallback;
            debug!(
                "iteration {k}: m_k = {}, cond = {:.3e}, dropped = {}, alpha = {:?}",
                n - 2,
                sol.gram_cond_estimate,
                sol.dropped,
                sol.alpha
            );
            sol.alpha
        };

        // the objective is re-evaluated from the combined vectors, not the Gram
        let parts: Vec<&Residual> = window.in_coefficient_order()?.iter().map(|e| &e.residual).collect();
        let mut objective = norm_of(&Residual::combine(&grid, &alpha, &parts), norm);
        if !picard_only && !record.fallback && objective > gl_k.min(gl_t) {
            let j = if gl_t <= gl_k { 0 } else { 1 };
            debug!("iteration {k}: rounding pushed the objective above column {j}, using it");
            alpha = vec![0.0; n];
            alpha[j] = 1.0;
            objective = if j == 0 { gl_t } else { gl_k };
        }
        record.theta = objective / gl_k;
        record.gamma = if picard_only { 1.0 } else { objective / gl_t };
        record.max_abs_alpha = alpha.iter().fold(0.0, |m, a| m.max(a.abs()));

        let u_next = ngmres_update(&window, &alpha)?;
        if cfg.check_beta_equivalence && !picard_only && !record.fallback {
            let pruned = window.without_oldest(record.dropped);
            let beta = solve_unconstrained_ls(&pruned, norm)?;
            let u_beta = beta_update(&pruned, &beta)?;
            let diff = u_beta.sub(&u_next);
            record.beta_gap = Some(discrete_inner_product_h1(&grid, &diff, &diff).expect("same grid").max(0.0).sqrt());
        }

        let unit = alpha.iter().position(|&a| a == 1.0).filter(|_| alpha.iter().filter(|&&a| a != 0.0).count() == 1);
        r = match unit {
            Some(j) => parts[j].clone(),
            None => {
                let mut fresh = nonlinear_residual(prob, &u_next).map_err(fail(k))?;
                fresh.ensure_representer(prob).map_err(fail(k))?;
                fresh
            }
        };
        u = u_next;
        record.alpha = alpha;
        record.wall_time_ms = t0.elapsed().as_secs_f64() * 1e3;
        debug!(
            "k = {k}: |g|_V' = {gv:.6e}, theta = {:.4}, gamma = {:.4}",
            record.theta, record.gamma
        );
        records.push(record);
    };

    Ok(DriveOutput {
        records,
        status,
        solution: u,
        pressure,
    })
}
