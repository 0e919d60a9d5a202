use log::debug;
use nalgebra::{DMatrix, DVector};

use super::{AccelError, GramMatrix, HistoryWindow, NormChoice};
use crate::grid::{discrete_inner_product_h1, VelocityField};

/// KKT systems whose condition estimate exceeds this are treated as singular.
pub const KKT_COND_LIMIT: f64 = 1e12;

/// Coefficients of the constrained least-squares problem.
#[derive(Debug, Clone, PartialEq)]
pub struct LsSolution {
    /// Candidate coefficient first, then `u_k`, `u_{k-1}`, ... oldest.
    pub alpha: Vec<f64>,
    /// `sqrt(αᵀ G α)`.
    pub objective: f64,
    /// Condition estimate of the (equilibrated) KKT system that was solved.
    pub gram_cond_estimate: f64,
    /// Oldest history columns pruned before the solve succeeded.
    pub dropped: usize,
    /// Set when even the two-column system was singular and the plain
    /// Picard step was taken.
    pub fallback: bool,
}

impl LsSolution {
    fn vertex(n: usize, i: usize, g: &DMatrix<f64>) -> Self {
        let mut alpha = vec![0.0; n];
        alpha[i] = 1.0;
        Self {
            alpha,
            objective: g[(i, i)].max(0.0).sqrt(),
            gram_cond_estimate: 1.0,
            dropped: 0,
            fallback: false,
        }
    }
}

/// Gram matrix of the window residuals in coefficient order.
pub fn gram_matrix(window: &HistoryWindow, norm: NormChoice) -> Result<GramMatrix, AccelError> {
    let entries = window.in_coefficient_order()?;
    let g = window.grid();
    let n = entries.len();
    let mut out = DMatrix::zeros(n, n);
    match norm {
        NormChoice::VPrime => {
            let chis = entries
                .iter()
                .enumerate()
                .map(|(i, e)| {
                    e.residual
                        .representer
                        .as_ref()
                        .map(|r| &r.chi)
                        .ok_or(AccelError::MissingRepresenter(i))
                })
                .collect::<Result<Vec<_>, _>>()?;
            for i in 0..n {
                for j in i..n {
                    let v = discrete_inner_product_h1(g, chis[i], chis[j]).expect("window fields share the grid");
                    out[(i, j)] = v;
                    out[(j, i)] = v;
                }
            }
        }
        NormChoice::L2 => {
            let h2 = g.h() * g.h();
            for i in 0..n {
                for j in i..n {
                    let v = h2 * crate::sparse::dot(&entries[i].residual.momentum, &entries[j].residual.momentum);
                    out[(i, j)] = v;
                    out[(j, i)] = v;
                }
            }
        }
    }
    Ok(out)
}

/// Minimize `αᵀ G α` subject to `Σ α = 1`.
///
/// The KKT system is solved after symmetric diagonal scaling of `G` to unit
/// diagonal. When its condition estimate exceeds [`KKT_COND_LIMIT`] the oldest
/// column is pruned and the solve retried, down to two columns; past that the
/// Picard coefficients `(1, 0, ...)` are returned with `fallback` set.
///
/// If rounding leaves the computed objective above the best single column,
/// that column is returned instead, so the result never exceeds
/// `min_i sqrt(G_ii)`.
pub fn solve_constrained_ls(g: &GramMatrix) -> LsSolution {
    let n = g.nrows();
    assert!(n >= 1 && g.ncols() == n, "Gram matrix must be square and non-empty");
    if n == 1 {
        return LsSolution::vertex(1, 0, g);
    }
    if g.iter().any(|x| !x.is_finite()) {
        let mut sol = LsSolution::vertex(n, 0, g);
        sol.gram_cond_estimate = f64::INFINITY;
        sol.fallback = true;
        return sol;
    }
    if let Some(i) = (0..n).find(|&i| g[(i, i)] <= 0.0) {
        // an exactly vanishing residual is optimal on its own
        return LsSolution::vertex(n, i, g);
    }

    let mut size = n;
    let mut last_cond = f64::INFINITY;
    let solved = loop {
        match kkt_solve(g, size) {
            Ok((alpha, cond)) => break Some((alpha, cond)),
            Err(cond) => {
                last_cond = cond;
                if size > 2 {
                    size -= 1;
                } else {
                    break None;
                }
            }
        }
    };

    let Some((mut alpha, cond)) = solved else {
        debug!("KKT singular down to two columns (cond {last_cond:.3e}); taking the Picard step");
        let mut sol = LsSolution::vertex(n, 0, g);
        sol.gram_cond_estimate = last_cond;
        sol.dropped = n - 2;
        sol.fallback = true;
        return sol;
    };
    alpha.resize(n, 0.0);
    let value = quad_form(g, &alpha);
    let best = (0..n).min_by(|&a, &b| g[(a, a)].total_cmp(&g[(b, b)])).expect("n >= 2");
    if value > g[(best, best)] {
        let mut sol = LsSolution::vertex(n, best, g);
        sol.gram_cond_estimate = cond;
        sol.dropped = n - size;
        return sol;
    }
    LsSolution {
        alpha,
        objective: value.max(0.0).sqrt(),
        gram_cond_estimate: cond,
        dropped: n - size,
        fallback: false,
    }
}

fn quad_form(g: &DMatrix<f64>, a: &[f64]) -> f64 {
    let n = a.len();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            s += a[i] * g[(i, j)] * a[j];
        }
    }
    s
}

/// Solve the leading `size x size` KKT system. Returns the coefficients and
/// the condition estimate, or the estimate alone when it is too large.
fn kkt_solve(g: &DMatrix<f64>, size: usize) -> Result<(Vec<f64>, f64), f64> {
    let d: Vec<f64> = (0..size).map(|i| g[(i, i)].sqrt()).collect();
    let c: Vec<f64> = d.iter().map(|x| 1.0 / x).collect();
    let c_norm = c.iter().map(|x| x * x).sum::<f64>().sqrt();

    let mut k = DMatrix::zeros(size + 1, size + 1);
    for i in 0..size {
        for j in 0..size {
            k[(i, j)] = 2.0 * g[(i, j)] / (d[i] * d[j]);
        }
        k[(i, size)] = c[i] / c_norm;
        k[(size, i)] = c[i] / c_norm;
    }
    let sv = k.clone().singular_values();
    let (smax, smin) = sv.iter().fold((0.0f64, f64::INFINITY), |(a, b), &s| (a.max(s), b.min(s)));
    let cond = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    if cond.is_nan() || cond > KKT_COND_LIMIT {
        return Err(cond);
    }
    let mut rhs = DVector::zeros(size + 1);
    rhs[size] = 1.0 / c_norm;
    let x = k.lu().solve(&rhs).ok_or(cond)?;
    let mut alpha: Vec<f64> = (0..size).map(|i| x[i] * c[i]).collect();
    let sum: f64 = alpha.iter().sum();
    alpha.iter_mut().for_each(|a| *a /= sum);
    Ok((alpha, cond))
}

/// Unconstrained form: minimize `‖g̃ + Σ β_i (g̃ - g_{k-i})‖²` over β.
///
/// `β_i` pairs with the `(i+1)`-th window entry in coefficient order, so
/// `β_0` belongs to `u_k`. Normal equations with Tikhonov shift
/// `1e-12 * trace`.
pub fn solve_unconstrained_ls(window: &HistoryWindow, norm: NormChoice) -> Result<Vec<f64>, AccelError> {
    let entries = window.in_coefficient_order()?;
    let g = window.grid();
    let m = entries.len() - 1;
    if m == 0 {
        return Ok(Vec::new());
    }
    let mut gram = DMatrix::zeros(m, m);
    let mut rhs = DVector::zeros(m);
    match norm {
        NormChoice::VPrime => {
            let chi = |i: usize| {
                entries[i]
                    .residual
                    .representer
                    .as_ref()
                    .map(|r| &r.chi)
                    .ok_or(AccelError::MissingRepresenter(i))
            };
            let cand = chi(0)?;
            let diffs = (1..=m).map(|i| Ok(cand.sub(chi(i)?))).collect::<Result<Vec<_>, AccelError>>()?;
            let ip = |a: &VelocityField, b: &VelocityField| discrete_inner_product_h1(g, a, b).expect("same grid");
            for i in 0..m {
                for j in i..m {
                    gram[(i, j)] = ip(&diffs[i], &diffs[j]);
                    gram[(j, i)] = gram[(i, j)];
                }
                rhs[i] = -ip(&diffs[i], cand);
            }
        }
        NormChoice::L2 => {
            let h2 = g.h() * g.h();
            let cand = &entries[0].residual.momentum;
            let diffs: Vec<Vec<f64>> = (1..=m)
                .map(|i| cand.iter().zip(&entries[i].residual.momentum).map(|(a, b)| a - b).collect())
                .collect();
            for i in 0..m {
                for j in i..m {
                    gram[(i, j)] = h2 * crate::sparse::dot(&diffs[i], &diffs[j]);
                    gram[(j, i)] = gram[(i, j)];
                }
                rhs[i] = -h2 * crate::sparse::dot(&diffs[i], cand);
            }
        }
    }
    Ok(regularized_solve(gram, rhs))
}

fn regularized_solve(mut gram: DMatrix<f64>, rhs: DVector<f64>) -> Vec<f64> {
    let m = gram.nrows();
    let shift = 1e-12 * gram.trace();
    if shift.is_nan() || shift <= 0.0 {
        return vec![0.0; m];
    }
    for i in 0..m {
        gram[(i, i)] += shift;
    }
    let x = match gram.clone().cholesky() {
        Some(ch) => ch.solve(&rhs),
        None => gram.lu().solve(&rhs).unwrap_or_else(|| DVector::zeros(m)),
    };
    x.iter().copied().collect()
}

/// Map unconstrained coefficients to the constrained ones:
/// `α_0 = 1 + Σ β_i` for the candidate and `α_{i+1} = -β_i` for the stored
/// iterates, newest first. The two forms describe the same affine set.
pub fn beta_to_alpha(beta: &[f64]) -> Vec<f64> {
    let mut alpha = Vec::with_capacity(beta.len() + 1);
    alpha.push(1.0 + beta.iter().sum::<f64>());
    alpha.extend(beta.iter().map(|b| -b));
    alpha
}

/// `Σ α_i u_i` over the window in coefficient order.
pub fn ngmres_update(window: &HistoryWindow, alpha: &[f64]) -> Result<VelocityField, AccelError> {
    let entries = window.in_coefficient_order()?;
    if alpha.len() != entries.len() {
        return Err(AccelError::LengthMismatch {
            expected: entries.len(),
            found: alpha.len(),
        });
    }
    if alpha[0] == 1.0 && alpha[1..].iter().all(|&a| a == 0.0) {
        return Ok(entries[0].u.clone());
    }
    let fields: Vec<&VelocityField> = entries.iter().map(|e| &e.u).collect();
    Ok(VelocityField::combine(alpha, &fields))
}

/// `ũ + Σ β_i (ũ - u_{k-i})`.
pub fn beta_update(window: &HistoryWindow, beta: &[f64]) -> Result<VelocityField, AccelError> {
    let entries = window.in_coefficient_order()?;
    if beta.len() + 1 != entries.len() {
        return Err(AccelError::LengthMismatch {
            expected: entries.len() - 1,
            found: beta.len(),
        });
    }
    let cand = &entries[0].u;
    let mut out = cand.clone();
    for (b, e) in beta.iter().zip(&entries[1..]) {
        out.axpy(*b, &cand.sub(&e.u));
    }
    Ok(out)
}
