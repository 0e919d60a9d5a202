//! Matrices on interior unknowns.
//!
//! Velocity blocks act on the interior face vector produced by
//! [`MacGrid::gather`] with homogeneous wall data; inhomogeneous data is
//! moved to the right-hand side by applying the field operators to a lift.
//! Saddle point systems append one pressure unknown per cell. The
//! continuity equation of cell 0 is replaced by `p_0 = 0`: with zero net
//! boundary flux the remaining equations already force the dropped one, and
//! the pin removes the constant pressure mode.

use crate::grid::MacGrid;
use crate::grid::VelocityField;
use crate::sparse::SparseMatrix;

pub(crate) type Triplets = Vec<(usize, usize, f64)>;

/// `-Δ_h` with homogeneous reflected ghosts on the tangential walls.
pub(crate) fn push_neg_laplacian(g: &MacGrid, scale: f64, t: &mut Triplets) {
    let n = g.n();
    let c = scale / (g.h() * g.h());
    for j in 0..n {
        for i in 1..n {
            let row = g.u_dof(i, j);
            let mut diag = 4.0 * c;
            if i + 1 < n {
                t.push((row, g.u_dof(i + 1, j), -c));
            }
            if i > 1 {
                t.push((row, g.u_dof(i - 1, j), -c));
            }
            if j + 1 < n {
                t.push((row, g.u_dof(i, j + 1), -c));
            } else {
                diag += c;
            }
            if j > 0 {
                t.push((row, g.u_dof(i, j - 1), -c));
            } else {
                diag += c;
            }
            t.push((row, row, diag));
        }
    }
    for j in 1..n {
        for i in 0..n {
            let row = g.v_dof(i, j);
            let mut diag = 4.0 * c;
            if j + 1 < n {
                t.push((row, g.v_dof(i, j + 1), -c));
            }
            if j > 1 {
                t.push((row, g.v_dof(i, j - 1), -c));
            }
            if i + 1 < n {
                t.push((row, g.v_dof(i + 1, j), -c));
            } else {
                diag += c;
            }
            if i > 0 {
                t.push((row, g.v_dof(i - 1, j), -c));
            } else {
                diag += c;
            }
            t.push((row, row, diag));
        }
    }
}

/// Skew-symmetric convection `C(a)` on homogeneous interior fields.
pub(crate) fn push_convection(g: &MacGrid, a: &VelocityField, t: &mut Triplets) {
    let n = g.n();
    let k = 0.5 / g.h();
    for j in 0..n {
        for i in 1..n {
            let row = g.u_dof(i, j);
            let fe = 0.5 * (a.u[g.u_at(i, j)] + a.u[g.u_at(i + 1, j)]);
            let fw = 0.5 * (a.u[g.u_at(i - 1, j)] + a.u[g.u_at(i, j)]);
            let fn_ = 0.5 * (a.v[g.v_at(i - 1, j + 1)] + a.v[g.v_at(i, j + 1)]);
            let fs = 0.5 * (a.v[g.v_at(i - 1, j)] + a.v[g.v_at(i, j)]);
            let mut diag = 0.0;
            if i + 1 < n {
                t.push((row, g.u_dof(i + 1, j), k * fe));
            }
            if i > 1 {
                t.push((row, g.u_dof(i - 1, j), -k * fw));
            }
            if j + 1 < n {
                t.push((row, g.u_dof(i, j + 1), k * fn_));
            } else {
                diag -= k * fn_;
            }
            if j > 0 {
                t.push((row, g.u_dof(i, j - 1), -k * fs));
            } else {
                diag += k * fs;
            }
            if diag != 0.0 {
                t.push((row, row, diag));
            }
        }
    }
    for j in 1..n {
        for i in 0..n {
            let row = g.v_dof(i, j);
            let fn_ = 0.5 * (a.v[g.v_at(i, j)] + a.v[g.v_at(i, j + 1)]);
            let fs = 0.5 * (a.v[g.v_at(i, j - 1)] + a.v[g.v_at(i, j)]);
            let fe = 0.5 * (a.u[g.u_at(i + 1, j - 1)] + a.u[g.u_at(i + 1, j)]);
            let fw = 0.5 * (a.u[g.u_at(i, j - 1)] + a.u[g.u_at(i, j)]);
            let mut diag = 0.0;
            if j + 1 < n {
                t.push((row, g.v_dof(i, j + 1), k * fn_));
            }
            if j > 1 {
                t.push((row, g.v_dof(i, j - 1), -k * fs));
            }
            if i + 1 < n {
                t.push((row, g.v_dof(i + 1, j), k * fe));
            } else {
                diag -= k * fe;
            }
            if i > 0 {
                t.push((row, g.v_dof(i - 1, j), -k * fw));
            } else {
                diag += k * fw;
            }
            if diag != 0.0 {
                t.push((row, row, diag));
            }
        }
    }
}

/// Pressure gradient in the momentum rows, negative divergence in the
/// continuity rows, and the pressure pin. Pressure unknowns start at
/// `g.velocity_unknowns()`.
pub(crate) fn push_pressure_coupling(g: &MacGrid, t: &mut Triplets) {
    let n = g.n();
    let off = g.velocity_unknowns();
    let c = 1.0 / g.h();
    let p = |i: usize, j: usize| off + g.cell_at(i, j);
    for j in 0..n {
        for i in 1..n {
            let row = g.u_dof(i, j);
            t.push((row, p(i, j), c));
            t.push((row, p(i - 1, j), -c));
        }
    }
    for j in 1..n {
        for i in 0..n {
            let row = g.v_dof(i, j);
            t.push((row, p(i, j), c));
            t.push((row, p(i, j - 1), -c));
        }
    }
    for j in 0..n {
        for i in 0..n {
            let row = p(i, j);
            if i == 0 && j == 0 {
                t.push((row, row, 1.0));
                continue;
            }
            if i + 1 < n {
                t.push((row, g.u_dof(i + 1, j), -c));
            }
            if i > 0 {
                t.push((row, g.u_dof(i, j), c));
            }
            if j + 1 < n {
                t.push((row, g.v_dof(i, j + 1), -c));
            }
            if j > 0 {
                t.push((row, g.v_dof(i, j), c));
            }
        }
    }
}

/// `ν (-Δ_h) + C(a)` on interior velocity unknowns.
pub fn oseen_velocity_matrix(g: &MacGrid, nu: f64, a: &VelocityField) -> SparseMatrix {
    let mut t = Triplets::new();
    push_neg_laplacian(g, nu, &mut t);
    push_convection(g, a, &mut t);
    let nv = g.velocity_unknowns();
    SparseMatrix::assemble(&t, nv, nv).expect("stencil indices in range")
}

/// `-Δ_h` on interior velocity unknowns.
pub fn neg_laplacian_matrix(g: &MacGrid) -> SparseMatrix {
    let mut t = Triplets::new();
    push_neg_laplacian(g, 1.0, &mut t);
    let nv = g.velocity_unknowns();
    SparseMatrix::assemble(&t, nv, nv).expect("stencil indices in range")
}

/// Coupled Oseen system `[ν(-Δ_h) + C(a), G; -D, 0]` with the pressure pin.
pub fn oseen_system(g: &MacGrid, nu: f64, a: &VelocityField) -> SparseMatrix {
    let mut t = Triplets::new();
    push_neg_laplacian(g, nu, &mut t);
    push_convection(g, a, &mut t);
    push_pressure_coupling(g, &mut t);
    let dim = g.velocity_unknowns() + g.cells();
    SparseMatrix::assemble(&t, dim, dim).expect("stencil indices in range")
}

/// Projection system `[I, G; -D, 0]` with the pressure pin; its velocity
/// solution is the orthogonal projection of the right-hand side onto
/// discretely divergence-free fields.
pub fn projection_system(g: &MacGrid) -> SparseMatrix {
    let mut t = Triplets::new();
    for i in 0..g.velocity_unknowns() {
        t.push((i, i, 1.0));
    }
    push_pressure_coupling(g, &mut t);
    let dim = g.velocity_unknowns() + g.cells();
    SparseMatrix::assemble(&t, dim, dim).expect("stencil indices in range")
}

/// Stokes-type system `[-Δ_h, G; -D, 0]` with the pressure pin.
pub fn stokes_system(g: &MacGrid) -> SparseMatrix {
    let mut t = Triplets::new();
    push_neg_laplacian(g, 1.0, &mut t);
    push_pressure_coupling(g, &mut t);
    let dim = g.velocity_unknowns() + g.cells();
    SparseMatrix::assemble(&t, dim, dim).expect("stencil indices in range")
}
