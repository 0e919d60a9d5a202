//! MAC staggered discretization of the unit square.
//!
//! Layout for an `n x n` grid with `h = 1/n`:
//!
//! * `u[i, j]` lives on vertical faces at `(i h, (j + 1/2) h)`, `i = 0..=n`, `j = 0..n`;
//!   faces `i = 0` and `i = n` lie on the side walls.
//! * `v[i, j]` lives on horizontal faces at `((i + 1/2) h, j h)`, `i = 0..n`, `j = 0..=n`;
//!   faces `j = 0` and `j = n` lie on the bottom and top walls.
//! * `p[i, j]` lives at cell centers.
//!
//! Tangential wall velocities (u on the top and bottom walls, v on the side
//! walls) do not coincide with any face. Each field stores them separately and
//! the operators reach them through reflected ghost values
//! `ghost = 2 * wall - interior`.

mod field;
pub mod io;
mod ops;

pub use field::{BoundaryData, PressureField, VelocityField};
pub use ops::{convect, discrete_inner_product_h1, divergence, vector_laplacian};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GridError {
    #[error("grid must have at least 4 cells per side, got {0}")]
    TooCoarse(usize),
    #[error("shape mismatch: {what} expected {expected} values, found {found}")]
    ShapeMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },
}

/// Square MAC grid on `(0, 1)^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MacGrid {
    n: usize,
    h: f64,
}

impl MacGrid {
    pub fn new(n: usize) -> Result<Self, GridError> {
        if n < 4 {
            return Err(GridError::TooCoarse(n));
        }
        Ok(Self { n, h: 1.0 / n as f64 })
    }

    /// Cells per side.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn u_len(&self) -> usize {
        (self.n + 1) * self.n
    }

    pub fn v_len(&self) -> usize {
        self.n * (self.n + 1)
    }

    pub fn cells(&self) -> usize {
        self.n * self.n
    }

    #[inline]
    pub fn u_at(&self, i: usize, j: usize) -> usize {
        j * (self.n + 1) + i
    }

    #[inline]
    pub fn v_at(&self, i: usize, j: usize) -> usize {
        j * self.n + i
    }

    #[inline]
    pub fn cell_at(&self, i: usize, j: usize) -> usize {
        j * self.n + i
    }

    /// Interior u unknowns: faces `i = 1..n`, `j = 0..n`.
    pub fn u_unknowns(&self) -> usize {
        (self.n - 1) * self.n
    }

    /// Interior velocity unknowns (u block first, then v block).
    pub fn velocity_unknowns(&self) -> usize {
        2 * self.n * (self.n - 1)
    }

    /// Interior index of u face `(i, j)`, `1 <= i <= n-1`.
    #[inline]
    pub fn u_dof(&self, i: usize, j: usize) -> usize {
        j * (self.n - 1) + (i - 1)
    }

    /// Interior index of v face `(i, j)`, `1 <= j <= n-1`.
    #[inline]
    pub fn v_dof(&self, i: usize, j: usize) -> usize {
        self.u_unknowns() + (j - 1) * self.n + i
    }

    /// Interior face values of `w` in unknown order.
    pub fn gather(&self, w: &VelocityField) -> Vec<f64> {
        let n = self.n;
        let mut out = Vec::with_capacity(self.velocity_unknowns());
        for j in 0..n {
            for i in 1..n {
                out.push(w.u[self.u_at(i, j)]);
            }
        }
        for j in 1..n {
            for i in 0..n {
                out.push(w.v[self.v_at(i, j)]);
            }
        }
        out
    }

    /// Copy of `template` (boundary data included) with interior faces replaced by `values`.
    pub fn scatter(&self, values: &[f64], template: &VelocityField) -> Result<VelocityField, GridError> {
        if values.len() != self.velocity_unknowns() {
            return Err(GridError::ShapeMismatch {
                what: "interior velocity vector",
                expected: self.velocity_unknowns(),
                found: values.len(),
            });
        }
        let mut w = template.clone();
        let n = self.n;
        let mut it = values.iter();
        for j in 0..n {
            for i in 1..n {
                w.u[self.u_at(i, j)] = *it.next().unwrap();
            }
        }
        for j in 1..n {
            for i in 0..n {
                w.v[self.v_at(i, j)] = *it.next().unwrap();
            }
        }
        Ok(w)
    }

    pub(crate) fn check_velocity(&self, w: &VelocityField) -> Result<(), GridError> {
        let checks = [
            ("u", self.u_len(), w.u.len()),
            ("v", self.v_len(), w.v.len()),
            ("wall data", self.n + 1, w.top_u.len()),
            ("wall data", self.n + 1, w.bottom_u.len()),
            ("wall data", self.n + 1, w.left_v.len()),
            ("wall data", self.n + 1, w.right_v.len()),
        ];
        for (what, expected, found) in checks {
            if expected != found {
                return Err(GridError::ShapeMismatch { what, expected, found });
            }
        }
        Ok(())
    }
}
