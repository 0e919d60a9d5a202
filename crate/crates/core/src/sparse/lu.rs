//! Envelope LU factorization with threshold partial pivoting.
//!
//! The matrix is first reordered symmetrically with reverse Cuthill-McKee so
//! the nonzeros cluster around the diagonal. Each row is then held as one
//! dense segment covering its first nonzero through its last, and elimination
//! proceeds row-wise (right-looking). A row only ever fills towards the right,
//! up to the end of the pivot rows that update it, so the segments stay inside
//! the band of the reordered matrix plus whatever row interchanges add.
//!
//! Pivoting keeps the diagonal whenever it is at least `PIVOT_THRESHOLD` times
//! the largest candidate in its column; this preserves the band for the
//! velocity blocks while still handling the zero pressure block of a saddle
//! point system, whose diagonal only becomes nonzero through fill.

use super::ordering::reverse_cuthill_mckee;
use super::{SparseError, SparseMatrix};

/// Relative threshold for accepting the diagonal as pivot.
pub const PIVOT_THRESHOLD: f64 = 0.1;
/// A pivot smaller than this times the largest entry of its original row is singular.
pub const SINGULAR_TOL: f64 = 1e-14;

#[derive(Debug, Clone)]
struct Segment {
    start: usize,
    vals: Vec<f64>,
}

impl Segment {
    #[inline]
    fn end(&self) -> usize {
        self.start + self.vals.len()
    }

    #[inline]
    fn get(&self, col: usize) -> f64 {
        if col >= self.start && col < self.end() {
            self.vals[col - self.start]
        } else {
            0.0
        }
    }
}

/// `A[row_order[i], col_order[j]] = (L U)[i, j]`, with `L` unit lower triangular.
#[derive(Debug, Clone)]
pub struct LuFactors {
    n: usize,
    row_order: Vec<usize>,
    col_order: Vec<usize>,
    rows: Vec<Segment>,
    swaps: usize,
}

/// Factor a square matrix using a reverse Cuthill-McKee ordering.
pub fn lu_factor(a: &SparseMatrix) -> Result<LuFactors, SparseError> {
    if a.nrows() != a.ncols() {
        return Err(SparseError::NotSquare {
            nrows: a.nrows(),
            ncols: a.ncols(),
        });
    }
    let perm = reverse_cuthill_mckee(a);
    lu_factor_ordered(a, &perm)
}

/// Factor with a caller-supplied symmetric ordering, `perm[new] = old`.
pub fn lu_factor_ordered(a: &SparseMatrix, perm: &[usize]) -> Result<LuFactors, SparseError> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(SparseError::NotSquare {
            nrows: n,
            ncols: a.ncols(),
        });
    }
    if perm.len() != n {
        return Err(SparseError::DimensionMismatch {
            expected: n,
            found: perm.len(),
        });
    }
    let mut inverse = vec![usize::MAX; n];
    for (new, &old) in perm.iter().enumerate() {
        if old >= n || inverse[old] != usize::MAX {
            return Err(SparseError::InvalidPermutation);
        }
        inverse[old] = new;
    }

    let mut rows = Vec::with_capacity(n);
    let mut row_order = Vec::with_capacity(n);
    let mut row_scale = Vec::with_capacity(n);
    let mut lower_bw = 0usize;
    for (i, &old) in perm.iter().enumerate() {
        let (cols, vals) = a.row(old);
        let (mut lo, mut hi) = (i, i + 1);
        for &c in cols {
            lo = lo.min(inverse[c]);
            hi = hi.max(inverse[c] + 1);
        }
        let mut seg = Segment {
            start: lo,
            vals: vec![0.0; hi - lo],
        };
        let mut scale = 0f64;
        for (&c, &v) in cols.iter().zip(vals) {
            seg.vals[inverse[c] - lo] += v;
            scale = scale.max(v.abs());
        }
        lower_bw = lower_bw.max(i - lo);
        rows.push(seg);
        row_order.push(old);
        row_scale.push(scale);
    }

    let mut swaps = 0usize;
    for k in 0..n {
        let last = (k + lower_bw).min(n - 1);
        let diag = rows[k].get(k).abs();
        let (mut best, mut amax) = (k, diag);
        for (i, row) in rows.iter().enumerate().take(last + 1).skip(k + 1) {
            let v = row.get(k).abs();
            if v > amax {
                amax = v;
                best = i;
            }
        }
        let piv = if diag > 0.0 && diag >= PIVOT_THRESHOLD * amax {
            k
        } else {
            best
        };
        let pivot_value = rows[piv].get(k);
        if pivot_value == 0.0 || pivot_value.abs() < SINGULAR_TOL * row_scale[piv] {
            return Err(SparseError::Singular {
                row: row_order[piv],
                step: k,
                pivot: pivot_value.abs(),
            });
        }
        if piv != k {
            rows.swap(k, piv);
            row_order.swap(k, piv);
            row_scale.swap(k, piv);
            swaps += 1;
        }

        let (head, tail) = rows.split_at_mut(k + 1);
        let pivot_row = &head[k];
        let pend = pivot_row.end();
        let src = &pivot_row.vals[k + 1 - pivot_row.start..];
        for row in tail.iter_mut().take(last - k) {
            if row.start > k || row.end() <= k {
                continue;
            }
            let a_ik = row.vals[k - row.start];
            if a_ik == 0.0 {
                continue;
            }
            let l = a_ik / pivot_value;
            row.vals[k - row.start] = l;
            if row.end() < pend {
                let extra = pend - row.end();
                row.vals.reserve_exact(extra);
                row.vals.resize(pend - row.start, 0.0);
            }
            let dst = &mut row.vals[k + 1 - row.start..pend - row.start];
            for (d, s) in dst.iter_mut().zip(src) {
                *d -= l * s;
            }
        }
    }

    Ok(LuFactors {
        n,
        row_order,
        col_order: perm.to_vec(),
        rows,
        swaps,
    })
}

/// Solve `A x = b` with previously computed factors.
pub fn lu_solve(f: &LuFactors, b: &[f64]) -> Result<Vec<f64>, SparseError> {
    f.solve(b)
}

impl LuFactors {
    pub fn dim(&self) -> usize {
        self.n
    }

    /// Original row index placed at each position of the factorization.
    pub fn row_order(&self) -> &[usize] {
        &self.row_order
    }

    /// Original column index placed at each position of the factorization.
    pub fn col_order(&self) -> &[usize] {
        &self.col_order
    }

    /// Number of off-diagonal pivots chosen.
    pub fn row_interchanges(&self) -> usize {
        self.swaps
    }

    /// Stored entries of the combined factors.
    pub fn stored_entries(&self) -> usize {
        self.rows.iter().map(|r| r.vals.len()).sum()
    }

    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>, SparseError> {
        if b.len() != self.n {
            return Err(SparseError::DimensionMismatch {
                expected: self.n,
                found: b.len(),
            });
        }
        let mut y: Vec<f64> = self.row_order.iter().map(|&r| b[r]).collect();
        for i in 0..self.n {
            let row = &self.rows[i];
            if row.start < i {
                let l = &row.vals[..i - row.start];
                let dot: f64 = l.iter().zip(&y[row.start..i]).map(|(a, b)| a * b).sum();
                y[i] -= dot;
            }
        }
        for i in (0..self.n).rev() {
            let row = &self.rows[i];
            let end = row.end();
            let u = &row.vals[i + 1 - row.start..];
            let dot: f64 = u.iter().zip(&y[i + 1..end]).map(|(a, b)| a * b).sum();
            y[i] = (y[i] - dot) / row.vals[i - row.start];
        }
        let mut x = vec![0.0; self.n];
        for (j, &c) in self.col_order.iter().enumerate() {
            x[c] = y[j];
        }
        Ok(x)
    }

    /// Unit lower triangular factor in the permuted coordinates (explicit unit diagonal).
    pub fn l(&self) -> SparseMatrix {
        let mut t = Vec::new();
        for (i, row) in self.rows.iter().enumerate() {
            for c in row.start..i {
                let v = row.vals[c - row.start];
                if v != 0.0 {
                    t.push((i, c, v));
                }
            }
            t.push((i, i, 1.0));
        }
        SparseMatrix::assemble(&t, self.n, self.n).expect("factor indices in range")
    }

    /// Upper triangular factor in the permuted coordinates.
    pub fn u(&self) -> SparseMatrix {
        let mut t = Vec::new();
        for (i, row) in self.rows.iter().enumerate() {
            for c in i..row.end() {
                let v = row.vals[c - row.start];
                if v != 0.0 || c == i {
                    t.push((i, c, v));
                }
            }
        }
        SparseMatrix::assemble(&t, self.n, self.n).expect("factor indices in range")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_factors_trivially() {
        let a = SparseMatrix::identity(4);
        let f = lu_factor(&a).unwrap();
        assert_eq!(f.row_interchanges(), 0);
        assert_eq!(f.l().to_dense(), SparseMatrix::identity(4).to_dense());
        assert_eq!(f.u().to_dense(), SparseMatrix::identity(4).to_dense());
        assert_eq!(f.row_order(), f.col_order());
        let b = [1.5, -2.0, 3.25, 0.0];
        assert_eq!(f.solve(&b).unwrap(), b.to_vec());
    }

    #[test]
    fn anti_diagonal_needs_pivoting() {
        let a = SparseMatrix::assemble(&[(0, 1, 1.0), (1, 0, 1.0)], 2, 2).unwrap();
        let f = lu_factor(&a).unwrap();
        assert_eq!(f.row_interchanges(), 1);
        assert_eq!(f.solve(&[3.0, 7.0]).unwrap(), vec![7.0, 3.0]);
    }

    #[test]
    fn diagonal_solve() {
        let a = SparseMatrix::assemble(&[(0, 0, 2.0), (1, 1, 4.0)], 2, 2).unwrap();
        let f = lu_factor(&a).unwrap();
        assert_eq!(lu_solve(&f, &[2.0, 8.0]).unwrap(), vec![1.0, 2.0]);
    }

    #[test]
    fn singular_matrix_names_pivot_row() {
        let a = SparseMatrix::assemble(&[(0, 0, 1.0), (0, 1, 1.0), (1, 0, 1.0), (1, 1, 1.0)], 2, 2).unwrap();
        match lu_factor(&a) {
            Err(SparseError::Singular { row, .. }) => assert!(row < 2),
            other => panic!("expected singular error, got {other:?}"),
        }
    }

    #[test]
    fn structurally_empty_row_is_singular() {
        let a = SparseMatrix::assemble(&[(0, 0, 1.0)], 2, 2).unwrap();
        assert!(matches!(lu_factor(&a), Err(SparseError::Singular { .. })));
    }

    #[test]
    fn dimension_mismatch_on_solve() {
        let f = lu_factor(&SparseMatrix::identity(3)).unwrap();
        assert!(matches!(
            f.solve(&[1.0]),
            Err(SparseError::DimensionMismatch { expected: 3, found: 1 })
        ));
    }

    #[test]
    fn rectangular_is_rejected() {
        let a = SparseMatrix::assemble(&[], 2, 3).unwrap();
        assert!(matches!(lu_factor(&a), Err(SparseError::NotSquare { .. })));
    }
}
