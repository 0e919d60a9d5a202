use super::SparseError;

/// Compressed sparse row matrix with canonical (sorted, duplicate-free) rows.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    nrows: usize,
    ncols: usize,
    row_offsets: Vec<usize>,
    col_indices: Vec<usize>,
    values: Vec<f64>,
}

impl SparseMatrix {
    /// Build a canonical CSR matrix from `(row, col, value)` triplets.
    ///
    /// Duplicate coordinates are summed. Entries that sum to exactly zero are
    /// kept so the pattern does not depend on the values.
    pub fn assemble(
        triplets: &[(usize, usize, f64)],
        nrows: usize,
        ncols: usize,
    ) -> Result<Self, SparseError> {
        let mut counts = vec![0usize; nrows + 1];
        for &(r, c, _) in triplets {
            if r >= nrows || c >= ncols {
                return Err(SparseError::IndexOutOfRange {
                    row: r,
                    col: c,
                    nrows,
                    ncols,
                });
            }
            counts[r + 1] += 1;
        }
        for i in 0..nrows {
            counts[i + 1] += counts[i];
        }
        // bucket by row, then sort each row by column and merge duplicates
        let mut cursor = counts.clone();
        let mut cols = vec![0usize; triplets.len()];
        let mut vals = vec![0f64; triplets.len()];
        for &(r, c, v) in triplets {
            let slot = cursor[r];
            cols[slot] = c;
            vals[slot] = v;
            cursor[r] += 1;
        }

        let mut row_offsets = Vec::with_capacity(nrows + 1);
        let mut col_indices = Vec::with_capacity(triplets.len());
        let mut values = Vec::with_capacity(triplets.len());
        row_offsets.push(0);
        let mut scratch: Vec<(usize, f64)> = Vec::new();
        for r in 0..nrows {
            scratch.clear();
            scratch.extend((counts[r]..counts[r + 1]).map(|s| (cols[s], vals[s])));
            // stable sort keeps summation order of duplicates independent of
            // the bucket layout only up to their input order; sort by value
            // bits as well so any permutation of the input yields identical sums
            scratch.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)));
            let mut iter = scratch.iter().peekable();
            while let Some(&(c, v)) = iter.next() {
                let mut acc = v;
                while let Some(&&(c2, v2)) = iter.peek() {
                    if c2 != c {
                        break;
                    }
                    acc += v2;
                    iter.next();
                }
                col_indices.push(c);
                values.push(acc);
            }
            row_offsets.push(col_indices.len());
        }
        Ok(Self {
            nrows,
            ncols,
            row_offsets,
            col_indices,
            values,
        })
    }

    /// Build from raw CSR arrays, validating the canonical-form invariants.
    pub fn from_csr(
        nrows: usize,
        ncols: usize,
        row_offsets: Vec<usize>,
        col_indices: Vec<usize>,
        values: Vec<f64>,
    ) -> Result<Self, SparseError> {
        if row_offsets.len() != nrows + 1
            || row_offsets[0] != 0
            || row_offsets[nrows] != values.len()
            || col_indices.len() != values.len()
        {
            return Err(SparseError::MalformedCsr("inconsistent array lengths"));
        }
        for r in 0..nrows {
            if row_offsets[r] > row_offsets[r + 1] {
                return Err(SparseError::MalformedCsr("row offsets decrease"));
            }
            let row = &col_indices[row_offsets[r]..row_offsets[r + 1]];
            if row.windows(2).any(|w| w[0] >= w[1]) {
                return Err(SparseError::MalformedCsr("columns not strictly increasing"));
            }
            if row.iter().any(|&c| c >= ncols) {
                return Err(SparseError::MalformedCsr("column index out of range"));
            }
        }
        Ok(Self {
            nrows,
            ncols,
            row_offsets,
            col_indices,
            values,
        })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            nrows: n,
            ncols: n,
            row_offsets: (0..=n).collect(),
            col_indices: (0..n).collect(),
            values: vec![1.0; n],
        }
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row_offsets(&self) -> &[usize] {
        &self.row_offsets
    }

    pub fn col_indices(&self) -> &[usize] {
        &self.col_indices
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Column indices and values of row `r`.
    pub fn row(&self, r: usize) -> (&[usize], &[f64]) {
        let span = self.row_offsets[r]..self.row_offsets[r + 1];
        (&self.col_indices[span.clone()], &self.values[span])
    }

    /// Entry `(r, c)`, zero when structurally absent.
    pub fn get(&self, r: usize, c: usize) -> f64 {
        let (cols, vals) = self.row(r);
        match cols.binary_search(&c) {
            Ok(pos) => vals[pos],
            Err(_) => 0.0,
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Result<Vec<f64>, SparseError> {
        if x.len() != self.ncols {
            return Err(SparseError::DimensionMismatch {
                expected: self.ncols,
                found: x.len(),
            });
        }
        Ok((0..self.nrows)
            .map(|r| {
                let (cols, vals) = self.row(r);
                cols.iter().zip(vals).map(|(&c, &v)| v * x[c]).sum()
            })
            .collect())
    }

    /// Max absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        (0..self.nrows)
            .map(|r| self.row(r).1.iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn transpose(&self) -> Self {
        let mut triplets = Vec::with_capacity(self.nnz());
        for r in 0..self.nrows {
            let (cols, vals) = self.row(r);
            triplets.extend(cols.iter().zip(vals).map(|(&c, &v)| (c, r, v)));
        }
        Self::assemble(&triplets, self.ncols, self.nrows).expect("transpose indices are in range")
    }

    /// Row-major dense copy; intended for tests and small diagnostics.
    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut out = vec![vec![0.0; self.ncols]; self.nrows];
        for (r, row) in out.iter_mut().enumerate() {
            let (cols, vals) = self.row(r);
            for (&c, &v) in cols.iter().zip(vals) {
                row[c] = v;
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn duplicates_are_summed() {
        let a = SparseMatrix::assemble(&[(0, 0, 1.0), (0, 0, 2.0)], 1, 1).unwrap();
        assert_eq!(a.values(), &[3.0]);
        assert_eq!(a.row_offsets(), &[0, 1]);
    }

    #[test]
    fn empty_triplets_give_zero_matrix() {
        let a = SparseMatrix::assemble(&[], 2, 2).unwrap();
        assert_eq!(a.row_offsets(), &[0, 0, 0]);
        assert_eq!(a.nnz(), 0);
        assert_eq!(a.mul_vec(&[1.0, 2.0]).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn out_of_range_index_is_rejected() {
        let err = SparseMatrix::assemble(&[(0, 3, 1.0)], 2, 2).unwrap_err();
        assert!(matches!(err, SparseError::IndexOutOfRange { col: 3, .. }));
    }

    #[test]
    fn from_csr_rejects_unsorted_rows() {
        let err = SparseMatrix::from_csr(1, 3, vec![0, 2], vec![2, 0], vec![1.0, 1.0]).unwrap_err();
        assert!(matches!(err, SparseError::MalformedCsr(_)));
    }

    #[test]
    fn transpose_of_rectangular() {
        let a = SparseMatrix::assemble(&[(0, 2, 5.0), (1, 0, -1.0)], 2, 3).unwrap();
        let t = a.transpose();
        assert_eq!(t.nrows(), 3);
        assert_eq!(t.get(2, 0), 5.0);
        assert_eq!(t.get(0, 1), -1.0);
    }
}
