//! Compressed sparse row matrix with a fixed pattern and sorted column
//! indices, sized for repeated Newton assemblies into the same structure.

/// Square or rectangular CSR matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    pub n_rows: usize,
    pub n_cols: usize,
    pub row_ptr: Vec<usize>,
    pub cols: Vec<usize>,
    pub vals: Vec<f64>,
}

impl CsrMatrix {
    /// Build a zero matrix from per-row column lists. Lists may repeat and
    /// arrive unsorted; they are sorted and deduplicated here.
    pub fn from_pattern(n_rows: usize, n_cols: usize, mut rows: Vec<Vec<usize>>) -> CsrMatrix {
        assert_eq!(rows.len(), n_rows);
        let mut row_ptr = Vec::with_capacity(n_rows + 1);
        row_ptr.push(0);
        let mut cols = Vec::new();
        for row in &mut rows {
            row.sort_unstable();
            row.dedup();
            if let Some(&last) = row.last() {
                assert!(last < n_cols, "column {last} out of range");
            }
            cols.extend_from_slice(row);
            row_ptr.push(cols.len());
        }
        let vals = vec![0.0; cols.len()];
        CsrMatrix { n_rows, n_cols, row_ptr, cols, vals }
    }

    pub fn nnz(&self) -> usize {
        self.cols.len()
    }

    pub fn set_zero(&mut self) {
        self.vals.iter_mut().for_each(|v| *v = 0.0);
    }

    fn entry_index(&self, r: usize, c: usize) -> usize {
        let lo = self.row_ptr[r];
        let hi = self.row_ptr[r + 1];
        match self.cols[lo..hi].binary_search(&c) {
            Ok(k) => lo + k,
            Err(_) => panic!("entry ({r}, {c}) is outside the sparsity pattern"),
        }
    }

    /// Add `v` to entry `(r, c)`. The entry must exist in the pattern.
    pub fn add(&mut self, r: usize, c: usize, v: f64) {
        let k = self.entry_index(r, c);
        self.vals[k] += v;
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        let lo = self.row_ptr[r];
        let hi = self.row_ptr[r + 1];
        match self.cols[lo..hi].binary_search(&c) {
            Ok(k) => self.vals[lo + k],
            Err(_) => 0.0,
        }
    }

    pub fn row(&self, r: usize) -> (&[usize], &[f64]) {
        let lo = self.row_ptr[r];
        let hi = self.row_ptr[r + 1];
        (&self.cols[lo..hi], &self.vals[lo..hi])
    }

    /// y = A x.
    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.n_cols);
        assert_eq!(y.len(), self.n_rows);
        for r in 0..self.n_rows {
            let (cols, vals) = self.row(r);
            let mut acc = 0.0;
            for (c, v) in cols.iter().zip(vals) {
                acc += v * x[*c];
            }
            y[r] = acc;
        }
    }

    pub fn matvec_alloc(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n_rows];
        self.matvec(x, &mut y);
        y
    }

    /// Dense copy, for small test matrices.
    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut dense = vec![vec![0.0; self.n_cols]; self.n_rows];
        for r in 0..self.n_rows {
            let (cols, vals) = self.row(r);
            for (c, v) in cols.iter().zip(vals) {
                dense[r][*c] = *v;
            }
        }
        dense
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> CsrMatrix {
        let mut m = CsrMatrix::from_pattern(3, 3, vec![vec![0, 1], vec![1, 0, 1, 2], vec![2]]);
        m.add(0, 0, 2.0);
        m.add(0, 1, -1.0);
        m.add(1, 0, -1.0);
        m.add(1, 1, 2.0);
        m.add(1, 2, -1.0);
        m.add(2, 2, 3.0);
        m
    }

    #[test]
    fn pattern_dedup_and_matvec() {
        let m = sample();
        assert_eq!(m.nnz(), 6);
        let y = m.matvec_alloc(&[1.0, 2.0, 3.0]);
        assert_eq!(y, vec![0.0, 0.0, 9.0]);
        assert_eq!(m.get(0, 2), 0.0);
        assert_eq!(m.get(1, 2), -1.0);
    }

    #[test]
    fn accumulation_and_reset() {
        let mut m = sample();
        m.add(1, 1, 0.5);
        assert_eq!(m.get(1, 1), 2.5);
        m.set_zero();
        assert_eq!(m.get(1, 1), 0.0);
        assert_eq!(m.nnz(), 6);
    }

    #[test]
    #[should_panic(expected = "outside the sparsity pattern")]
    fn adding_outside_pattern_panics() {
        let mut m = sample();
        m.add(2, 0, 1.0);
    }
}
