//! Compressed sparse row storage for the assembled DG forms.

use std::ops::Range;

use nalgebra::DMatrix;

/// Coordinate-format accumulator. Duplicate entries are summed in insertion
/// order when converted, so assembly order fixes the floating point result.
#[derive(Debug, Clone)]
pub struct TripletBuilder {
    nrows: usize,
    ncols: usize,
    entries: Vec<(usize, usize, f64)>,
}

impl TripletBuilder {
    pub fn new(nrows: usize, ncols: usize) -> Self {
        Self {
            nrows,
            ncols,
            entries: Vec::new(),
        }
    }

    pub fn with_capacity(nrows: usize, ncols: usize, capacity: usize) -> Self {
        Self {
            nrows,
            ncols,
            entries: Vec::with_capacity(capacity),
        }
    }

    #[inline]
    pub fn push(&mut self, row: usize, col: usize, value: f64) {
        debug_assert!(row < self.nrows && col < self.ncols);
        self.entries.push((row, col, value));
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn build(mut self) -> CsrMatrix {
        // stable sort keeps insertion order among duplicates
        self.entries.sort_by_key(|&(r, c, _)| (r, c));
        let mut row_ptr = vec![0usize; self.nrows + 1];
        let mut col_idx = Vec::with_capacity(self.entries.len());
        let mut values: Vec<f64> = Vec::with_capacity(self.entries.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in self.entries {
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
            } else {
                col_idx.push(c);
                values.push(v);
                row_ptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for i in 0..self.nrows {
            row_ptr[i + 1] += row_ptr[i];
        }
        CsrMatrix {
            nrows: self.nrows,
            ncols: self.ncols,
            row_ptr,
            col_idx,
            values,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    nrows: usize,
    ncols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        TripletBuilder::new(nrows, ncols).build()
    }

    pub fn identity(n: usize) -> Self {
        let mut t = TripletBuilder::with_capacity(n, n, n);
        for i in 0..n {
            t.push(i, i, 1.0);
        }
        t.build()
    }

    pub fn from_dense(m: &DMatrix<f64>) -> Self {
        let mut t = TripletBuilder::new(m.nrows(), m.ncols());
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                if m[(i, j)] != 0.0 {
                    t.push(i, j, m[(i, j)]);
                }
            }
        }
        t.build()
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

    /// Column indices and values of row `i`, columns ascending.
    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        (&self.col_idx[r.clone()], &self.values[r])
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (cols, vals) = self.row(i);
        match cols.binary_search(&j) {
            Ok(k) => vals[k],
            Err(_) => 0.0,
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.ncols);
        (0..self.nrows)
            .map(|i| {
                let (cols, vals) = self.row(i);
                cols.iter().zip(vals).map(|(&c, &v)| v * x[c]).sum()
            })
            .collect()
    }

    /// `xᵀ A y`
    pub fn bilinear(&self, x: &[f64], y: &[f64]) -> f64 {
        assert_eq!(x.len(), self.nrows);
        assert_eq!(y.len(), self.ncols);
        (0..self.nrows)
            .map(|i| {
                let (cols, vals) = self.row(i);
                let row: f64 = cols.iter().zip(vals).map(|(&c, &v)| v * y[c]).sum();
                x[i] * row
            })
            .sum()
    }

    pub fn quad_form(&self, x: &[f64]) -> f64 {
        self.bilinear(x, x)
    }

    pub fn scale(&self, factor: f64) -> CsrMatrix {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= factor);
        out
    }

    /// Sum of matrices with identical shape.
    pub fn sum(terms: &[&CsrMatrix]) -> CsrMatrix {
        assert!(!terms.is_empty());
        let (nrows, ncols) = (terms[0].nrows, terms[0].ncols);
        let cap = terms.iter().map(|m| m.nnz()).sum();
        let mut t = TripletBuilder::with_capacity(nrows, ncols, cap);
        for m in terms {
            assert_eq!((m.nrows, m.ncols), (nrows, ncols));
            for i in 0..nrows {
                let (cols, vals) = m.row(i);
                for (&c, &v) in cols.iter().zip(vals) {
                    t.push(i, c, v);
                }
            }
        }
        t.build()
    }

    pub fn transpose(&self) -> CsrMatrix {
        let mut t = TripletBuilder::with_capacity(self.ncols, self.nrows, self.nnz());
        for i in 0..self.nrows {
            let (cols, vals) = self.row(i);
            for (&c, &v) in cols.iter().zip(vals) {
                t.push(c, i, v);
            }
        }
        t.build()
    }

    /// Largest absolute row sum.
    pub fn inf_norm(&self) -> f64 {
        (0..self.nrows)
            .map(|i| self.row(i).1.iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// Largest `|a_ij - a_ji|` relative to the largest entry.
    pub fn symmetry_defect(&self) -> f64 {
        assert_eq!(self.nrows, self.ncols);
        let scale = self.max_abs();
        if scale == 0.0 {
            return 0.0;
        }
        let mut worst = 0.0f64;
        for i in 0..self.nrows {
            let (cols, vals) = self.row(i);
            for (&c, &v) in cols.iter().zip(vals) {
                worst = worst.max((v - self.get(c, i)).abs());
            }
        }
        worst / scale
    }

    /// Dense copy of the square diagonal block `range × range`.
    pub fn dense_block(&self, range: Range<usize>) -> DMatrix<f64> {
        self.dense_submatrix(range.clone(), range)
    }

    pub fn dense_submatrix(&self, rows: Range<usize>, cols: Range<usize>) -> DMatrix<f64> {
        let mut out = DMatrix::zeros(rows.len(), cols.len());
        for (li, i) in rows.clone().enumerate() {
            let (cidx, vals) = self.row(i);
            let lo = cidx.partition_point(|&c| c < cols.start);
            for (&c, &v) in cidx[lo..].iter().zip(&vals[lo..]) {
                if c >= cols.end {
                    break;
                }
                out[(li, c - cols.start)] = v;
            }
        }
        out
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        self.dense_submatrix(0..self.nrows, 0..self.ncols)
    }

    /// Diagonal entries.
    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.nrows.min(self.ncols))
            .map(|i| self.get(i, i))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn duplicates_are_summed() {
        let mut t = TripletBuilder::new(2, 2);
        t.push(0, 0, 1.0);
        t.push(1, 0, 2.0);
        t.push(0, 0, 3.0);
        t.push(1, 1, 5.0);
        let m = t.build();
        assert_eq!(m.nnz(), 3);
        assert_eq!(m.get(0, 0), 4.0);
        assert_eq!(m.get(0, 1), 0.0);
        assert_eq!(m.mul_vec(&[1.0, 1.0]), vec![4.0, 7.0]);
        assert_eq!(m.bilinear(&[1.0, 0.0], &[0.0, 1.0]), 0.0);
        assert_eq!(m.bilinear(&[0.0, 1.0], &[1.0, 0.0]), 2.0);
    }

    #[test]
    fn dense_block_and_transpose() {
        let d = DMatrix::from_row_slice(3, 3, &[1.0, 2.0, 0.0, 0.0, 3.0, 4.0, 5.0, 0.0, 6.0]);
        let m = CsrMatrix::from_dense(&d);
        assert_eq!(m.to_dense(), d);
        assert_eq!(m.transpose().to_dense(), d.transpose());
        assert_eq!(
            m.dense_block(1..3),
            DMatrix::from_row_slice(2, 2, &[3.0, 4.0, 0.0, 6.0])
        );
        assert!(m.symmetry_defect() > 0.0);
        let s = CsrMatrix::sum(&[&m, &m.transpose()]);
        assert_eq!(s.symmetry_defect(), 0.0);
    }
}
