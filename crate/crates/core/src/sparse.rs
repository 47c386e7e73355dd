//! Compressed sparse row storage for document-term matrices.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CsrMatrix {
    n_rows: usize,
    n_cols: usize,
    row_offsets: Vec<usize>,
    col_indices: Vec<u32>,
    values: Vec<f64>,
}

/// A borrowed row: parallel column and value slices.
#[derive(Debug, Clone, Copy)]
pub struct RowView<'a> {
    pub indices: &'a [u32],
    pub values: &'a [f64],
}

impl<'a> RowView<'a> {
    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + 'a {
        let (indices, values) = (self.indices, self.values);
        indices.iter().zip(values).map(|(&c, &v)| (c as usize, v))
    }

    pub fn nnz(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn dot(&self, dense: &[f64]) -> f64 {
        self.iter().map(|(c, v)| v * dense[c]).sum()
    }

    pub fn norm_sq(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum()
    }
}

impl CsrMatrix {
    pub fn empty(n_cols: usize) -> Self {
        Self {
            n_rows: 0,
            n_cols,
            row_offsets: vec![0],
            col_indices: Vec::new(),
            values: Vec::new(),
        }
    }

    /// Builds from raw parts, validating every structural invariant.
    pub fn from_parts(
        n_rows: usize,
        n_cols: usize,
        row_offsets: Vec<usize>,
        col_indices: Vec<u32>,
        values: Vec<f64>,
    ) -> Result<Self> {
        let m = Self {
            n_rows,
            n_cols,
            row_offsets,
            col_indices,
            values,
        };
        m.validate()?;
        Ok(m)
    }

    /// Builds from per-row `(column, value)` lists in any order. Duplicate
    /// columns are summed and zeros are dropped.
    pub fn from_rows<I>(n_cols: usize, rows: I) -> Result<Self>
    where
        I: IntoIterator<Item = Vec<(u32, f64)>>,
    {
        let mut m = Self::empty(n_cols);
        for row in rows {
            m.push_row(row)?;
        }
        Ok(m)
    }

    pub fn from_dense(rows: &[Vec<f64>], n_cols: usize) -> Result<Self> {
        Self::from_rows(
            n_cols,
            rows.iter().map(|r| {
                r.iter()
                    .enumerate()
                    .map(|(c, &v)| (c as u32, v))
                    .collect::<Vec<_>>()
            }),
        )
    }

    pub fn push_row(&mut self, mut entries: Vec<(u32, f64)>) -> Result<()> {
        entries.sort_unstable_by_key(|&(c, _)| c);
        let mut last: Option<u32> = None;
        let start = self.col_indices.len();
        for (c, v) in entries {
            if c as usize >= self.n_cols {
                return Err(Error::DimensionMismatch {
                    expected: self.n_cols,
                    actual: c as usize + 1,
                });
            }
            if last == Some(c) {
                *self.values.last_mut().unwrap() += v;
            } else {
                self.col_indices.push(c);
                self.values.push(v);
                last = Some(c);
            }
        }
        // Cancellation or explicit zeros.
        let mut write = start;
        for read in start..self.col_indices.len() {
            if self.values[read] != 0.0 {
                self.col_indices[write] = self.col_indices[read];
                self.values[write] = self.values[read];
                write += 1;
            }
        }
        self.col_indices.truncate(write);
        self.values.truncate(write);
        self.row_offsets.push(self.values.len());
        self.n_rows += 1;
        Ok(())
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row_offsets(&self) -> &[usize] {
        &self.row_offsets
    }

    pub fn col_indices(&self) -> &[u32] {
        &self.col_indices
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn row(&self, i: usize) -> RowView<'_> {
        let (s, e) = (self.row_offsets[i], self.row_offsets[i + 1]);
        RowView {
            indices: &self.col_indices[s..e],
            values: &self.values[s..e],
        }
    }

    pub fn rows(&self) -> impl Iterator<Item = RowView<'_>> + '_ {
        (0..self.n_rows).map(move |i| self.row(i))
    }

    /// Applies `f(column, value)` to every stored value in place. Values that
    /// become zero are kept stored only if `f` never produces zero; callers
    /// that may produce zeros should rebuild via [`CsrMatrix::from_rows`].
    pub(crate) fn map_values_in_place(&mut self, mut f: impl FnMut(usize, f64) -> f64) {
        for (c, v) in self.col_indices.iter().zip(self.values.iter_mut()) {
            *v = f(*c as usize, *v);
        }
    }

    pub fn select_rows(&self, rows: &[usize]) -> CsrMatrix {
        let mut m = CsrMatrix::empty(self.n_cols);
        for &r in rows {
            let row = self.row(r);
            m.col_indices.extend_from_slice(row.indices);
            m.values.extend_from_slice(row.values);
            m.row_offsets.push(m.values.len());
            m.n_rows += 1;
        }
        m
    }

    /// Column-major copy: for each column, the `(row, value)` pairs in row order.
    pub fn to_columns(&self) -> Vec<Vec<(u32, f64)>> {
        let mut cols = vec![Vec::new(); self.n_cols];
        for (r, row) in self.rows().enumerate() {
            for (c, v) in row.iter() {
                cols[c].push((r as u32, v));
            }
        }
        cols
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        self.rows()
            .map(|row| {
                let mut d = vec![0.0; self.n_cols];
                for (c, v) in row.iter() {
                    d[c] = v;
                }
                d
            })
            .collect()
    }

    /// Structural invariant check.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(format!("malformed CSR matrix: {msg}")));
        if self.row_offsets.len() != self.n_rows + 1 {
            return bad(format!(
                "{} row offsets for {} rows",
                self.row_offsets.len(),
                self.n_rows
            ));
        }
        if self.row_offsets[0] != 0 || *self.row_offsets.last().unwrap() != self.values.len() {
            return bad("row offsets do not span the value array".into());
        }
        if self.col_indices.len() != self.values.len() {
            return bad("column and value arrays differ in length".into());
        }
        for i in 0..self.n_rows {
            let (s, e) = (self.row_offsets[i], self.row_offsets[i + 1]);
            if s > e {
                return bad(format!("row offsets decrease at row {i}"));
            }
            let cols = &self.col_indices[s..e];
            if cols.windows(2).any(|w| w[0] >= w[1]) {
                return bad(format!("row {i} columns not strictly increasing"));
            }
            if cols.iter().any(|&c| c as usize >= self.n_cols) {
                return bad(format!("row {i} has a column >= {}", self.n_cols));
            }
            if self.values[s..e].contains(&0.0) {
                return bad(format!("row {i} stores an explicit zero"));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn from_rows_sorts_merges_and_drops_zeros() {
        let m = CsrMatrix::from_rows(4, vec![vec![(3, 1.0), (0, 2.0), (3, 1.5)], vec![], vec![(1, 0.0), (2, -1.0)]]).unwrap();
        m.validate().unwrap();
        assert_eq!(m.to_dense(), vec![vec![2.0, 0.0, 0.0, 2.5], vec![0.0; 4], vec![0.0, 0.0, -1.0, 0.0]]);
        assert_eq!(m.nnz(), 3);
    }

    #[test]
    fn out_of_range_column_rejected() {
        assert!(CsrMatrix::from_rows(2, vec![vec![(2, 1.0)]]).is_err());
    }

    #[test]
    fn validate_catches_bad_parts() {
        assert!(CsrMatrix::from_parts(1, 3, vec![0, 2], vec![2, 1], vec![1.0, 1.0]).is_err());
        assert!(CsrMatrix::from_parts(1, 3, vec![0, 1], vec![0], vec![0.0]).is_err());
        assert!(CsrMatrix::from_parts(1, 3, vec![0, 2], vec![0], vec![1.0]).is_err());
        assert!(CsrMatrix::from_parts(1, 3, vec![0, 2], vec![0, 2], vec![1.0, 2.0]).is_ok());
    }

    #[test]
    fn columns_and_selection() {
        let m = CsrMatrix::from_dense(&[vec![1.0, 0.0], vec![0.0, 2.0], vec![3.0, 4.0]], 2).unwrap();
        assert_eq!(m.to_columns(), vec![vec![(0, 1.0), (2, 3.0)], vec![(1, 2.0), (2, 4.0)]]);
        let s = m.select_rows(&[2, 0, 2]);
        s.validate().unwrap();
        assert_eq!(s.to_dense(), vec![vec![3.0, 4.0], vec![1.0, 0.0], vec![3.0, 4.0]]);
    }
}
