//! Compressed sparse row matrices with a fixed sparsity pattern.

use rayon::prelude::*;

/// Rows below this size are multiplied serially.
const PARALLEL_ROWS: usize = 8192;

#[derive(Clone, Debug, PartialEq)]
pub struct CsrMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    /// Zero matrix with the given (per-row, unsorted, possibly repeated) column sets.
    pub fn from_pattern(rows: Vec<Vec<usize>>) -> Self {
        let n = rows.len();
        let mut row_ptr = Vec::with_capacity(n + 1);
        row_ptr.push(0);
        let mut col_idx = Vec::new();
        for mut cols in rows {
            cols.sort_unstable();
            cols.dedup();
            debug_assert!(cols.last().is_none_or(|&c| c < n));
            col_idx.extend_from_slice(&cols);
            row_ptr.push(col_idx.len());
        }
        let values = vec![0.0; col_idx.len()];
        Self {
            n,
            row_ptr,
            col_idx,
            values,
        }
    }

    /// Pattern of a finite element matrix: all DOF pairs sharing an element.
    pub fn from_element_dofs<'a>(n: usize, elements: impl Iterator<Item = &'a [usize]>) -> Self {
        let mut rows: Vec<Vec<usize>> = vec![Vec::new(); n];
        for dofs in elements {
            for &r in dofs {
                rows[r].extend_from_slice(dofs);
            }
        }
        Self::from_pattern(rows)
    }

    pub fn from_dense(a: &[Vec<f64>]) -> Self {
        let rows = a
            .iter()
            .map(|row| (0..row.len()).filter(|&c| row[c] != 0.0).collect())
            .collect();
        let mut m = Self::from_pattern(rows);
        for (r, row) in a.iter().enumerate() {
            for (c, &v) in row.iter().enumerate() {
                if v != 0.0 {
                    m.add(r, c, v);
                }
            }
        }
        m
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::from_pattern((0..n).map(|i| vec![i]).collect());
        m.values.iter_mut().for_each(|v| *v = 1.0);
        m
    }

    pub fn n_rows(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, r: usize) -> (&[usize], &[f64]) {
        let range = self.row_ptr[r]..self.row_ptr[r + 1];
        (&self.col_idx[range.clone()], &self.values[range])
    }

    fn position(&self, r: usize, c: usize) -> Option<usize> {
        let start = self.row_ptr[r];
        self.col_idx[start..self.row_ptr[r + 1]]
            .binary_search(&c)
            .ok()
            .map(|k| start + k)
    }

    /// Entry `(r, c)`; zero outside the pattern.
    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.position(r, c).map_or(0.0, |k| self.values[k])
    }

    /// Accumulate into an existing pattern entry. Panics outside the pattern.
    pub fn add(&mut self, r: usize, c: usize, v: f64) {
        let k = self
            .position(r, c)
            .unwrap_or_else(|| panic!("entry ({r}, {c}) is not in the sparsity pattern"));
        self.values[k] += v;
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    /// `y = A x`. Rows are summed serially, so the result does not depend on
    /// the thread count.
    pub fn mul_vec_into(&self, x: &[f64], y: &mut [f64]) {
        let row = |(r, out): (usize, &mut f64)| {
            let mut s = 0.0;
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                s += self.values[k] * x[self.col_idx[k]];
            }
            *out = s;
        };
        if self.n >= PARALLEL_ROWS {
            y.par_iter_mut().enumerate().for_each(row);
        } else {
            y.iter_mut().enumerate().for_each(row);
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        self.mul_vec_into(x, &mut y);
        y
    }

    /// `xᵀ A y`.
    pub fn bilinear(&self, x: &[f64], y: &[f64]) -> f64 {
        dot(x, &self.mul_vec(y))
    }

    /// Exact (bitwise) symmetry of values and pattern.
    pub fn is_symmetric(&self) -> bool {
        (0..self.n).all(|r| {
            let (cols, vals) = self.row(r);
            cols.iter()
                .zip(vals)
                .all(|(&c, &v)| self.position(c, r).is_some_and(|k| self.values[k] == v))
        })
    }
}

/// Dot product with a fixed summation order (chunked, then summed serially).
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    const CHUNK: usize = 4096;
    if a.len() < 4 * CHUNK {
        return a.iter().zip(b).map(|(x, y)| x * y).sum();
    }
    let partial: Vec<f64> = a
        .par_chunks(CHUNK)
        .zip(b.par_chunks(CHUNK))
        .map(|(x, y)| x.iter().zip(y).map(|(p, q)| p * q).sum())
        .collect();
    partial.iter().sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}
