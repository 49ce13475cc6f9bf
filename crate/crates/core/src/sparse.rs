// SPDX-License-Identifier: Apache-2.0

//! Complex sparse matrices in compressed sparse row form.

use ndarray::{Array2, ArrayView2};
use num_complex::Complex64;

use crate::dense::CMatrix;
use crate::error::{Error, Result};

/// Entries with modulus below this are not stored.
pub const DROP_TOLERANCE: f64 = 1e-15;

/// Square complex CSR matrix with sorted column indices and no stored zeros.
///
/// `hermitian` is a tag set by the constructors that produce Hermitian
/// operators; [`ComplexSparseMatrix::hermitian_deviation`] checks it.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexSparseMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<Complex64>,
    hermitian: bool,
}

impl ComplexSparseMatrix {
    /// Assembles from `(row, col, value)` triplets, summing duplicates and
    /// dropping entries whose modulus is below [`DROP_TOLERANCE`].
    pub fn from_triplets(
        n: usize,
        mut triplets: Vec<(usize, usize, Complex64)>,
        hermitian: bool,
    ) -> Result<Self> {
        for &(r, c, _) in &triplets {
            if r >= n || c >= n {
                return Err(Error::IndexOutOfRange { index: r.max(c), n });
            }
        }
        triplets.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut row_ptr = vec![0usize; n + 1];
        let mut col_idx = Vec::with_capacity(triplets.len());
        let mut values: Vec<Complex64> = Vec::with_capacity(triplets.len());
        let mut rows = Vec::with_capacity(triplets.len());
        for (r, c, v) in triplets {
            if rows.last() == Some(&r) && col_idx.last() == Some(&c) {
                *values.last_mut().expect("pushed above") += v;
            } else {
                rows.push(r);
                col_idx.push(c);
                values.push(v);
            }
        }
        let mut keep_cols = Vec::with_capacity(col_idx.len());
        let mut keep_vals = Vec::with_capacity(values.len());
        for ((r, c), v) in rows.into_iter().zip(col_idx).zip(values) {
            if v.norm() >= DROP_TOLERANCE {
                row_ptr[r + 1] += 1;
                keep_cols.push(c);
                keep_vals.push(v);
            }
        }
        for i in 0..n {
            row_ptr[i + 1] += row_ptr[i];
        }
        Ok(ComplexSparseMatrix {
            n,
            row_ptr,
            col_idx: keep_cols,
            values: keep_vals,
            hermitian,
        })
    }

    pub fn identity(n: usize) -> Self {
        ComplexSparseMatrix {
            n,
            row_ptr: (0..=n).collect(),
            col_idx: (0..n).collect(),
            values: vec![Complex64::new(1.0, 0.0); n],
            hermitian: true,
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    pub fn row(&self, u: usize) -> impl Iterator<Item = (usize, Complex64)> + '_ {
        let r = self.row_ptr[u]..self.row_ptr[u + 1];
        self.col_idx[r.clone()].iter().copied().zip(self.values[r].iter().copied())
    }

    pub fn get(&self, u: usize, v: usize) -> Complex64 {
        let r = self.row_ptr[u]..self.row_ptr[u + 1];
        match self.col_idx[r.clone()].binary_search(&v) {
            Ok(i) => self.values[r.start + i],
            Err(_) => Complex64::new(0.0, 0.0),
        }
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    /// Largest `|M(u,v) − conj(M(v,u))|` over stored entries (and their mirrors).
    pub fn hermitian_deviation(&self) -> f64 {
        let mut worst = 0.0f64;
        for u in 0..self.n {
            for (v, x) in self.row(u) {
                worst = worst.max((x - self.get(v, u).conj()).norm());
            }
        }
        worst
    }

    pub fn max_imag_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.im.abs()))
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= s);
        out
    }

    pub fn neg(&self) -> Self {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v = -*v);
        out
    }

    /// `y = M x`, rows in ascending order.
    pub fn matvec(&self, x: &[Complex64]) -> Result<Vec<Complex64>> {
        if x.len() != self.n {
            return Err(Error::Dimension(format!("matvec with vector of length {} on {}×{}", x.len(), self.n, self.n)));
        }
        Ok((0..self.n)
            .map(|u| self.row(u).fold(Complex64::new(0.0, 0.0), |acc, (v, a)| acc + a * x[v]))
            .collect())
    }

    /// `M X` for a complex dense block with `n` rows.
    pub fn mul_dense(&self, x: &CMatrix) -> Result<CMatrix> {
        if x.rows() != self.n {
            return Err(Error::Dimension(format!(
                "sparse {}×{} times dense {}×{}",
                self.n,
                self.n,
                x.rows(),
                x.cols()
            )));
        }
        let c = x.cols();
        let mut out = CMatrix::zeros(self.n, c);
        for u in 0..self.n {
            let mut re_row = out.re.row_mut(u);
            for (v, a) in self.row(u) {
                let xr = x.re.row(v);
                let xi = x.im.row(v);
                for ((o, &r), &i) in re_row.iter_mut().zip(xr.iter()).zip(xi.iter()) {
                    *o += a.re * r - a.im * i;
                }
            }
            let mut im_row = out.im.row_mut(u);
            for (v, a) in self.row(u) {
                let xr = x.re.row(v);
                let xi = x.im.row(v);
                for ((o, &r), &i) in im_row.iter_mut().zip(xr.iter()).zip(xi.iter()) {
                    *o += a.re * i + a.im * r;
                }
            }
        }
        Ok(out)
    }

    pub fn to_dense(&self) -> Array2<Complex64> {
        let mut d = Array2::from_elem((self.n, self.n), Complex64::new(0.0, 0.0));
        for u in 0..self.n {
            for (v, x) in self.row(u) {
                d[(u, v)] = x;
            }
        }
        d
    }

    pub fn from_dense(m: ArrayView2<'_, Complex64>, hermitian: bool) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::Dimension(format!("{}×{} is not square", m.nrows(), m.ncols())));
        }
        let trips = m
            .indexed_iter()
            .filter(|(_, v)| v.norm() >= DROP_TOLERANCE)
            .map(|((r, c), &v)| (r, c, v))
            .collect();
        Self::from_triplets(m.nrows(), trips, hermitian)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn assembly_sums_and_drops() {
        let m = ComplexSparseMatrix::from_triplets(
            2,
            vec![(1, 0, c(1.0, 0.0)), (0, 1, c(0.5, 0.5)), (0, 1, c(0.5, -0.5)), (1, 1, c(1e-17, 0.0))],
            false,
        )
        .unwrap();
        assert_eq!(m.nnz(), 2);
        assert_eq!(m.get(0, 1), c(1.0, 0.0));
        assert_eq!(m.get(1, 1), c(0.0, 0.0));
    }

    #[test]
    fn matvec_and_dense_agree() {
        let m = ComplexSparseMatrix::from_triplets(
            3,
            vec![(0, 1, c(0.0, 1.0)), (1, 0, c(0.0, -1.0)), (2, 2, c(2.0, 0.0)), (0, 0, c(1.0, 0.0))],
            true,
        )
        .unwrap();
        assert_eq!(m.hermitian_deviation(), 0.0);
        let x = vec![c(1.0, 2.0), c(-1.0, 0.5), c(0.0, 1.0)];
        let y = m.matvec(&x).unwrap();
        let d = m.to_dense();
        for i in 0..3 {
            let expect: Complex64 = (0..3).map(|j| d[(i, j)] * x[j]).sum();
            assert!((y[i] - expect).norm() < 1e-15);
        }
        let xd = CMatrix::from_complex(&ndarray::Array2::from_shape_vec((3, 1), x).unwrap());
        let yd = m.mul_dense(&xd).unwrap();
        for i in 0..3 {
            assert!((yd.get(i, 0) - y[i]).norm() < 1e-15);
        }
    }

    #[test]
    fn dimension_errors() {
        let m = ComplexSparseMatrix::identity(2);
        assert!(m.matvec(&[c(1.0, 0.0)]).is_err());
        assert!(ComplexSparseMatrix::from_triplets(2, vec![(2, 0, c(1.0, 0.0))], false).is_err());
    }
}
