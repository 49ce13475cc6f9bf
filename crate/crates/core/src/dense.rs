// SPDX-License-Identifier: Apache-2.0

//! Dense complex helpers: split real/imaginary matrices for the feature path,
//! and a small LU solver for the analysis path.

use ndarray::{Array1, Array2};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Complex matrix stored as separate real and imaginary planes, so products
/// run on real GEMM kernels.
#[derive(Clone, Debug, PartialEq)]
pub struct CMatrix {
    pub re: Array2<f64>,
    pub im: Array2<f64>,
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMatrix {
            re: Array2::zeros((rows, cols)),
            im: Array2::zeros((rows, cols)),
        }
    }

    pub fn from_real(re: Array2<f64>) -> Self {
        let im = Array2::zeros(re.raw_dim());
        CMatrix { re, im }
    }

    pub fn from_complex(m: &Array2<Complex64>) -> Self {
        CMatrix {
            re: m.mapv(|z| z.re),
            im: m.mapv(|z| z.im),
        }
    }

    pub fn to_complex(&self) -> Array2<Complex64> {
        let mut out = Array2::from_elem(self.re.raw_dim(), Complex64::new(0.0, 0.0));
        ndarray::Zip::from(&mut out)
            .and(&self.re)
            .and(&self.im)
            .for_each(|o, &r, &i| *o = Complex64::new(r, i));
        out
    }

    pub fn rows(&self) -> usize {
        self.re.nrows()
    }

    pub fn cols(&self) -> usize {
        self.re.ncols()
    }

    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        Complex64::new(self.re[(r, c)], self.im[(r, c)])
    }

    pub fn is_finite(&self) -> bool {
        self.re.iter().chain(self.im.iter()).all(|v| v.is_finite())
    }

    pub fn max_abs_imag(&self) -> f64 {
        self.im.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `self += s · other`
    pub fn add_scaled(&mut self, s: f64, other: &CMatrix) {
        self.re.scaled_add(s, &other.re);
        self.im.scaled_add(s, &other.im);
    }

    pub fn scale(&mut self, s: f64) {
        self.re.mapv_inplace(|v| v * s);
        self.im.mapv_inplace(|v| v * s);
    }

    /// Largest entrywise modulus of `self − other`.
    pub fn max_abs_diff(&self, other: &CMatrix) -> f64 {
        let mut worst = 0.0f64;
        for ((a, b), (c, d)) in self.re.iter().zip(self.im.iter()).zip(other.re.iter().zip(other.im.iter())) {
            worst = worst.max(((a - c).powi(2) + (b - d).powi(2)).sqrt());
        }
        worst
    }

    /// Complex product `self · w`.
    pub fn matmul(&self, w: &CMatrix) -> CMatrix {
        CMatrix {
            re: self.re.dot(&w.re) - self.im.dot(&w.im),
            im: self.re.dot(&w.im) + self.im.dot(&w.re),
        }
    }
}

/// LU factorization with partial pivoting of a square complex matrix.
pub struct ComplexLu {
    lu: Array2<Complex64>,
    perm: Vec<usize>,
}

impl ComplexLu {
    pub fn new(a: &Array2<Complex64>) -> Result<Self> {
        let n = a.nrows();
        if a.ncols() != n {
            return Err(Error::Dimension(format!("{}×{} is not square", n, a.ncols())));
        }
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let scale = a.iter().fold(0.0f64, |m, z| m.max(z.norm())).max(f64::MIN_POSITIVE);
        for k in 0..n {
            let (p, pv) = (k..n)
                .map(|i| (i, lu[(i, k)].norm()))
                .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
            if pv <= scale * 1e-14 {
                return Err(Error::Singular);
            }
            if p != k {
                for j in 0..n {
                    lu.swap((k, j), (p, j));
                }
                perm.swap(k, p);
            }
            let pivot = lu[(k, k)];
            for i in k + 1..n {
                let f = lu[(i, k)] / pivot;
                lu[(i, k)] = f;
                if f.norm() == 0.0 {
                    continue;
                }
                for j in k + 1..n {
                    let t = lu[(k, j)];
                    lu[(i, j)] -= f * t;
                }
            }
        }
        Ok(ComplexLu { lu, perm })
    }

    pub fn solve(&self, b: &[Complex64]) -> Array1<Complex64> {
        let n = self.lu.nrows();
        let mut y: Vec<Complex64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            for j in 0..i {
                let t = self.lu[(i, j)] * y[j];
                y[i] -= t;
            }
        }
        for i in (0..n).rev() {
            for j in i + 1..n {
                let t = self.lu[(i, j)] * y[j];
                y[i] -= t;
            }
            y[i] /= self.lu[(i, i)];
        }
        Array1::from(y)
    }

    pub fn inverse(&self) -> Array2<Complex64> {
        let n = self.lu.nrows();
        let mut inv = Array2::from_elem((n, n), Complex64::new(0.0, 0.0));
        let mut e = vec![Complex64::new(0.0, 0.0); n];
        for j in 0..n {
            e.iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0));
            e[j] = Complex64::new(1.0, 0.0);
            inv.column_mut(j).assign(&self.solve(&e));
        }
        inv
    }
}

pub fn complex_identity(n: usize) -> Array2<Complex64> {
    let mut m = Array2::from_elem((n, n), Complex64::new(0.0, 0.0));
    for i in 0..n {
        m[(i, i)] = Complex64::new(1.0, 0.0);
    }
    m
}
