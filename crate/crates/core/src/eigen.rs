// SPDX-License-Identifier: Apache-2.0

//! Dense eigensolvers.
//!
//! Real symmetric matrices go through Householder tridiagonalization followed by
//! the implicit QL iteration. A Hermitian matrix `H = A + iB` is handled through
//! its real symmetric embedding
//!
//! ```text
//! M = [ A  −B ]
//!     [ B   A ]
//! ```
//!
//! whose spectrum is that of `H` with every eigenvalue doubled: if
//! `H(x + iy) = λ(x + iy)` then both `[x; y]` and `[−y; x]` are eigenvectors of
//! `M`. Each eigenvalue of `H` is recovered once, and complex eigenvectors are
//! re-orthonormalized inside every cluster of (numerically) equal eigenvalues.

use ndarray::Array2;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub const DEFAULT_DENSE_LIMIT: usize = 4000;

/// Ascending eigenvalues with an optional block of orthonormal eigenvectors (one per column).
#[derive(Clone, Debug)]
pub struct Spectrum {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Option<Array2<Complex64>>,
}

#[derive(Clone, Copy, Debug)]
pub struct EigenOptions {
    /// Keep only the `k` smallest eigenpairs.
    pub k: Option<usize>,
    pub vectors: bool,
    pub dense_limit: usize,
}

impl Default for EigenOptions {
    fn default() -> Self {
        EigenOptions {
            k: None,
            vectors: true,
            dense_limit: DEFAULT_DENSE_LIMIT,
        }
    }
}

impl EigenOptions {
    pub fn values_only() -> Self {
        EigenOptions {
            vectors: false,
            ..Self::default()
        }
    }
}

struct Flat {
    n: usize,
    a: Vec<f64>,
}

impl Flat {
    #[inline]
    fn at(&self, i: usize, j: usize) -> f64 {
        self.a[i * self.n + j]
    }
    #[inline]
    fn at_mut(&mut self, i: usize, j: usize) -> &mut f64 {
        &mut self.a[i * self.n + j]
    }
}

/// Householder reduction to tridiagonal form. On return `v` holds the
/// orthogonal transform, `d` the diagonal and `e[1..]` the subdiagonal.
fn tridiagonalize(v: &mut Flat, d: &mut [f64], e: &mut [f64]) {
    let n = v.n;
    for j in 0..n {
        d[j] = v.at(n - 1, j);
    }
    for i in (1..n).rev() {
        let scale: f64 = d[..i].iter().map(|x| x.abs()).sum();
        let mut h = 0.0;
        if scale == 0.0 {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = v.at(i - 1, j);
                *v.at_mut(i, j) = 0.0;
                *v.at_mut(j, i) = 0.0;
            }
        } else {
            for dk in d[..i].iter_mut() {
                *dk /= scale;
                h += *dk * *dk;
            }
            let mut f = d[i - 1];
            let mut g = h.sqrt();
            if f > 0.0 {
                g = -g;
            }
            e[i] = scale * g;
            h -= f * g;
            d[i - 1] = f - g;
            e[..i].iter_mut().for_each(|x| *x = 0.0);

            for j in 0..i {
                f = d[j];
                *v.at_mut(j, i) = f;
                g = e[j] + v.at(j, j) * f;
                for k in j + 1..i {
                    g += v.at(k, j) * d[k];
                    e[k] += v.at(k, j) * f;
                }
                e[j] = g;
            }
            f = 0.0;
            for j in 0..i {
                e[j] /= h;
                f += e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] -= hh * d[j];
            }
            for j in 0..i {
                f = d[j];
                g = e[j];
                for k in j..i {
                    *v.at_mut(k, j) -= f * e[k] + g * d[k];
                }
                d[j] = v.at(i - 1, j);
                *v.at_mut(i, j) = 0.0;
            }
        }
        d[i] = h;
    }

    for i in 0..n.saturating_sub(1) {
        *v.at_mut(n - 1, i) = v.at(i, i);
        *v.at_mut(i, i) = 1.0;
        let h = d[i + 1];
        if h != 0.0 {
            for k in 0..=i {
                d[k] = v.at(k, i + 1) / h;
            }
            for j in 0..=i {
                let mut g = 0.0;
                for k in 0..=i {
                    g += v.at(k, i + 1) * v.at(k, j);
                }
                for k in 0..=i {
                    *v.at_mut(k, j) -= g * d[k];
                }
            }
        }
        for k in 0..=i {
            *v.at_mut(k, i + 1) = 0.0;
        }
    }
    for j in 0..n {
        d[j] = v.at(n - 1, j);
        *v.at_mut(n - 1, j) = 0.0;
    }
    if n > 0 {
        *v.at_mut(n - 1, n - 1) = 1.0;
        e[0] = 0.0;
    }
}

/// Implicit QL on the tridiagonal `(d, e)`. `w` holds the transform transposed
/// (row `i` is eigenvector `i`) so rotations touch contiguous memory.
fn tridiagonal_ql(w: &mut Flat, d: &mut [f64], e: &mut [f64]) -> Result<()> {
    let n = w.n;
    if n == 0 {
        return Ok(());
    }
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;

    let eps = f64::EPSILON;
    let mut f = 0.0;
    let mut tst1 = 0.0f64;
    let max_iter = 60 * n.max(1);
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n - 1 && e[m].abs() > eps * tst1 {
            m += 1;
        }
        if m > l {
            let mut iter = 0usize;
            loop {
                iter += 1;
                if iter > max_iter {
                    return Err(Error::NoConvergence {
                        iterations: iter,
                        residual: e[l].abs(),
                    });
                }
                let mut g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d[l + 2..].iter_mut() {
                    *di -= h;
                }
                f += h;

                p = d[m];
                let (mut c, mut c2, mut c3) = (1.0, 1.0, 1.0);
                let el1 = e[l + 1];
                let (mut s, mut s2) = (0.0, 0.0);
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    let (lo, hi) = w.a.split_at_mut((i + 1) * n);
                    let row_i = &mut lo[i * n..];
                    let row_i1 = &mut hi[..n];
                    for (a, b) in row_i.iter_mut().zip(row_i1.iter_mut()) {
                        let hk = *b;
                        *b = s * *a + c * hk;
                        *a = c * *a - s * hk;
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }
    Ok(())
}

/// Eigen-decomposition of a real symmetric matrix. Returns ascending eigenvalues
/// and, row by row, the matching orthonormal eigenvectors.
pub fn symmetric_eigen(a: &Array2<f64>) -> Result<(Vec<f64>, Array2<f64>)> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::Dimension(format!("{}×{} is not square", n, a.ncols())));
    }
    let mut v = Flat {
        n,
        a: a.iter().copied().collect(),
    };
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    tridiagonalize(&mut v, &mut d, &mut e);
    let mut w = Flat {
        n,
        a: vec![0.0; n * n],
    };
    for i in 0..n {
        for j in 0..n {
            w.a[j * n + i] = v.a[i * n + j];
        }
    }
    tridiagonal_ql(&mut w, &mut d, &mut e)?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| d[i].total_cmp(&d[j]));
    let values = order.iter().map(|&i| d[i]).collect();
    let mut vecs = Array2::zeros((n, n));
    for (row, &i) in order.iter().enumerate() {
        vecs.row_mut(row)
            .iter_mut()
            .zip(&w.a[i * n..(i + 1) * n])
            .for_each(|(o, &x)| *o = x);
    }
    Ok((values, vecs))
}

/// The real symmetric `2n × 2n` embedding `[[Re, −Im], [Im, Re]]`.
pub fn embed_hermitian(h: &Array2<Complex64>) -> Array2<f64> {
    let n = h.nrows();
    let mut m = Array2::zeros((2 * n, 2 * n));
    for ((i, j), z) in h.indexed_iter() {
        m[(i, j)] = z.re;
        m[(i + n, j + n)] = z.re;
        m[(i, j + n)] = -z.im;
        m[(i + n, j)] = z.im;
    }
    m
}

/// Largest `|H(i,j) − conj(H(j,i))|`.
pub fn hermitian_deviation(h: &Array2<Complex64>) -> f64 {
    let n = h.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((h[(i, j)] - h[(j, i)].conj()).norm());
        }
    }
    worst
}

fn check_input(h: &Array2<Complex64>, limit: usize) -> Result<()> {
    let n = h.nrows();
    if h.ncols() != n {
        return Err(Error::Dimension(format!("{}×{} is not square", n, h.ncols())));
    }
    if n > limit {
        return Err(Error::TooLarge { n, limit });
    }
    if h.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::NonFinite("eigensolver input".into()));
    }
    let scale = h.iter().fold(1.0f64, |m, z| m.max(z.norm()));
    let dev = hermitian_deviation(h);
    if dev > 1e-10 * scale {
        return Err(Error::NotHermitian(dev));
    }
    Ok(())
}

/// Orthonormalizes `candidates` against `basis` and each other, keeping at most
/// `want` vectors whose residual norm exceeds `threshold`.
fn extend_basis(basis: &mut Vec<Vec<Complex64>>, candidates: Vec<Vec<Complex64>>, want: usize, threshold: f64) {
    let mut added = 0;
    for mut z in candidates {
        if added == want {
            break;
        }
        // Two passes of modified Gram–Schmidt.
        for _ in 0..2 {
            for b in basis.iter() {
                let proj: Complex64 = b.iter().zip(&z).map(|(bi, zi)| bi.conj() * zi).sum();
                z.iter_mut().zip(b).for_each(|(zi, bi)| *zi -= proj * bi);
            }
        }
        let norm = z.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        if norm > threshold {
            z.iter_mut().for_each(|v| *v /= norm);
            basis.push(z);
            added += 1;
        }
    }
}

/// Eigenvalues (ascending) and optionally eigenvectors of a dense Hermitian matrix.
pub fn hermitian_eigen(h: &Array2<Complex64>, opts: EigenOptions) -> Result<Spectrum> {
    check_input(h, opts.dense_limit)?;
    let n = h.nrows();
    let k = opts.k.unwrap_or(n).min(n);
    if let Some(req) = opts.k {
        if req > n {
            return Err(Error::InvalidParameter(format!("requested {req} eigenpairs of a {n}×{n} matrix")));
        }
    }

    if h.iter().all(|z| z.im == 0.0) {
        let (vals, vecs) = symmetric_eigen(&h.mapv(|z| z.re))?;
        let eigenvectors = opts.vectors.then(|| {
            let mut out = Array2::from_elem((n, k), Complex64::new(0.0, 0.0));
            for j in 0..k {
                for i in 0..n {
                    out[(i, j)] = Complex64::new(vecs[(j, i)], 0.0);
                }
            }
            out
        });
        return Ok(Spectrum {
            eigenvalues: vals[..k].to_vec(),
            eigenvectors,
        });
    }

    let (vals, vecs) = symmetric_eigen(&embed_hermitian(h))?;
    let eigenvalues: Vec<f64> = vals.iter().step_by(2).take(k).copied().collect();
    if !opts.vectors {
        return Ok(Spectrum {
            eigenvalues,
            eigenvectors: None,
        });
    }

    let spread = vals.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    let cluster_tol = 1e-9 * spread;
    let mut basis: Vec<Vec<Complex64>> = Vec::with_capacity(k);
    let mut start = 0usize;
    while start < 2 * n && basis.len() < k {
        let mut end = start + 1;
        while end < 2 * n && vals[end] - vals[end - 1] <= cluster_tol {
            end += 1;
        }
        // Eigenvalues of H in this cluster are the even-indexed ones.
        let want = (start..end).filter(|i| i % 2 == 0).count().min(k - basis.len());
        let candidates = (start..end)
            .map(|r| (0..n).map(|i| Complex64::new(vecs[(r, i)], vecs[(r, i + n)])).collect())
            .collect();
        let before = basis.len();
        extend_basis(&mut basis, candidates, want, 1e-6);
        if basis.len() - before != want {
            return Err(Error::NoConvergence {
                iterations: 0,
                residual: cluster_tol,
            });
        }
        start = end;
    }

    let mut out = Array2::from_elem((n, k), Complex64::new(0.0, 0.0));
    for (j, v) in basis.iter().enumerate() {
        for i in 0..n {
            out[(i, j)] = v[i];
        }
    }
    Ok(Spectrum {
        eigenvalues,
        eigenvectors: Some(out),
    })
}
