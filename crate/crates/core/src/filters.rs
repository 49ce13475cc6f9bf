// SPDX-License-Identifier: Apache-2.0

//! Polynomial diffusion filters `H = Σ θ_k P^k` and feature pre-computation.
//!
//! `P` is always the shift operator returned by [`gso`]; the filter sign is
//! consumed there and never re-applied downstream.

use ndarray::Array2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::charge::Charge;
use crate::dense::{complex_identity, CMatrix, ComplexLu};
use crate::error::{Error, Result};
use crate::graph::{DirectedGraph, Symmetrization};
use crate::magnetic::renormalized_magnetic_adjacency;
use crate::sparse::ComplexSparseMatrix;

/// Dense filters are limited to this many nodes.
pub const DENSE_FILTER_LIMIT: usize = 200;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FilterKind {
    #[serde(alias = "lr")]
    LinearRank,
    #[serde(alias = "md")]
    MarkovDiffusion,
    Ppr,
    Hkpr,
}

impl FilterKind {
    pub fn code(self) -> u8 {
        match self {
            FilterKind::LinearRank => 0,
            FilterKind::MarkovDiffusion => 1,
            FilterKind::Ppr => 2,
            FilterKind::Hkpr => 3,
        }
    }

    pub fn from_code(c: u8) -> Option<Self> {
        [FilterKind::LinearRank, FilterKind::MarkovDiffusion, FilterKind::Ppr, FilterKind::Hkpr]
            .into_iter()
            .find(|k| k.code() == c)
    }
}

impl std::str::FromStr for FilterKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "lr" | "linear-rank" | "linearrank" => Ok(FilterKind::LinearRank),
            "md" | "markov-diffusion" | "markovdiffusion" => Ok(FilterKind::MarkovDiffusion),
            "ppr" => Ok(FilterKind::Ppr),
            "hkpr" => Ok(FilterKind::Hkpr),
            _ => Err(Error::Config(format!("unknown filter `{s}`"))),
        }
    }
}

/// `LowPass` uses `+Ã_q`, `HighPass` uses `−Ã_q`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FilterSign {
    #[default]
    LowPass,
    HighPass,
}

impl std::str::FromStr for FilterSign {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "low-pass" | "low" | "+" => Ok(FilterSign::LowPass),
            "high-pass" | "high" | "-" => Ok(FilterSign::HighPass),
            _ => Err(Error::Config(format!("unknown sign `{s}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FilterSpec {
    pub kind: FilterKind,
    #[serde(rename = "K")]
    pub k: usize,
    /// Restart probability, PPR only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    /// Diffusion time, HKPR only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t: Option<f64>,
    #[serde(default)]
    pub sign: FilterSign,
}

impl FilterSpec {
    pub fn linear_rank(k: usize, sign: FilterSign) -> Self {
        FilterSpec {
            kind: FilterKind::LinearRank,
            k,
            alpha: None,
            t: None,
            sign,
        }
    }

    pub fn markov_diffusion(k: usize, sign: FilterSign) -> Self {
        FilterSpec {
            kind: FilterKind::MarkovDiffusion,
            ..FilterSpec::linear_rank(k, sign)
        }
    }

    pub fn ppr(k: usize, alpha: f64, sign: FilterSign) -> Self {
        FilterSpec {
            kind: FilterKind::Ppr,
            alpha: Some(alpha),
            ..FilterSpec::linear_rank(k, sign)
        }
    }

    pub fn hkpr(k: usize, t: f64, sign: FilterSign) -> Self {
        FilterSpec {
            kind: FilterKind::Hkpr,
            t: Some(t),
            ..FilterSpec::linear_rank(k, sign)
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::InvalidParameter("truncation order K must be at least 1".into()));
        }
        let needs_alpha = self.kind == FilterKind::Ppr;
        let needs_t = self.kind == FilterKind::Hkpr;
        match (needs_alpha, self.alpha) {
            (true, None) => return Err(Error::InvalidParameter("PPR needs alpha".into())),
            (true, Some(a)) if !(a > 0.0 && a < 1.0) => {
                return Err(Error::InvalidParameter(format!("alpha = {a} must lie in (0, 1)")))
            }
            (false, Some(_)) => return Err(Error::InvalidParameter(format!("{:?} takes no alpha", self.kind))),
            _ => {}
        }
        match (needs_t, self.t) {
            (true, None) => Err(Error::InvalidParameter("HKPR needs t".into())),
            (true, Some(t)) if !(t > 0.0 && t.is_finite()) => {
                Err(Error::InvalidParameter(format!("t = {t} must be positive")))
            }
            (false, Some(_)) => Err(Error::InvalidParameter(format!("{:?} takes no t", self.kind))),
            _ => Ok(()),
        }
    }
}

/// Damping coefficients as `(power, θ)` pairs in ascending power.
pub fn damping(spec: &FilterSpec) -> Result<Vec<(usize, f64)>> {
    spec.validate()?;
    let k = spec.k;
    let kf = k as f64;
    Ok(match spec.kind {
        FilterKind::LinearRank => (0..k).map(|i| (i, 2.0 * (kf - i as f64) / (kf * (kf + 1.0)))).collect(),
        FilterKind::MarkovDiffusion => (1..=k).map(|i| (i, 1.0 / kf)).collect(),
        FilterKind::Ppr => {
            let a = spec.alpha.unwrap_or_default();
            let mut c = 1.0 - a;
            (0..k)
                .map(|i| {
                    let out = (i, c);
                    c *= a;
                    out
                })
                .collect()
        }
        FilterKind::Hkpr => {
            let t = spec.t.unwrap_or_default();
            let mut c = (-t).exp();
            (0..k)
                .map(|i| {
                    let out = (i, c);
                    c *= t / (i as f64 + 1.0);
                    out
                })
                .collect()
        }
    })
}

/// `1 − Σ θ_k`: the damping mass dropped by truncation (zero for LR and MD).
/// Because `‖P‖₂ ≤ 1`, it bounds the spectral-norm truncation error.
pub fn truncation_residual(spec: &FilterSpec) -> Result<f64> {
    Ok(match spec.kind {
        FilterKind::LinearRank | FilterKind::MarkovDiffusion => 0.0,
        FilterKind::Ppr => spec.alpha.unwrap_or_default().powi(spec.k as i32),
        FilterKind::Hkpr => {
            let mass: f64 = damping(spec)?.iter().map(|&(_, c)| c).sum();
            (1.0 - mass).max(0.0)
        }
    })
}

/// Smallest `K` whose truncation residual is at most `eps`.
pub fn order_for_tolerance(kind: FilterKind, alpha: Option<f64>, t: Option<f64>, eps: f64, max_k: usize) -> Option<usize> {
    (1..=max_k).find(|&k| {
        let spec = FilterSpec {
            kind,
            k,
            alpha,
            t,
            sign: FilterSign::LowPass,
        };
        truncation_residual(&spec).is_ok_and(|r| r <= eps)
    })
}

/// The shift operator `±Ã_q`.
pub fn gso(g: &DirectedGraph, q: f64, sign: FilterSign, convention: Symmetrization) -> Result<ComplexSparseMatrix> {
    let p = renormalized_magnetic_adjacency(g, q, convention)?;
    Ok(match sign {
        FilterSign::LowPass => p,
        FilterSign::HighPass => p.neg(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub spec: FilterSpec,
    pub q: Charge,
    pub dataset: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FilteredFeatures {
    pub xbar: CMatrix,
    pub provenance: Option<Provenance>,
}

fn check_finite(m: &CMatrix, step: usize) -> Result<()> {
    if m.is_finite() {
        Ok(())
    } else {
        Err(Error::NonFinite(format!("filtered features after power {step}")))
    }
}

/// `X̄ = H X`, one sparse product per power, accumulated in ascending power.
pub fn precompute_features(p: &ComplexSparseMatrix, x: &CMatrix, spec: &FilterSpec) -> Result<FilteredFeatures> {
    if p.dim() != x.rows() {
        return Err(Error::Dimension(format!("operator is {0}×{0}, features have {1} rows", p.dim(), x.rows())));
    }
    check_finite(x, 0)?;
    let coeffs = damping(spec)?;
    let xbar = match spec.kind {
        FilterKind::LinearRank => {
            let k = spec.k;
            let mut t = x.clone();
            t.scale(2.0 / (k as f64 + 1.0));
            let mut acc = t.clone();
            // The update after T^(K−1) has coefficient 0, so stop there.
            for i in 0..k - 1 {
                t = p.mul_dense(&t)?;
                t.scale((k - i - 1) as f64 / (k - i) as f64);
                check_finite(&t, i + 1)?;
                acc.add_scaled(1.0, &t);
            }
            acc
        }
        _ => {
            let mut acc = CMatrix::zeros(x.rows(), x.cols());
            let mut t = x.clone();
            let mut power = 0;
            for (pw, c) in coeffs {
                while power < pw {
                    t = p.mul_dense(&t)?;
                    power += 1;
                    check_finite(&t, power)?;
                }
                acc.add_scaled(c, &t);
            }
            acc
        }
    };
    check_finite(&xbar, spec.k)?;
    Ok(FilteredFeatures { xbar, provenance: None })
}

/// Dense filter matrix for small graphs, with the LR closed form when it applies.
#[derive(Clone, Debug)]
pub struct DenseFilter {
    pub sum: Array2<Complex64>,
    /// `(2/(K(K+1))) (K I − (K+1) P + P^{K+1}) (I − P)^{-2}`, absent when `I − P` is singular
    /// or the filter is not LR.
    pub closed_form: Option<Array2<Complex64>>,
}

pub fn apply_filter_dense(p: &Array2<Complex64>, spec: &FilterSpec) -> Result<DenseFilter> {
    let n = p.nrows();
    if p.ncols() != n {
        return Err(Error::Dimension(format!("{}×{} is not square", n, p.ncols())));
    }
    if n > DENSE_FILTER_LIMIT {
        return Err(Error::TooLarge {
            n,
            limit: DENSE_FILTER_LIMIT,
        });
    }
    let eye = complex_identity(n);
    let mut sum = Array2::from_elem((n, n), Complex64::new(0.0, 0.0));
    let mut pk = eye.clone();
    let mut power = 0;
    for (pw, c) in damping(spec)? {
        while power < pw {
            pk = pk.dot(p);
            power += 1;
        }
        sum.scaled_add(Complex64::new(c, 0.0), &pk);
    }

    let closed_form = if spec.kind == FilterKind::LinearRank {
        let k = spec.k;
        let mut pk1 = eye.clone();
        for _ in 0..=k {
            pk1 = pk1.dot(p);
        }
        let numer = eye.mapv(|z| z * k as f64) - p.mapv(|z| z * (k as f64 + 1.0)) + pk1;
        match ComplexLu::new(&(&eye - p)) {
            Ok(lu) => {
                let inv = lu.inverse();
                let inv2 = inv.dot(&inv);
                let scale = 2.0 / (k as f64 * (k as f64 + 1.0));
                Some(numer.dot(&inv2).mapv(|z| z * scale))
            }
            Err(Error::Singular) => None,
            Err(e) => return Err(e),
        }
    } else {
        None
    };
    Ok(DenseFilter { sum, closed_form })
}
