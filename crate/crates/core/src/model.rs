// SPDX-License-Identifier: Apache-2.0

//! The two-layer classifier `Softmax(CGTU(X̄ W0) W1)` trained on pre-filtered features.
//!
//! `W0` is complex; its real and imaginary planes are treated as independent
//! real parameters for the gradients. In real-degenerate mode (`q ∈ {0, ½}`)
//! `imag(W0)` stays zero and the activation is plain `tanh`.
//!
//! A linear head (`Softmax(Re(X̄ W0))`, no hidden layer) is also available for
//! filter ablations.

use std::f64::consts::PI;

use ndarray::{Array2, Axis, Zip};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dense::CMatrix;
use crate::error::{Error, Result};

pub const ADAM_BETA1: f64 = 0.9;
pub const ADAM_BETA2: f64 = 0.999;
pub const ADAM_EPS: f64 = 1e-8;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Architecture {
    #[default]
    Mgc,
    Linear,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ModelParams {
    /// `c_in × h` (or `c_in × C` for the linear head).
    pub w0: CMatrix,
    /// `h × C`; empty for the linear head.
    pub w1: Array2<f64>,
    pub real_degenerate: bool,
    pub architecture: Architecture,
}

impl ModelParams {
    pub fn input_dim(&self) -> usize {
        self.w0.rows()
    }

    pub fn num_classes(&self) -> usize {
        match self.architecture {
            Architecture::Mgc => self.w1.ncols(),
            Architecture::Linear => self.w0.cols(),
        }
    }

    pub fn hidden_dim(&self) -> usize {
        match self.architecture {
            Architecture::Mgc => self.w0.cols(),
            Architecture::Linear => 0,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.w0.is_finite() && self.w1.iter().all(|v| v.is_finite())
    }

    fn zeros_like(&self) -> ModelParams {
        ModelParams {
            w0: CMatrix::zeros(self.w0.rows(), self.w0.cols()),
            w1: Array2::zeros(self.w1.raw_dim()),
            ..*self
        }
    }

    fn blocks(&self) -> [&Array2<f64>; 3] {
        [&self.w0.re, &self.w0.im, &self.w1]
    }

    fn blocks_mut(&mut self) -> [&mut Array2<f64>; 3] {
        [&mut self.w0.re, &mut self.w0.im, &mut self.w1]
    }
}

fn glorot(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Array2<f64> {
    let limit = (6.0 / (rows + cols) as f64).sqrt();
    Array2::from_shape_simple_fn((rows, cols), || rng.random_range(-limit..limit))
}

/// Rayleigh scale `σ = 1/√(2(fan_in + fan_out))` for complex weights.
pub fn rayleigh_sigma(fan_in: usize, fan_out: usize) -> f64 {
    1.0 / (2.0 * (fan_in + fan_out) as f64).sqrt()
}

/// Complex weights with Rayleigh modulus and uniform phase on `[−π, π]`.
pub fn complex_init(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> CMatrix {
    let sigma = rayleigh_sigma(rows, cols);
    let mut w = CMatrix::zeros(rows, cols);
    Zip::from(&mut w.re).and(&mut w.im).for_each(|r, i| {
        let u: f64 = rng.random();
        let modulus = sigma * (-2.0 * (1.0 - u).ln()).sqrt();
        let phase = rng.random_range(-PI..=PI);
        *r = modulus * phase.cos();
        *i = modulus * phase.sin();
    });
    w
}

/// Draws `W0` then `W1` from a ChaCha8 stream seeded with `seed`.
pub fn init_weights(c_in: usize, h: usize, classes: usize, seed: u64, real_degenerate: bool) -> ModelParams {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let w0 = if real_degenerate {
        CMatrix::from_real(glorot(&mut rng, c_in, h))
    } else {
        complex_init(&mut rng, c_in, h)
    };
    let w1 = glorot(&mut rng, h, classes);
    ModelParams {
        w0,
        w1,
        real_degenerate,
        architecture: Architecture::Mgc,
    }
}

pub fn init_linear(c_in: usize, classes: usize, seed: u64, real_degenerate: bool) -> ModelParams {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let w0 = if real_degenerate {
        CMatrix::from_real(glorot(&mut rng, c_in, classes))
    } else {
        complex_init(&mut rng, c_in, classes)
    };
    ModelParams {
        w0,
        w1: Array2::zeros((0, 0)),
        real_degenerate,
        architecture: Architecture::Linear,
    }
}

/// `tanh(Re z) ⊙ tanh(Im z)`, or `tanh(Re z)` in real-degenerate mode.
pub fn cgtu(z: &CMatrix, real_degenerate: bool) -> Array2<f64> {
    if real_degenerate {
        return z.re.mapv(f64::tanh);
    }
    let mut out = z.re.mapv(f64::tanh);
    Zip::from(&mut out).and(&z.im).for_each(|o, &i| *o *= i.tanh());
    out
}

/// Row-wise softmax, stable against large logits.
pub fn softmax_rows(logits: &Array2<f64>) -> Array2<f64> {
    let mut p = logits.clone();
    for mut row in p.rows_mut() {
        let m = row.fold(f64::NEG_INFINITY, |a, &b| a.max(b));
        row.mapv_inplace(|v| (v - m).exp());
        let s = row.sum();
        row.mapv_inplace(|v| v / s);
    }
    p
}

/// Inverted-dropout masks (already scaled by `1/(1−p)`); one draw per entry
/// shared by the real and imaginary planes.
struct Dropout {
    input: Array2<f64>,
    hidden: Option<Array2<f64>>,
}

impl Dropout {
    fn draw(rng: &mut ChaCha8Rng, rate: f64, rows: usize, c_in: usize, hidden: usize) -> Self {
        let keep = 1.0 - rate;
        let mut mask = |r: usize, c: usize| {
            Array2::from_shape_simple_fn((r, c), || if rng.random::<f64>() < keep { 1.0 / keep } else { 0.0 })
        };
        let input = mask(rows, c_in);
        let hidden = (hidden > 0).then(|| mask(rows, hidden));
        Dropout { input, hidden }
    }
}

struct Cache {
    x: CMatrix,
    /// `tanh(Re Z)`, `tanh(Im Z)` for the MGC head.
    a: Array2<f64>,
    b: Array2<f64>,
    hidden: Array2<f64>,
    probs: Array2<f64>,
}

fn check_input(params: &ModelParams, x: &CMatrix) -> Result<()> {
    if x.cols() != params.input_dim() {
        return Err(Error::Dimension(format!(
            "features have {} columns, weights expect {}",
            x.cols(),
            params.input_dim()
        )));
    }
    Ok(())
}

/// `Re(X W)` and `Im(X W)`; the imaginary plane is skipped in degenerate mode.
fn complex_linear(x: &CMatrix, w: &CMatrix, real_degenerate: bool) -> (Array2<f64>, Option<Array2<f64>>) {
    if real_degenerate {
        (x.re.dot(&w.re), None)
    } else {
        let z = x.matmul(w);
        (z.re, Some(z.im))
    }
}

fn forward_cached(params: &ModelParams, x: &CMatrix, dropout: Option<&Dropout>) -> Result<Cache> {
    check_input(params, x)?;
    let x = match dropout {
        Some(d) => CMatrix {
            re: &x.re * &d.input,
            im: &x.im * &d.input,
        },
        None => x.clone(),
    };
    let (zr, zi) = complex_linear(&x, &params.w0, params.real_degenerate);
    let (a, b, hidden, logits) = match params.architecture {
        Architecture::Linear => {
            let logits = zr.clone();
            (zr, Array2::zeros((0, 0)), Array2::zeros((0, 0)), logits)
        }
        Architecture::Mgc => {
            let a = zr.mapv(f64::tanh);
            let (b, mut h) = match zi {
                Some(zi) => {
                    let b = zi.mapv(f64::tanh);
                    let h = &a * &b;
                    (b, h)
                }
                None => (Array2::zeros((0, 0)), a.clone()),
            };
            if let Some(hm) = dropout.and_then(|d| d.hidden.as_ref()) {
                h *= hm;
            }
            let logits = h.dot(&params.w1);
            (a, b, h, logits)
        }
    };
    if !logits.iter().all(|v| v.is_finite()) {
        return Err(Error::NonFinite("logits".into()));
    }
    let probs = softmax_rows(&logits);
    Ok(Cache { x, a, b, hidden, probs })
}

/// Class probabilities for every row of `X̄`. Dropout is applied only when
/// `training` is set and an RNG is supplied.
pub fn forward(
    params: &ModelParams,
    xbar: &CMatrix,
    dropout_rate: f64,
    training: bool,
    rng: Option<&mut ChaCha8Rng>,
) -> Result<Array2<f64>> {
    let masks = match (training && dropout_rate > 0.0, rng) {
        (true, Some(rng)) => Some(Dropout::draw(rng, dropout_rate, xbar.rows(), xbar.cols(), params.hidden_dim())),
        _ => None,
    };
    Ok(forward_cached(params, xbar, masks.as_ref())?.probs)
}

/// Which weights the L2 penalty covers.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum L2Scope {
    #[default]
    FirstLayer,
    AllLayers,
}

fn l2_penalty(params: &ModelParams, scope: L2Scope) -> f64 {
    let sq = |m: &Array2<f64>| m.iter().map(|v| v * v).sum::<f64>();
    let mut s = sq(&params.w0.re) + sq(&params.w0.im);
    if scope == L2Scope::AllLayers {
        s += sq(&params.w1);
    }
    s
}

fn mean_cross_entropy(probs: &Array2<f64>, y: &[usize]) -> f64 {
    let total: f64 = y.iter().enumerate().map(|(i, &c)| -probs[(i, c)].max(f64::MIN_POSITIVE).ln()).sum();
    total / y.len() as f64
}

fn gather(x: &CMatrix, rows: &[usize]) -> CMatrix {
    CMatrix {
        re: x.re.select(Axis(0), rows),
        im: x.im.select(Axis(0), rows),
    }
}

fn masked_rows(mask: &[bool]) -> Vec<usize> {
    mask.iter().enumerate().filter_map(|(i, &m)| m.then_some(i)).collect()
}

fn check_labels(y: &[usize], classes: usize) -> Result<()> {
    match y.iter().find(|&&c| c >= classes) {
        Some(&c) => Err(Error::IndexOutOfRange { index: c, n: classes }),
        None => Ok(()),
    }
}

/// Loss and exact gradients on pre-gathered rows.
fn loss_and_grads_rows(
    params: &ModelParams,
    x: &CMatrix,
    y: &[usize],
    l2: f64,
    scope: L2Scope,
    dropout: Option<&Dropout>,
) -> Result<(f64, ModelParams)> {
    if y.is_empty() {
        return Err(Error::EmptyMask);
    }
    check_labels(y, params.num_classes())?;
    let cache = forward_cached(params, x, dropout)?;
    let m = y.len() as f64;
    let loss = mean_cross_entropy(&cache.probs, y) + l2 * l2_penalty(params, scope);

    let mut dlogits = cache.probs.clone();
    for (i, &c) in y.iter().enumerate() {
        dlogits[(i, c)] -= 1.0;
    }
    dlogits.mapv_inplace(|v| v / m);

    let mut grads = params.zeros_like();
    // Gradients with respect to Re Z and Im Z.
    let (dzr, dzi) = match params.architecture {
        Architecture::Linear => (dlogits, None),
        Architecture::Mgc => {
            grads.w1 = cache.hidden.t().dot(&dlogits);
            let mut dh = dlogits.dot(&params.w1.t());
            if let Some(hm) = dropout.and_then(|d| d.hidden.as_ref()) {
                dh *= hm;
            }
            if params.real_degenerate {
                let mut dzr = dh;
                Zip::from(&mut dzr).and(&cache.a).for_each(|g, &a| *g *= 1.0 - a * a);
                (dzr, None)
            } else {
                let mut dzr = dh.clone();
                Zip::from(&mut dzr).and(&cache.a).and(&cache.b).for_each(|g, &a, &b| *g *= b * (1.0 - a * a));
                let mut dzi = dh;
                Zip::from(&mut dzi).and(&cache.a).and(&cache.b).for_each(|g, &a, &b| *g *= a * (1.0 - b * b));
                (dzr, Some(dzi))
            }
        }
    };
    let xr_t = cache.x.re.t();
    let xi_t = cache.x.im.t();
    if params.real_degenerate {
        grads.w0.re = xr_t.dot(&dzr);
    } else {
        match dzi {
            Some(dzi) => {
                grads.w0.re = xr_t.dot(&dzr) + xi_t.dot(&dzi);
                grads.w0.im = xr_t.dot(&dzi) - xi_t.dot(&dzr);
            }
            None => {
                // Linear head: logits = Xr Wr − Xi Wi.
                grads.w0.re = xr_t.dot(&dzr);
                grads.w0.im = -xi_t.dot(&dzr);
            }
        }
    }
    grads.w0.re.scaled_add(2.0 * l2, &params.w0.re);
    if !params.real_degenerate {
        grads.w0.im.scaled_add(2.0 * l2, &params.w0.im);
    }
    if scope == L2Scope::AllLayers {
        grads.w1.scaled_add(2.0 * l2, &params.w1);
    }
    if !loss.is_finite() {
        return Err(Error::NonFinite("training loss".into()));
    }
    Ok((loss, grads))
}

/// Mean cross-entropy over `mask` plus `λ‖W0‖²`, with exact gradients (no dropout).
pub fn loss_and_grads(
    params: &ModelParams,
    xbar: &CMatrix,
    y: &[usize],
    mask: &[bool],
    l2: f64,
) -> Result<(f64, ModelParams)> {
    loss_and_grads_scoped(params, xbar, y, mask, l2, L2Scope::FirstLayer)
}

pub fn loss_and_grads_scoped(
    params: &ModelParams,
    xbar: &CMatrix,
    y: &[usize],
    mask: &[bool],
    l2: f64,
    scope: L2Scope,
) -> Result<(f64, ModelParams)> {
    if mask.len() != xbar.rows() || y.len() != xbar.rows() {
        return Err(Error::RowMismatch {
            what: "labels/mask",
            found: y.len().min(mask.len()),
            expected: xbar.rows(),
        });
    }
    let rows = masked_rows(mask);
    let yy: Vec<usize> = rows.iter().map(|&i| y[i]).collect();
    loss_and_grads_rows(params, &gather(xbar, &rows), &yy, l2, scope, None)
}

/// Index of the largest entry in each row; ties go to the lowest class index.
pub fn argmax_rows(p: &Array2<f64>) -> Vec<usize> {
    p.rows()
        .into_iter()
        .map(|row| {
            let mut best = 0;
            for (j, &v) in row.iter().enumerate() {
                if v > row[best] {
                    best = j;
                }
            }
            best
        })
        .collect()
}

fn accuracy_rows(probs: &Array2<f64>, y: &[usize]) -> f64 {
    let hits = argmax_rows(probs).iter().zip(y).filter(|(p, t)| p == t).count();
    hits as f64 / y.len() as f64
}

/// Fraction of masked nodes whose argmax prediction matches the label.
pub fn evaluate(params: &ModelParams, xbar: &CMatrix, y: &[usize], mask: &[bool]) -> Result<f64> {
    let rows = masked_rows(mask);
    if rows.is_empty() {
        return Err(Error::EmptyMask);
    }
    let yy: Vec<usize> = rows.iter().map(|&i| y[i]).collect();
    let probs = forward_cached(params, &gather(xbar, &rows), None)?.probs;
    Ok(accuracy_rows(&probs, &yy))
}

/// Adam state for every parameter block.
#[derive(Clone, Debug)]
pub struct Adam {
    pub lr: f64,
    pub step: u64,
    m: ModelParams,
    v: ModelParams,
}

impl Adam {
    pub fn new(params: &ModelParams, lr: f64) -> Self {
        Adam {
            lr,
            step: 0,
            m: params.zeros_like(),
            v: params.zeros_like(),
        }
    }

    pub fn update(&mut self, params: &mut ModelParams, grads: &ModelParams) {
        self.step += 1;
        let t = self.step as i32;
        let c1 = 1.0 - ADAM_BETA1.powi(t);
        let c2 = 1.0 - ADAM_BETA2.powi(t);
        let lr = self.lr;
        let degenerate = params.real_degenerate;
        for (idx, (((p, g), m), v)) in params
            .blocks_mut()
            .into_iter()
            .zip(grads.blocks())
            .zip(self.m.blocks_mut())
            .zip(self.v.blocks_mut())
            .enumerate()
        {
            if idx == 1 && degenerate {
                continue;
            }
            Zip::from(p).and(g).and(m).and(v).for_each(|p, &g, m, v| {
                *m = ADAM_BETA1 * *m + (1.0 - ADAM_BETA1) * g;
                *v = ADAM_BETA2 * *v + (1.0 - ADAM_BETA2) * g * g;
                *p -= lr * (*m / c1) / ((*v / c2).sqrt() + ADAM_EPS);
            });
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub architecture: Architecture,
    pub hidden: usize,
    pub lr: f64,
    pub l2: f64,
    pub l2_scope: L2Scope,
    pub dropout: f64,
    pub max_epochs: usize,
    pub patience: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            architecture: Architecture::Mgc,
            hidden: 64,
            lr: 0.01,
            l2: 1e-4,
            l2_scope: L2Scope::FirstLayer,
            dropout: 0.0,
            max_epochs: 10_000,
            patience: 50,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.architecture == Architecture::Mgc && self.hidden == 0 {
            return Err(Error::InvalidParameter("hidden dimension must be at least 1".into()));
        }
        if !(self.lr > 0.0 && self.lr.is_finite()) {
            return Err(Error::InvalidParameter(format!("learning rate {} must be positive", self.lr)));
        }
        if !(self.l2 >= 0.0 && self.l2.is_finite()) {
            return Err(Error::InvalidParameter(format!("L2 rate {} must be non-negative", self.l2)));
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return Err(Error::InvalidParameter(format!("dropout {} must lie in [0, 1)", self.dropout)));
        }
        if self.max_epochs == 0 || self.patience == 0 {
            return Err(Error::InvalidParameter("max_epochs and patience must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_loss: f64,
    pub val_acc: f64,
}

/// Early-stopping bookkeeping: best snapshot and patience counter.
#[derive(Clone, Debug)]
pub struct TrainState {
    pub adam: Adam,
    pub best: ModelParams,
    pub best_epoch: usize,
    pub best_val_acc: f64,
    pub best_val_loss: f64,
    pub bad_epochs: usize,
}

impl TrainState {
    pub fn new(params: &ModelParams, lr: f64) -> Self {
        TrainState {
            adam: Adam::new(params, lr),
            best: params.clone(),
            best_epoch: 0,
            best_val_acc: f64::NEG_INFINITY,
            best_val_loss: f64::INFINITY,
            bad_epochs: 0,
        }
    }

    /// Records a validation result; returns true when the snapshot improved.
    pub fn observe(&mut self, epoch: usize, params: &ModelParams, val_acc: f64, val_loss: f64) -> bool {
        let better = val_acc > self.best_val_acc || (val_acc == self.best_val_acc && val_loss < self.best_val_loss);
        if better {
            self.best = params.clone();
            self.best_epoch = epoch;
            self.best_val_acc = val_acc;
            self.best_val_loss = val_loss;
            self.bad_epochs = 0;
        } else {
            self.bad_epochs += 1;
        }
        better
    }
}

#[derive(Clone, Debug)]
pub struct TrainOutcome {
    pub params: ModelParams,
    pub history: Vec<EpochRecord>,
    pub best_epoch: usize,
    pub best_val_acc: f64,
    pub epochs_run: usize,
}

/// Full-batch Adam with early stopping on validation accuracy.
///
/// `seed` drives both initialization and the dropout stream, so a run is
/// reproducible from `(seed, config)`.
pub fn train(
    xbar: &CMatrix,
    y: &[usize],
    train_mask: &[bool],
    val_mask: &[bool],
    num_classes: usize,
    real_degenerate: bool,
    config: &TrainConfig,
    seed: u64,
) -> Result<TrainOutcome> {
    config.validate()?;
    if y.len() != xbar.rows() || train_mask.len() != xbar.rows() || val_mask.len() != xbar.rows() {
        return Err(Error::RowMismatch {
            what: "labels/masks",
            found: y.len(),
            expected: xbar.rows(),
        });
    }
    let train_rows = masked_rows(train_mask);
    let val_rows = masked_rows(val_mask);
    if train_rows.is_empty() || val_rows.is_empty() {
        return Err(Error::EmptyMask);
    }
    let x_train = gather(xbar, &train_rows);
    let y_train: Vec<usize> = train_rows.iter().map(|&i| y[i]).collect();
    let x_val = gather(xbar, &val_rows);
    let y_val: Vec<usize> = val_rows.iter().map(|&i| y[i]).collect();
    check_labels(y, num_classes)?;

    let mut params = match config.architecture {
        Architecture::Mgc => init_weights(xbar.cols(), config.hidden, num_classes, seed, real_degenerate),
        Architecture::Linear => init_linear(xbar.cols(), num_classes, seed, real_degenerate),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(1);
    let mut state = TrainState::new(&params, config.lr);
    let mut history = Vec::new();

    for epoch in 1..=config.max_epochs {
        let masks = (config.dropout > 0.0).then(|| {
            Dropout::draw(&mut rng, config.dropout, x_train.rows(), x_train.cols(), params.hidden_dim())
        });
        let (loss, grads) = loss_and_grads_rows(&params, &x_train, &y_train, config.l2, config.l2_scope, masks.as_ref())
            .map_err(|e| match e {
                Error::NonFinite(what) => Error::NonFinite(format!("{what} at epoch {epoch}")),
                other => other,
            })?;
        state.adam.update(&mut params, &grads);
        if !params.is_finite() {
            return Err(Error::NonFinite(format!("weights at epoch {epoch}")));
        }
        let val_probs = forward_cached(&params, &x_val, None)?.probs;
        let val_acc = accuracy_rows(&val_probs, &y_val);
        let val_loss = mean_cross_entropy(&val_probs, &y_val);
        history.push(EpochRecord {
            epoch,
            train_loss: loss,
            val_acc,
        });
        state.observe(epoch, &params, val_acc, val_loss);
        if state.bad_epochs >= config.patience {
            break;
        }
    }
    Ok(TrainOutcome {
        epochs_run: history.len(),
        params: state.best,
        history,
        best_epoch: state.best_epoch,
        best_val_acc: state.best_val_acc,
    })
}

pub fn write_history_jsonl<W: std::io::Write>(mut w: W, history: &[EpochRecord]) -> Result<()> {
    for rec in history {
        serde_json::to_writer(&mut w, rec)?;
        writeln!(w)?;
    }
    Ok(())
}
