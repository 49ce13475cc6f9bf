// SPDX-License-Identifier: Apache-2.0

//! Experiment orchestration behind the command-line tool.
//!
//! Every command starts from an [`ExperimentConfig`] and writes into its `out`
//! directory: feature caches under `cache/`, per-seed records as JSONL, and CSV
//! tables. Records never contain timings, so reruns produce identical JSONL.

use std::collections::BTreeMap;
use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::cache::{cache_path, dataset_fingerprint, read_features, write_features, CacheKey};
use crate::charge::Charge;
use crate::cycles::{cycle_survey, q_candidates, CycleLimits, CycleReport, DEFAULT_MAX_CYCLES, DEFAULT_MAX_LENGTH};
use crate::dataset::{load_dataset, Dataset, DatasetFormat};
use crate::dense::CMatrix;
use crate::eigen::DEFAULT_DENSE_LIMIT;
use crate::error::{Error, Result};
use crate::filters::{gso, precompute_features, FilterKind, FilterSign, FilterSpec};
use crate::graph::Symmetrization;
use crate::homophily::{homophily_index, IsolatedNodes};
use crate::model::{evaluate, train, write_history_jsonl, Architecture, L2Scope, TrainConfig};
use crate::response::{eigenmaps, response_table, write_eigenmaps_csv, write_response_csv, ShiftOperator};
use crate::split::{split_nodes, SplitFractions};

/// Homophily at or above this value selects the low-pass filter.
pub const HOMOPHILY_THRESHOLD: f64 = 0.5;
pub const DEFAULT_K_LIST: [usize; 8] = [2, 4, 8, 16, 32, 64, 128, 256];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QSetting {
    Auto,
    Fixed(Charge),
}

impl FromStr for QSetting {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        if s.trim().eq_ignore_ascii_case("auto") {
            Ok(QSetting::Auto)
        } else {
            Ok(QSetting::Fixed(s.parse()?))
        }
    }
}

impl Serialize for QSetting {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            QSetting::Auto => s.serialize_str("auto"),
            QSetting::Fixed(q) => q.serialize(s),
        }
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum NumOrStr {
    Num(f64),
    Str(String),
}

impl<'de> Deserialize<'de> for QSetting {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let text = match NumOrStr::deserialize(d)? {
            NumOrStr::Num(v) => v.to_string(),
            NumOrStr::Str(s) => s,
        };
        text.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum SignSetting {
    #[default]
    Auto,
    Fixed(FilterSign),
}

impl FromStr for SignSetting {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        if s == "auto" {
            Ok(SignSetting::Auto)
        } else {
            Ok(SignSetting::Fixed(s.parse()?))
        }
    }
}

impl Serialize for SignSetting {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            SignSetting::Auto => s.serialize_str("auto"),
            SignSetting::Fixed(sign) => sign.serialize(s),
        }
    }
}

impl<'de> Deserialize<'de> for SignSetting {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

/// Split protocol: a named preset or explicit fractions.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Protocol {
    Citation,
    Webpage,
    Custom(SplitFractions),
}

impl Protocol {
    pub fn fractions(self) -> SplitFractions {
        match self {
            Protocol::Citation => SplitFractions::CITATION,
            Protocol::Webpage => SplitFractions::WEBPAGE,
            Protocol::Custom(f) => f,
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum ProtocolRepr {
    Named(String),
    Custom(SplitFractions),
}

impl Serialize for Protocol {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Protocol::Citation => ProtocolRepr::Named("citation".into()),
            Protocol::Webpage => ProtocolRepr::Named("webpage".into()),
            Protocol::Custom(f) => ProtocolRepr::Custom(*f),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Protocol {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        match ProtocolRepr::deserialize(d)? {
            ProtocolRepr::Named(n) => match n.as_str() {
                "citation" => Ok(Protocol::Citation),
                "webpage" => Ok(Protocol::Webpage),
                other => Err(serde::de::Error::custom(format!("unknown protocol `{other}`"))),
            },
            ProtocolRepr::Custom(f) => Ok(Protocol::Custom(f)),
        }
    }
}

fn default_seeds() -> Vec<u64> {
    (0..10).collect()
}
fn default_max_epochs() -> usize {
    10_000
}
fn default_patience() -> usize {
    50
}
fn default_true() -> bool {
    true
}
fn default_max_cycles() -> u64 {
    DEFAULT_MAX_CYCLES
}
fn default_max_cycle_length() -> usize {
    DEFAULT_MAX_LENGTH
}
fn default_max_q_candidates() -> usize {
    8
}
fn default_eigen_k() -> usize {
    4
}
fn default_dense_limit() -> usize {
    DEFAULT_DENSE_LIMIT
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub dataset: PathBuf,
    #[serde(rename = "K")]
    pub k: usize,
    pub q: QSetting,
    pub lr: f64,
    pub l2: f64,
    pub dropout: f64,
    pub hidden: usize,
    pub filter: FilterKind,
    #[serde(default)]
    pub sign: SignSetting,
    pub protocol: Protocol,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,

    /// Output directory; defaults to `runs/<dataset name>` next to the config.
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub alpha: Option<f64>,
    #[serde(default)]
    pub t: Option<f64>,
    #[serde(default = "default_max_epochs")]
    pub max_epochs: usize,
    #[serde(default = "default_patience")]
    pub patience: usize,
    #[serde(default)]
    pub architecture: Architecture,
    #[serde(default)]
    pub l2_scope: L2Scope,
    /// Row-normalize raw features (L1) before filtering.
    #[serde(default = "default_true")]
    pub normalize_features: bool,
    #[serde(default)]
    pub symmetrization: Symmetrization,
    #[serde(default)]
    pub k_list: Option<Vec<usize>>,
    /// Head used by `sweep-k`; the linear head by default.
    #[serde(default)]
    pub sweep_architecture: Option<Architecture>,
    #[serde(default = "default_max_cycles")]
    pub max_cycles: u64,
    #[serde(default = "default_max_cycle_length")]
    pub max_cycle_length: usize,
    /// Automatic charge selection tries at most this many nonzero candidates
    /// (shortest cycles first), plus `q = 0`.
    #[serde(default = "default_max_q_candidates")]
    pub max_q_candidates: usize,
    #[serde(default = "default_eigen_k")]
    pub eigen_k: usize,
    #[serde(default = "default_dense_limit")]
    pub dense_limit: usize,
}

impl ExperimentConfig {
    /// Reads a JSON config; relative `dataset` and `out` paths resolve against the
    /// config file's directory.
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|_| Error::MissingFile(path.to_path_buf()))?;
        let mut cfg: ExperimentConfig =
            serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        if cfg.dataset.is_relative() {
            cfg.dataset = base.join(&cfg.dataset);
        }
        let out = cfg.out.take().unwrap_or_else(|| PathBuf::from("runs").join(cfg.dataset_name()));
        cfg.out = Some(if out.is_relative() { base.join(out) } else { out });
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn dataset_name(&self) -> String {
        self.dataset
            .file_name()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "dataset".into())
    }

    pub fn out_dir(&self) -> PathBuf {
        self.out.clone().unwrap_or_else(|| PathBuf::from("runs").join(self.dataset_name()))
    }

    pub fn filter_spec(&self, sign: FilterSign) -> FilterSpec {
        FilterSpec {
            kind: self.filter,
            k: self.k,
            alpha: self.alpha,
            t: self.t,
            sign,
        }
    }

    pub fn train_config(&self) -> TrainConfig {
        TrainConfig {
            architecture: self.architecture,
            hidden: self.hidden,
            lr: self.lr,
            l2: self.l2,
            l2_scope: self.l2_scope,
            dropout: self.dropout,
            max_epochs: self.max_epochs,
            patience: self.patience,
        }
    }

    pub fn cycle_limits(&self) -> CycleLimits {
        CycleLimits {
            max_cycles: self.max_cycles,
            max_length: self.max_cycle_length,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.seeds.is_empty() {
            return Err(Error::Config("seed list is empty".into()));
        }
        self.filter_spec(FilterSign::LowPass)
            .validate()
            .map_err(|e| Error::Config(e.to_string()))?;
        self.train_config().validate().map_err(|e| Error::Config(e.to_string()))?;
        if let Some(ks) = &self.k_list {
            if ks.is_empty() || ks.contains(&0) {
                return Err(Error::Config("k_list must be non-empty with K ≥ 1".into()));
            }
        }
        Ok(())
    }
}

/// Everything computed once per dataset before training.
#[derive(Clone, Debug)]
pub struct Prepared {
    pub dataset: Dataset,
    pub fingerprint: u64,
    pub features: CMatrix,
    pub cycles: CycleReport,
    pub homophily: f64,
    pub sign: FilterSign,
    pub is_symmetric: bool,
}

impl Prepared {
    /// Nonzero charges from the cycle histogram, shortest cycles first.
    pub fn nonzero_candidates(&self, limit: usize) -> Vec<Charge> {
        if self.is_symmetric {
            return Vec::new();
        }
        q_candidates(&self.cycles, false).nonzero().take(limit).collect()
    }

    /// Charges tried by automatic selection: `0` followed by the nonzero candidates.
    pub fn auto_candidates(&self, limit: usize) -> Vec<Charge> {
        let mut qs = vec![Charge::ZERO];
        qs.extend(self.nonzero_candidates(limit));
        qs
    }
}

pub fn resolve_sign(setting: SignSetting, homophily: f64) -> FilterSign {
    match setting {
        SignSetting::Fixed(s) => s,
        SignSetting::Auto if homophily >= HOMOPHILY_THRESHOLD => FilterSign::LowPass,
        SignSetting::Auto => FilterSign::HighPass,
    }
}

pub fn prepare(cfg: &ExperimentConfig) -> Result<Prepared> {
    let dataset = load_dataset(&cfg.dataset, DatasetFormat::Plain)?;
    let fingerprint = dataset_fingerprint(&dataset);
    let raw = if cfg.normalize_features {
        dataset.features.row_normalized()
    } else {
        dataset.features.clone()
    };
    let cycles = cycle_survey(&dataset.graph, cfg.cycle_limits());
    let homophily = homophily_index(&dataset.graph, dataset.labels.as_slice(), IsolatedNodes::Zero)?;
    Ok(Prepared {
        is_symmetric: dataset.graph.is_symmetric(),
        sign: resolve_sign(cfg.sign, homophily),
        features: CMatrix::from_real(raw.0),
        dataset,
        fingerprint,
        cycles,
        homophily,
    })
}

/// Loads `X̄` from the cache or computes and stores it. Returns whether it was a hit.
pub fn filtered_features(
    prep: &Prepared,
    cfg: &ExperimentConfig,
    q: Charge,
    spec: &FilterSpec,
) -> Result<(CMatrix, PathBuf, bool)> {
    let key = CacheKey {
        q,
        spec: *spec,
        fingerprint: prep.fingerprint,
    };
    let dir = cfg.out_dir().join("cache");
    let path = cache_path(&dir, &key);
    if path.exists() {
        if let Ok((_, xbar)) = read_features(&path, Some(&key)) {
            return Ok((xbar, path, true));
        }
    }
    let p = gso(&prep.dataset.graph, q.value(), spec.sign, cfg.symmetrization)?;
    let mut xbar = precompute_features(&p, &prep.features, spec)?.xbar;
    if q.is_real_degenerate() {
        xbar.im.fill(0.0);
    }
    fs::create_dir_all(&dir)?;
    write_features(&path, &key, &xbar)?;
    Ok((xbar, path, false))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CacheEntry {
    pub q: Charge,
    pub path: PathBuf,
    pub hit: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PrepReport {
    pub dataset: String,
    pub nodes: usize,
    pub edges: usize,
    pub classes: usize,
    pub is_symmetric: bool,
    pub homophily: f64,
    pub sign: FilterSign,
    pub cycle_histogram: BTreeMap<usize, u64>,
    pub cycles_truncated: bool,
    pub is_acyclic: bool,
    pub q_candidates: Vec<Charge>,
    pub caches: Vec<CacheEntry>,
}

/// Charges a command will use: the fixed one, or every automatic candidate.
fn charges_for(prep: &Prepared, cfg: &ExperimentConfig) -> Vec<Charge> {
    match cfg.q {
        QSetting::Fixed(q) => vec![q],
        QSetting::Auto => prep.auto_candidates(cfg.max_q_candidates),
    }
}

pub fn cmd_prep(cfg: &ExperimentConfig) -> Result<PrepReport> {
    let prep = prepare(cfg)?;
    let spec = cfg.filter_spec(prep.sign);
    let mut caches = Vec::new();
    for q in charges_for(&prep, cfg) {
        let (_, path, hit) = filtered_features(&prep, cfg, q, &spec)?;
        caches.push(CacheEntry { q, path, hit });
    }
    let report = PrepReport {
        dataset: prep.dataset.name.clone(),
        nodes: prep.dataset.graph.node_count(),
        edges: prep.dataset.graph.edge_count(),
        classes: prep.dataset.labels.num_classes(),
        is_symmetric: prep.is_symmetric,
        homophily: prep.homophily,
        sign: prep.sign,
        cycle_histogram: prep.cycles.histogram.clone(),
        cycles_truncated: prep.cycles.truncated,
        is_acyclic: prep.cycles.is_acyclic,
        q_candidates: prep.auto_candidates(usize::MAX),
        caches,
    };
    let out = cfg.out_dir();
    fs::create_dir_all(&out)?;
    serde_json::to_writer_pretty(BufWriter::new(fs::File::create(out.join("prep.json"))?), &report)?;
    Ok(report)
}

/// One training run. Accuracies are fractions in `[0, 1]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeedRun {
    pub seed: u64,
    pub q: Charge,
    pub filter: FilterKind,
    #[serde(rename = "K")]
    pub k: usize,
    pub sign: FilterSign,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub val_acc: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub test_acc: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub best_epoch: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub epochs: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub error: Option<String>,
}

/// Trains every seed on one feature matrix. Seeds run in parallel; results keep seed order.
pub fn run_seeds(
    prep: &Prepared,
    cfg: &ExperimentConfig,
    xbar: &CMatrix,
    q: Charge,
    spec: &FilterSpec,
    train_cfg: &TrainConfig,
    history_dir: Option<&Path>,
) -> Vec<SeedRun> {
    let y = prep.dataset.labels.as_slice();
    let classes = prep.dataset.labels.num_classes();
    let fractions = cfg.protocol.fractions();
    cfg.seeds
        .par_iter()
        .map(|&seed| {
            let mut run = SeedRun {
                seed,
                q,
                filter: spec.kind,
                k: spec.k,
                sign: spec.sign,
                val_acc: None,
                test_acc: None,
                best_epoch: None,
                epochs: None,
                error: None,
            };
            let outcome = split_nodes(y, fractions, seed).and_then(|split| {
                let out = train(xbar, y, &split.train, &split.val, classes, q.is_real_degenerate(), train_cfg, seed)?;
                let test = evaluate(&out.params, xbar, y, &split.test)?;
                if let Some(dir) = history_dir {
                    let name = format!("history_q{}-{}_seed{seed}.jsonl", q.numer(), q.denom());
                    write_history_jsonl(BufWriter::new(fs::File::create(dir.join(name))?), &out.history)?;
                }
                Ok((out, test))
            });
            match outcome {
                Ok((out, test)) => {
                    run.val_acc = Some(out.best_val_acc);
                    run.test_acc = Some(test);
                    run.best_epoch = Some(out.best_epoch);
                    run.epochs = Some(out.epochs_run);
                }
                Err(e) => run.error = Some(e.to_string()),
            }
            run
        })
        .collect()
}

/// Mean and sample standard deviation of the successful runs.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub runs: usize,
    pub failed: usize,
    pub mean: f64,
    pub std: f64,
    pub min: f64,
    pub max: f64,
}

pub fn summarize(values: &[f64], failed: usize) -> Result<Summary> {
    if values.is_empty() {
        return Err(Error::AllSeedsFailed(failed));
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let std = if values.len() > 1 {
        (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    Ok(Summary {
        runs: values.len(),
        failed,
        mean,
        std,
        min: values.iter().copied().fold(f64::INFINITY, f64::min),
        max: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
    })
}

fn summarize_runs(runs: &[SeedRun], metric: impl Fn(&SeedRun) -> Option<f64>) -> Result<Summary> {
    let values: Vec<f64> = runs.iter().filter_map(&metric).collect();
    summarize(&values, runs.len() - values.len())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CandidateScore {
    pub q: Charge,
    pub mean_val_acc: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub dataset: String,
    pub q: Charge,
    pub q_auto: bool,
    pub candidates: Vec<CandidateScore>,
    pub homophily: f64,
    pub sign: FilterSign,
    pub filter: FilterKind,
    #[serde(rename = "K")]
    pub k: usize,
    pub runs: Vec<SeedRun>,
    pub test: Summary,
    pub wall_clock_secs: f64,
}

/// Trains every charge in `qs` and keeps the one with the best mean validation
/// accuracy; ties go to the smaller charge.
fn select_by_validation(
    prep: &Prepared,
    cfg: &ExperimentConfig,
    qs: &[Charge],
    spec: &FilterSpec,
    train_cfg: &TrainConfig,
    history_dir: Option<&Path>,
) -> Result<(Charge, Vec<SeedRun>, Vec<CandidateScore>)> {
    let mut best: Option<(Charge, f64, Vec<SeedRun>)> = None;
    let mut scores = Vec::new();
    let mut sorted = qs.to_vec();
    sorted.sort();
    for q in sorted {
        let (xbar, _, _) = filtered_features(prep, cfg, q, spec)?;
        let runs = run_seeds(prep, cfg, &xbar, q, spec, train_cfg, history_dir);
        let Ok(val) = summarize_runs(&runs, |r| r.val_acc) else {
            continue;
        };
        scores.push(CandidateScore {
            q,
            mean_val_acc: val.mean,
        });
        if best.as_ref().is_none_or(|(_, b, _)| val.mean > *b) {
            best = Some((q, val.mean, runs));
        }
    }
    match best {
        Some((q, _, runs)) => Ok((q, runs, scores)),
        None => Err(Error::AllSeedsFailed(cfg.seeds.len() * qs.len())),
    }
}

fn write_jsonl<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut w = BufWriter::new(fs::File::create(path)?);
    for r in rows {
        serde_json::to_writer(&mut w, r)?;
        writeln!(w)?;
    }
    w.flush()?;
    Ok(())
}

pub const RUNS_FILE: &str = "runs.jsonl";
pub const REPORT_FILE: &str = "report.json";

pub fn cmd_train(cfg: &ExperimentConfig) -> Result<RunReport> {
    let start = Instant::now();
    let prep = prepare(cfg)?;
    let spec = cfg.filter_spec(prep.sign);
    let train_cfg = cfg.train_config();
    let out = cfg.out_dir();
    let history_dir = out.join("history");
    fs::create_dir_all(&history_dir)?;
    let (q, runs, candidates) = match cfg.q {
        QSetting::Fixed(q) => {
            let (xbar, _, _) = filtered_features(&prep, cfg, q, &spec)?;
            (q, run_seeds(&prep, cfg, &xbar, q, &spec, &train_cfg, Some(&history_dir)), Vec::new())
        }
        QSetting::Auto => select_by_validation(
            &prep,
            cfg,
            &prep.auto_candidates(cfg.max_q_candidates),
            &spec,
            &train_cfg,
            Some(&history_dir),
        )?,
    };
    let test = summarize_runs(&runs, |r| r.test_acc)?;
    write_jsonl(&out.join(RUNS_FILE), &runs)?;
    let report = RunReport {
        dataset: prep.dataset.name.clone(),
        q,
        q_auto: cfg.q == QSetting::Auto,
        candidates,
        homophily: prep.homophily,
        sign: prep.sign,
        filter: spec.kind,
        k: spec.k,
        runs,
        test,
        wall_clock_secs: start.elapsed().as_secs_f64(),
    };
    serde_json::to_writer_pretty(BufWriter::new(fs::File::create(out.join(REPORT_FILE))?), &report)?;
    Ok(report)
}

pub fn read_runs(path: &Path) -> Result<Vec<SeedRun>> {
    let f = fs::File::open(path).map_err(|_| Error::MissingFile(path.to_path_buf()))?;
    let mut runs = Vec::new();
    for (i, line) in BufReader::new(f).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        runs.push(serde_json::from_str(&line).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            line: i + 1,
            msg: e.to_string(),
        })?);
    }
    Ok(runs)
}

/// Recomputes the test summary from the per-seed records of a previous `train`.
pub fn cmd_report(cfg: &ExperimentConfig) -> Result<(Vec<SeedRun>, Summary)> {
    let runs = read_runs(&cfg.out_dir().join(RUNS_FILE))?;
    let summary = summarize_runs(&runs, |r| r.test_acc)?;
    Ok((runs, summary))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub filter: FilterKind,
    #[serde(rename = "K")]
    pub k: usize,
    pub test: Summary,
    pub seconds: f64,
}

/// The charge used by commands that need a single one; `auto` falls back to 0.
fn single_charge(cfg: &ExperimentConfig) -> (Charge, Option<String>) {
    match cfg.q {
        QSetting::Fixed(q) => (q, None),
        QSetting::Auto => (Charge::ZERO, Some("q = auto is resolved to 0 for this command".into())),
    }
}

/// Accuracy of MD and LR filters for every order in `k_list`.
pub fn cmd_sweep_k(cfg: &ExperimentConfig, k_list: &[usize]) -> Result<(Vec<SweepRow>, Option<String>)> {
    if k_list.is_empty() {
        return Err(Error::Config("K list is empty".into()));
    }
    let prep = prepare(cfg)?;
    let (q, notice) = single_charge(cfg);
    let train_cfg = TrainConfig {
        architecture: cfg.sweep_architecture.unwrap_or(Architecture::Linear),
        ..cfg.train_config()
    };
    let mut rows = Vec::new();
    let mut records = Vec::new();
    for kind in [FilterKind::MarkovDiffusion, FilterKind::LinearRank] {
        for &k in k_list {
            let start = Instant::now();
            let spec = FilterSpec {
                kind,
                k,
                alpha: None,
                t: None,
                sign: prep.sign,
            };
            let (xbar, _, _) = filtered_features(&prep, cfg, q, &spec)?;
            let runs = run_seeds(&prep, cfg, &xbar, q, &spec, &train_cfg, None);
            let test = summarize_runs(&runs, |r| r.test_acc)?;
            records.extend(runs);
            rows.push(SweepRow {
                filter: kind,
                k,
                test,
                seconds: start.elapsed().as_secs_f64(),
            });
        }
    }
    let out = cfg.out_dir();
    fs::create_dir_all(&out)?;
    write_jsonl(&out.join("sweep_k.jsonl"), &records)?;
    let mut w = BufWriter::new(fs::File::create(out.join("sweep_k.csv"))?);
    writeln!(w, "filter,K,mean_acc,std_acc,runs,seconds")?;
    for r in &rows {
        let name = if r.filter == FilterKind::LinearRank { "LR" } else { "MD" };
        writeln!(w, "{name},{},{:.4},{:.4},{},{:.3}", r.k, 100.0 * r.test.mean, 100.0 * r.test.std, r.test.runs, r.seconds)?;
    }
    w.flush()?;
    Ok((rows, notice))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ablation {
    pub zero: Summary,
    pub nonzero: Option<(Charge, Summary)>,
    pub notice: Option<String>,
}

/// Paired runs at `q = 0` and at the best nonzero charge, on the same seeds.
///
/// A fixed nonzero `q` in the config is used as is; otherwise the nonzero
/// candidates compete on validation accuracy.
pub fn cmd_ablate_q(cfg: &ExperimentConfig) -> Result<Ablation> {
    let prep = prepare(cfg)?;
    let spec = cfg.filter_spec(prep.sign);
    let train_cfg = cfg.train_config();
    let (x0, _, _) = filtered_features(&prep, cfg, Charge::ZERO, &spec)?;
    let zero_runs = run_seeds(&prep, cfg, &x0, Charge::ZERO, &spec, &train_cfg, None);
    let zero = summarize_runs(&zero_runs, |r| r.test_acc)?;
    let mut records = zero_runs;

    let candidates = prep.nonzero_candidates(cfg.max_q_candidates);
    let (nonzero, notice) = if prep.is_symmetric {
        (None, Some("graph is undirected: no nonzero charge applies".to_string()))
    } else if candidates.is_empty() {
        (None, Some("graph has no directed cycles: no nonzero charge applies".to_string()))
    } else {
        let qs = match cfg.q {
            QSetting::Fixed(q) if !q.is_zero() => vec![q],
            _ => candidates,
        };
        let (q, runs, _) = select_by_validation(&prep, cfg, &qs, &spec, &train_cfg, None)?;
        let s = summarize_runs(&runs, |r| r.test_acc)?;
        records.extend(runs);
        (Some((q, s)), None)
    };
    let out = cfg.out_dir();
    fs::create_dir_all(&out)?;
    write_jsonl(&out.join("ablate_q.jsonl"), &records)?;
    let mut w = BufWriter::new(fs::File::create(out.join("ablate_q.csv"))?);
    writeln!(w, "dataset,q_zero,q_nonzero,q")?;
    let (nz, qtext) = match &nonzero {
        Some((q, s)) => (format!("{:.4}", 100.0 * s.mean), q.to_string()),
        None => (String::new(), String::new()),
    };
    writeln!(w, "{},{:.4},{nz},{qtext}", prep.dataset.name, 100.0 * zero.mean)?;
    w.flush()?;
    Ok(Ablation { zero, nonzero, notice })
}

fn charge_tag(q: Charge) -> String {
    format!("q{}-{}", q.numer(), q.denom())
}

/// Writes one frequency-response CSV per charge; returns the paths written.
pub fn cmd_spectrum(cfg: &ExperimentConfig, q: Option<Charge>) -> Result<Vec<PathBuf>> {
    let prep = prepare(cfg)?;
    let qs = match q {
        Some(q) => vec![q],
        None => charges_for(&prep, cfg),
    };
    let gso = match prep.sign {
        FilterSign::LowPass => ShiftOperator::RenormalizedAdjacency,
        FilterSign::HighPass => ShiftOperator::NegativeRenormalized,
    };
    let out = cfg.out_dir().join("spectrum");
    fs::create_dir_all(&out)?;
    let mut paths = Vec::new();
    for q in qs {
        let rows = response_table(&prep.dataset.graph, q.value(), gso, cfg.symmetrization, cfg.dense_limit)?;
        let path = out.join(format!("response_{}.csv", charge_tag(q)));
        write_response_csv(BufWriter::new(fs::File::create(&path)?), &rows)?;
        paths.push(path);
    }
    Ok(paths)
}

/// Writes the lowest `eigen_k` magnetic eigenvectors for one charge.
pub fn cmd_eigenmaps(cfg: &ExperimentConfig, q: Option<Charge>) -> Result<(PathBuf, Option<String>)> {
    let ds = load_dataset(&cfg.dataset, DatasetFormat::Plain)?;
    let (q, notice) = match q {
        Some(q) => (q, None),
        None => single_charge(cfg),
    };
    let k = cfg.eigen_k.min(ds.graph.node_count());
    let spec = eigenmaps(&ds.graph, q.value(), k, cfg.symmetrization, cfg.dense_limit)?;
    let out = cfg.out_dir().join("eigenmaps");
    fs::create_dir_all(&out)?;
    let path = out.join(format!("eigenmaps_{}.csv", charge_tag(q)));
    write_eigenmaps_csv(BufWriter::new(fs::File::create(&path)?), &spec)?;
    Ok((path, notice))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_parses_minimal_keys() {
        let text = r#"{"dataset":"data/texas","K":8,"q":"1/4","lr":0.01,"l2":1e-4,
            "dropout":0.4,"hidden":64,"filter":"linear-rank","sign":"auto","protocol":"webpage","seeds":[0,1]}"#;
        let cfg: ExperimentConfig = serde_json::from_str(text).unwrap();
        assert_eq!(cfg.q, QSetting::Fixed(Charge::QUARTER));
        assert_eq!(cfg.sign, SignSetting::Auto);
        assert_eq!(cfg.protocol, Protocol::Webpage);
        assert_eq!(cfg.max_epochs, 10_000);
        assert_eq!(cfg.patience, 50);
        cfg.validate().unwrap();
    }

    #[test]
    fn q_setting_accepts_auto_and_numbers() {
        let q: QSetting = serde_json::from_str("\"auto\"").unwrap();
        assert_eq!(q, QSetting::Auto);
        let q: QSetting = serde_json::from_str("0.2").unwrap();
        assert_eq!(q, QSetting::Fixed(Charge::new(1, 5).unwrap()));
        let q: QSetting = serde_json::from_str("0").unwrap();
        assert_eq!(q, QSetting::Fixed(Charge::ZERO));
    }

    #[test]
    fn custom_protocol() {
        let p: Protocol = serde_json::from_str(r#"{"train":0.5,"val":0.25,"test":0.25}"#).unwrap();
        assert_eq!(p.fractions().train, 0.5);
    }

    #[test]
    fn sign_rule() {
        assert_eq!(resolve_sign(SignSetting::Auto, 0.5), FilterSign::LowPass);
        assert_eq!(resolve_sign(SignSetting::Auto, 0.1), FilterSign::HighPass);
        assert_eq!(resolve_sign(SignSetting::Fixed(FilterSign::LowPass), 0.1), FilterSign::LowPass);
    }

    #[test]
    fn single_seed_has_zero_std() {
        let s = summarize(&[0.7], 0).unwrap();
        assert_eq!(s.std, 0.0);
        assert_eq!(s.mean, 0.7);
        assert!(matches!(summarize(&[], 3), Err(Error::AllSeedsFailed(3))));
    }
}
