// SPDX-License-Identifier: Apache-2.0

//! On-disk datasets.
//!
//! A dataset directory holds
//!
//! ```text
//! edges.tsv      one `src<TAB>dst` pair per line, 0-based node ids
//! features.csv   n rows of c comma-separated reals
//! labels.csv     n rows, one non-negative integer class id each
//! manifest.json  optional {"n", "edges", "features", "classes"} for validation
//! ```
//!
//! Blank lines and lines starting with `#` are skipped in `edges.tsv`.

use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::DirectedGraph;

pub const EDGES_FILE: &str = "edges.tsv";
pub const FEATURES_FILE: &str = "features.csv";
pub const LABELS_FILE: &str = "labels.csv";
pub const MANIFEST_FILE: &str = "manifest.json";

/// Dense real node features, one row per node.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureMatrix(pub Array2<f64>);

impl FeatureMatrix {
    pub fn new(x: Array2<f64>) -> Result<Self> {
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("feature matrix".into()));
        }
        Ok(FeatureMatrix(x))
    }

    pub fn rows(&self) -> usize {
        self.0.nrows()
    }

    pub fn cols(&self) -> usize {
        self.0.ncols()
    }

    /// Scales each row to unit L1 norm; all-zero rows are left alone.
    pub fn row_normalized(&self) -> Self {
        let mut x = self.0.clone();
        for mut row in x.rows_mut() {
            let s: f64 = row.iter().map(|v| v.abs()).sum();
            if s > 0.0 {
                row.mapv_inplace(|v| v / s);
            }
        }
        FeatureMatrix(x)
    }
}

/// One class id per node.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Labels {
    y: Vec<usize>,
    classes: usize,
}

impl Labels {
    pub fn new(y: Vec<usize>) -> Self {
        let classes = y.iter().max().map_or(0, |&m| m + 1);
        Labels { y, classes }
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.y
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn num_classes(&self) -> usize {
        self.classes
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.classes];
        for &c in &self.y {
            counts[c] += 1;
        }
        counts
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub edges: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub features: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub classes: Option<usize>,
}

/// Layout of a dataset directory. Only the plain text layout exists today.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DatasetFormat {
    #[default]
    Plain,
}

impl FromStr for DatasetFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "plain" => Ok(DatasetFormat::Plain),
            other => Err(Error::InvalidParameter(format!("unknown dataset format `{other}`"))),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Dataset {
    pub name: String,
    pub graph: DirectedGraph,
    pub features: FeatureMatrix,
    pub labels: Labels,
}

fn open(path: &Path) -> Result<BufReader<fs::File>> {
    match fs::File::open(path) {
        Ok(f) => Ok(BufReader::new(f)),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => Err(Error::MissingFile(path.to_path_buf())),
        Err(e) => Err(e.into()),
    }
}

fn parse_err(path: &Path, line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        msg: msg.into(),
    }
}

fn read_features(path: &Path) -> Result<Array2<f64>> {
    let mut data = Vec::new();
    let mut rows = 0usize;
    let mut cols: Option<usize> = None;
    for (i, line) in open(path)?.lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let before = data.len();
        for tok in line.split(',') {
            let v: f64 = tok
                .trim()
                .parse()
                .map_err(|_| parse_err(path, i + 1, format!("bad number `{tok}`")))?;
            if !v.is_finite() {
                return Err(parse_err(path, i + 1, "non-finite feature"));
            }
            data.push(v);
        }
        let width = data.len() - before;
        match cols {
            None => cols = Some(width),
            Some(c) if c != width => {
                return Err(parse_err(path, i + 1, format!("expected {c} columns, found {width}")));
            }
            _ => {}
        }
        rows += 1;
    }
    let cols = cols.unwrap_or(0);
    Ok(Array2::from_shape_vec((rows, cols), data).expect("shape matches parsed data"))
}

fn read_labels(path: &Path) -> Result<Vec<usize>> {
    let mut y = Vec::new();
    for (i, line) in open(path)?.lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        y.push(
            line.parse()
                .map_err(|_| parse_err(path, i + 1, format!("bad label `{line}`")))?,
        );
    }
    Ok(y)
}

fn read_edges(path: &Path) -> Result<Vec<(usize, usize)>> {
    let mut edges = Vec::new();
    for (i, line) in open(path)?.lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut it = line.split_whitespace();
        let (Some(a), Some(b), None) = (it.next(), it.next(), it.next()) else {
            return Err(parse_err(path, i + 1, "expected `src<TAB>dst`"));
        };
        let a = a.parse().map_err(|_| parse_err(path, i + 1, format!("bad node id `{a}`")))?;
        let b = b.parse().map_err(|_| parse_err(path, i + 1, format!("bad node id `{b}`")))?;
        edges.push((a, b));
    }
    Ok(edges)
}

fn check(field: &'static str, expected: Option<usize>, found: usize) -> Result<()> {
    match expected {
        Some(e) if e != found => Err(Error::Manifest {
            field,
            expected: e,
            found,
        }),
        _ => Ok(()),
    }
}

/// Reads a dataset directory and validates it against its manifest, if any.
pub fn load_dataset(dir: impl AsRef<Path>, format: DatasetFormat) -> Result<Dataset> {
    let dir = dir.as_ref();
    let DatasetFormat::Plain = format;

    let x = read_features(&dir.join(FEATURES_FILE))?;
    let y = read_labels(&dir.join(LABELS_FILE))?;
    if x.nrows() != y.len() {
        return Err(Error::RowMismatch {
            what: "features.csv",
            found: x.nrows(),
            expected: y.len(),
        });
    }
    let n = y.len();
    let graph = DirectedGraph::from_edges(n, read_edges(&dir.join(EDGES_FILE))?)?;
    let labels = Labels::new(y);
    let features = FeatureMatrix::new(x)?;

    let manifest_path = dir.join(MANIFEST_FILE);
    let manifest: Manifest = if manifest_path.exists() {
        serde_json::from_reader(open(&manifest_path)?)?
    } else {
        Manifest::default()
    };
    check("n", manifest.n, n)?;
    check("edges", manifest.edges, graph.edge_count())?;
    check("features", manifest.features, features.cols())?;
    check("classes", manifest.classes, labels.num_classes())?;

    let name = manifest.name.clone().unwrap_or_else(|| {
        dir.file_name()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "dataset".into())
    });
    Ok(Dataset {
        name,
        graph,
        features,
        labels,
    })
}

/// Writes a dataset in the plain layout, including a manifest with its counts.
pub fn save_dataset(dir: impl AsRef<Path>, ds: &Dataset) -> Result<PathBuf> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir)?;
    let mut w = std::io::BufWriter::new(fs::File::create(dir.join(EDGES_FILE))?);
    for (u, v) in ds.graph.edges() {
        writeln!(w, "{u}\t{v}")?;
    }
    w.flush()?;
    let mut w = std::io::BufWriter::new(fs::File::create(dir.join(FEATURES_FILE))?);
    for row in ds.features.0.rows() {
        let line: Vec<String> = row.iter().map(|v| format!("{v}")).collect();
        writeln!(w, "{}", line.join(","))?;
    }
    w.flush()?;
    let mut w = std::io::BufWriter::new(fs::File::create(dir.join(LABELS_FILE))?);
    for c in ds.labels.as_slice() {
        writeln!(w, "{c}")?;
    }
    w.flush()?;
    let manifest = Manifest {
        name: Some(ds.name.clone()),
        n: Some(ds.graph.node_count()),
        edges: Some(ds.graph.edge_count()),
        features: Some(ds.features.cols()),
        classes: Some(ds.labels.num_classes()),
    };
    fs::write(dir.join(MANIFEST_FILE), serde_json::to_string_pretty(&manifest)?)?;
    Ok(dir.to_path_buf())
}
