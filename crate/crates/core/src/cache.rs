// SPDX-License-Identifier: Apache-2.0

//! Binary files: the filtered-feature cache and model checkpoints.
//!
//! All integers and floats are little-endian. Feature caches:
//!
//! ```text
//! magic "MGXBAR01" | version u32 | n u64 | c u64 | q_num u32 | q_den u32
//! kind u8 | sign u8 | K u64 | alpha f64 | t f64 | fingerprint u64
//! n·c (re f64, im f64) pairs, row-major
//! ```
//!
//! `alpha` and `t` are NaN when unused. Checkpoints:
//!
//! ```text
//! magic "MGCKPT01" | version u32 | c_in u64 | h u64 | C u64 | flags u32 | q_num u32 | q_den u32
//! W0 real plane | W0 imaginary plane | W1, each row-major f64
//! ```

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use ndarray::Array2;

use crate::charge::Charge;
use crate::dataset::Dataset;
use crate::dense::CMatrix;
use crate::error::{Error, Result};
use crate::filters::{FilterKind, FilterSign, FilterSpec};
use crate::model::{Architecture, ModelParams};

const FEATURE_MAGIC: &[u8; 8] = b"MGXBAR01";
const CHECKPOINT_MAGIC: &[u8; 8] = b"MGCKPT01";
const VERSION: u32 = 1;

const FLAG_DEGENERATE: u32 = 1;
const FLAG_LINEAR: u32 = 2;

/// FNV-1a over the graph, features and labels; ties a cache to its input data.
pub fn dataset_fingerprint(ds: &Dataset) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    let mut feed = |bytes: &[u8]| {
        for &b in bytes {
            h ^= b as u64;
            h = h.wrapping_mul(0x0100_0000_01b3);
        }
    };
    feed(&(ds.graph.node_count() as u64).to_le_bytes());
    for (u, v) in ds.graph.edges() {
        feed(&(u as u64).to_le_bytes());
        feed(&(v as u64).to_le_bytes());
    }
    for x in ds.features.0.iter() {
        feed(&x.to_bits().to_le_bytes());
    }
    for &y in ds.labels.as_slice() {
        feed(&(y as u64).to_le_bytes());
    }
    h
}

/// Everything that determines a filtered-feature matrix.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CacheKey {
    pub q: Charge,
    pub spec: FilterSpec,
    pub fingerprint: u64,
}

impl CacheKey {
    /// A file name unique to the key, e.g. `xbar_q1-4_lr_K8_high_3f2a….bin`.
    pub fn file_name(&self) -> String {
        let kind = match self.spec.kind {
            FilterKind::LinearRank => "lr".to_string(),
            FilterKind::MarkovDiffusion => "md".to_string(),
            FilterKind::Ppr => format!("ppr{}", self.spec.alpha.unwrap_or_default()),
            FilterKind::Hkpr => format!("hkpr{}", self.spec.t.unwrap_or_default()),
        };
        let sign = match self.spec.sign {
            FilterSign::LowPass => "low",
            FilterSign::HighPass => "high",
        };
        format!(
            "xbar_q{}-{}_{}_K{}_{}_{:016x}.bin",
            self.q.numer(),
            self.q.denom(),
            kind,
            self.spec.k,
            sign,
            self.fingerprint
        )
    }
}

fn put_u32(w: &mut impl Write, v: u32) -> Result<()> {
    Ok(w.write_all(&v.to_le_bytes())?)
}

fn put_u64(w: &mut impl Write, v: u64) -> Result<()> {
    Ok(w.write_all(&v.to_le_bytes())?)
}

fn put_f64(w: &mut impl Write, v: f64) -> Result<()> {
    Ok(w.write_all(&v.to_le_bytes())?)
}

fn get<const N: usize>(r: &mut impl Read) -> Result<[u8; N]> {
    let mut b = [0u8; N];
    r.read_exact(&mut b)?;
    Ok(b)
}

fn get_u32(r: &mut impl Read) -> Result<u32> {
    Ok(u32::from_le_bytes(get(r)?))
}

fn get_u64(r: &mut impl Read) -> Result<u64> {
    Ok(u64::from_le_bytes(get(r)?))
}

fn get_f64(r: &mut impl Read) -> Result<f64> {
    Ok(f64::from_le_bytes(get(r)?))
}

fn get_usize(r: &mut impl Read) -> Result<usize> {
    usize::try_from(get_u64(r)?).map_err(|_| Error::Cache("dimension overflows usize".into()))
}

fn opt_bits(v: Option<f64>) -> u64 {
    v.unwrap_or(f64::NAN).to_bits()
}

pub fn write_features(path: &Path, key: &CacheKey, xbar: &CMatrix) -> Result<()> {
    let tmp = path.with_extension("tmp");
    {
        let mut w = BufWriter::new(File::create(&tmp)?);
        w.write_all(FEATURE_MAGIC)?;
        put_u32(&mut w, VERSION)?;
        put_u64(&mut w, xbar.rows() as u64)?;
        put_u64(&mut w, xbar.cols() as u64)?;
        put_u32(&mut w, key.q.numer())?;
        put_u32(&mut w, key.q.denom())?;
        w.write_all(&[key.spec.kind.code(), u8::from(key.spec.sign == FilterSign::HighPass)])?;
        put_u64(&mut w, key.spec.k as u64)?;
        put_f64(&mut w, key.spec.alpha.unwrap_or(f64::NAN))?;
        put_f64(&mut w, key.spec.t.unwrap_or(f64::NAN))?;
        put_u64(&mut w, key.fingerprint)?;
        for (r, i) in xbar.re.iter().zip(xbar.im.iter()) {
            put_f64(&mut w, *r)?;
            put_f64(&mut w, *i)?;
        }
        w.flush()?;
    }
    std::fs::rename(&tmp, path)?;
    Ok(())
}

/// Reads a cache, checking that its header matches `key` when one is given.
pub fn read_features(path: &Path, key: Option<&CacheKey>) -> Result<(CacheKey, CMatrix)> {
    let bad = |msg: &str| Error::Cache(format!("{}: {msg}", path.display()));
    let mut r = BufReader::new(File::open(path).map_err(|_| Error::MissingFile(path.to_path_buf()))?);
    if &get::<8>(&mut r)? != FEATURE_MAGIC {
        return Err(bad("not a feature cache"));
    }
    if get_u32(&mut r)? != VERSION {
        return Err(bad("unsupported version"));
    }
    let n = get_usize(&mut r)?;
    let c = get_usize(&mut r)?;
    let q = Charge::new(get_u32(&mut r)?, get_u32(&mut r)?).map_err(|_| bad("invalid charge"))?;
    let [kind, sign] = get::<2>(&mut r)?;
    let kind = FilterKind::from_code(kind).ok_or_else(|| bad("unknown filter kind"))?;
    let k = get_usize(&mut r)?;
    let alpha = get_f64(&mut r)?;
    let t = get_f64(&mut r)?;
    let fingerprint = get_u64(&mut r)?;
    let found = CacheKey {
        q,
        spec: FilterSpec {
            kind,
            k,
            alpha: (!alpha.is_nan()).then_some(alpha),
            t: (!t.is_nan()).then_some(t),
            sign: if sign == 1 { FilterSign::HighPass } else { FilterSign::LowPass },
        },
        fingerprint,
    };
    if let Some(want) = key {
        let same = want.q == found.q
            && want.fingerprint == found.fingerprint
            && want.spec.kind == found.spec.kind
            && want.spec.k == found.spec.k
            && want.spec.sign == found.spec.sign
            && opt_bits(want.spec.alpha) == opt_bits(found.spec.alpha)
            && opt_bits(want.spec.t) == opt_bits(found.spec.t);
        if !same {
            return Err(bad("header does not match the requested configuration"));
        }
    }
    let len = n.checked_mul(c).ok_or_else(|| bad("dimension overflow"))?;
    let mut re = Vec::with_capacity(len);
    let mut im = Vec::with_capacity(len);
    for _ in 0..len {
        re.push(get_f64(&mut r)?);
        im.push(get_f64(&mut r)?);
    }
    if r.read(&mut [0u8; 1])? != 0 {
        return Err(bad("trailing bytes"));
    }
    let shape = |v| Array2::from_shape_vec((n, c), v).map_err(|e| bad(&e.to_string()));
    Ok((found, CMatrix { re: shape(re)?, im: shape(im)? }))
}

pub fn cache_path(dir: &Path, key: &CacheKey) -> PathBuf {
    dir.join(key.file_name())
}

fn put_block(w: &mut impl Write, m: &Array2<f64>) -> Result<()> {
    for v in m.iter() {
        put_f64(w, *v)?;
    }
    Ok(())
}

fn get_block(r: &mut impl Read, rows: usize, cols: usize) -> Result<Array2<f64>> {
    let mut v = Vec::with_capacity(rows * cols);
    for _ in 0..rows * cols {
        v.push(get_f64(r)?);
    }
    Array2::from_shape_vec((rows, cols), v).map_err(|e| Error::Cache(e.to_string()))
}

pub fn write_checkpoint(path: &Path, params: &ModelParams, q: Charge) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(CHECKPOINT_MAGIC)?;
    put_u32(&mut w, VERSION)?;
    put_u64(&mut w, params.input_dim() as u64)?;
    put_u64(&mut w, params.hidden_dim() as u64)?;
    put_u64(&mut w, params.num_classes() as u64)?;
    let mut flags = 0;
    if params.real_degenerate {
        flags |= FLAG_DEGENERATE;
    }
    if params.architecture == Architecture::Linear {
        flags |= FLAG_LINEAR;
    }
    put_u32(&mut w, flags)?;
    put_u32(&mut w, q.numer())?;
    put_u32(&mut w, q.denom())?;
    put_block(&mut w, &params.w0.re)?;
    put_block(&mut w, &params.w0.im)?;
    put_block(&mut w, &params.w1)?;
    w.flush()?;
    Ok(())
}

pub fn read_checkpoint(path: &Path) -> Result<(ModelParams, Charge)> {
    let mut r = BufReader::new(File::open(path).map_err(|_| Error::MissingFile(path.to_path_buf()))?);
    if &get::<8>(&mut r)? != CHECKPOINT_MAGIC || get_u32(&mut r)? != VERSION {
        return Err(Error::Cache(format!("{}: not a checkpoint", path.display())));
    }
    let c_in = get_usize(&mut r)?;
    let h = get_usize(&mut r)?;
    let classes = get_usize(&mut r)?;
    let flags = get_u32(&mut r)?;
    let q = Charge::new(get_u32(&mut r)?, get_u32(&mut r)?)?;
    let linear = flags & FLAG_LINEAR != 0;
    let cols0 = if linear { classes } else { h };
    let re = get_block(&mut r, c_in, cols0)?;
    let im = get_block(&mut r, c_in, cols0)?;
    let w1 = if linear { Array2::zeros((0, 0)) } else { get_block(&mut r, h, classes)? };
    Ok((
        ModelParams {
            w0: CMatrix { re, im },
            w1,
            real_degenerate: flags & FLAG_DEGENERATE != 0,
            architecture: if linear { Architecture::Linear } else { Architecture::Mgc },
        },
        q,
    ))
}
