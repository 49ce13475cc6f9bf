// SPDX-License-Identifier: Apache-2.0

//! Acceptance run: one PASS / FAIL / SKIP line per criterion.
//!
//! Criteria 6–8 need the benchmark datasets. Point `MAGNETO_DATA_DIR` at a
//! directory holding `cornell/`, `texas/`, `washington/`, `wisconsin/`,
//! `pubmed/`, `corar/` and `citeseerr/` in the plain layout; without it those
//! criteria are reported as SKIP.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use magneto::cycles::{cycle_survey, elementary_cycles, CycleLimits};
use magneto::dense::CMatrix;
use magneto::denoise::{denoise, denoise_operator_dense, DenoiseMethod};
use magneto::eigen::{hermitian_eigen, EigenOptions};
use magneto::experiment::{cmd_ablate_q, cmd_sweep_k, cmd_train, ExperimentConfig};
use magneto::filters::{
    apply_filter_dense, damping, gso, precompute_features, FilterKind, FilterSign, FilterSpec,
};
use magneto::generate::{circulant, complete_digraph, erdos_renyi, erdos_renyi_no_isolated};
use magneto::graph::{DirectedGraph, Symmetrization};
use magneto::magnetic::{magnetic_laplacian, renormalized_magnetic_adjacency, Normalization};
use magneto::model::{init_linear, init_weights, loss_and_grads_scoped, L2Scope, ModelParams};
use magneto::response::{response_table, write_response_csv, ShiftOperator};
use ndarray::Array2;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const CHARGES: [f64; 5] = [0.0, 0.2, 0.25, 1.0 / 3.0, 0.5];
const HALF_SUM: Symmetrization = Symmetrization::HalfSum;

enum Outcome {
    Pass(String),
    Fail(String),
    Skip(String),
}

fn verdict(ok: bool, detail: String) -> Outcome {
    if ok {
        Outcome::Pass(detail)
    } else {
        Outcome::Fail(detail)
    }
}

fn max_diff(a: &Array2<Complex64>, b: &Array2<Complex64>) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

fn eigenvalues(h: &Array2<Complex64>) -> Vec<f64> {
    hermitian_eigen(h, EigenOptions::values_only()).unwrap().eigenvalues
}

fn random_digraph(rng: &mut ChaCha8Rng, max_n: usize) -> DirectedGraph {
    let n = rng.random_range(2..=max_n);
    let p = rng.random_range(0.02..0.5);
    erdos_renyi_no_isolated(n, p, rng.random())
}

// 1. Structural invariants of the magnetic operators.
fn structural() -> Outcome {
    let tol = 1e-9;
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst_herm = 0.0f64;
    let mut worst_min = f64::INFINITY;
    let mut failures = Vec::new();
    for case in 0..200 {
        let g = random_digraph(&mut rng, 50);
        let ground0: Vec<f64> = [Normalization::None, Normalization::Symmetric]
            .iter()
            .map(|&nm| eigenvalues(&magnetic_laplacian(&g, 0.0, nm, HALF_SUM).unwrap().to_dense())[0])
            .collect();
        let nnz0 = renormalized_magnetic_adjacency(&g, 0.0, HALF_SUM).unwrap().nnz();
        for &q in &CHARGES {
            for (i, nm) in [Normalization::None, Normalization::Symmetric].into_iter().enumerate() {
                let l = magnetic_laplacian(&g, q, nm, HALF_SUM).unwrap();
                worst_herm = worst_herm.max(l.hermitian_deviation());
                let ev = eigenvalues(&l.to_dense());
                worst_min = worst_min.min(ev[0]);
                if ev[0] < ground0[i] - tol || ground0[i].abs() > tol {
                    failures.push(format!("case {case} q={q}: λ_q={} λ_0={}", ev[0], ground0[i]));
                }
                if (q == 0.0 || q == 0.5) && l.max_imag_abs() != 0.0 {
                    failures.push(format!("case {case} q={q}: imaginary entries"));
                }
            }
            let a = renormalized_magnetic_adjacency(&g, q, HALF_SUM).unwrap();
            if a.nnz() != nnz0 {
                failures.push(format!("case {case} q={q}: nnz {} vs {nnz0}", a.nnz()));
            }
        }
    }
    if worst_herm > tol {
        failures.push(format!("Hermitian deviation {worst_herm:e}"));
    }
    if worst_min < -tol {
        failures.push(format!("negative eigenvalue {worst_min:e}"));
    }
    verdict(
        failures.is_empty(),
        format!(
            "200 digraphs × 5 charges; max Hermitian deviation {worst_herm:.1e}, min eigenvalue {worst_min:.1e}{}",
            failures.first().map(|f| format!("; {f}")).unwrap_or_default()
        ),
    )
}

fn spec_for(kind: FilterKind, k: usize, sign: FilterSign) -> FilterSpec {
    match kind {
        FilterKind::LinearRank => FilterSpec::linear_rank(k, sign),
        FilterKind::MarkovDiffusion => FilterSpec::markov_diffusion(k, sign),
        FilterKind::Ppr => FilterSpec::ppr(k, 0.5, sign),
        FilterKind::Hkpr => FilterSpec::hkpr(k, 2.0, sign),
    }
}

// 2. Iterative precompute against dense polynomial oracles.
fn filter_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let kinds = [FilterKind::LinearRank, FilterKind::MarkovDiffusion, FilterKind::Ppr, FilterKind::Hkpr];
    let mut worst_precompute = 0.0f64;
    for case in 0..240 {
        let n = rng.random_range(2..=30);
        let g = erdos_renyi(n, rng.random_range(0.05..0.5), rng.random());
        let kind = kinds[case % 4];
        let k = rng.random_range(1..=32);
        let q = [0.0, 1.0 / 3.0, 0.5][case % 3];
        let sign = if case % 2 == 0 { FilterSign::LowPass } else { FilterSign::HighPass };
        let spec = spec_for(kind, k, sign);
        let p = gso(&g, q, sign, HALF_SUM).unwrap().to_dense();
        let x = Array2::from_shape_simple_fn((n, 4), || Complex64::new(rng.random_range(-1.0..1.0), 0.0));
        let got = precompute_features(
            &gso(&g, q, sign, HALF_SUM).unwrap(),
            &CMatrix::from_complex(&x),
            &spec,
        )
        .unwrap()
        .xbar
        .to_complex();
        let mut want = Array2::from_elem(x.raw_dim(), Complex64::new(0.0, 0.0));
        for (pw, c) in damping(&spec).unwrap() {
            let mut t = x.clone();
            for _ in 0..pw {
                t = p.dot(&t);
            }
            want.scaled_add(Complex64::new(c, 0.0), &t);
        }
        worst_precompute = worst_precompute.max(max_diff(&got, &want));
    }

    let mut worst_closed = 0.0f64;
    for k in 1..=32 {
        let p = Array2::from_shape_simple_fn((5, 5), || {
            Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        });
        let frob = p.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let p = p.mapv(|z| z * (0.5 / frob));
        let h = apply_filter_dense(&p, &FilterSpec::linear_rank(k, FilterSign::LowPass)).unwrap();
        worst_closed = worst_closed.max(max_diff(&h.sum, h.closed_form.as_ref().unwrap()));
    }

    let mut worst_mass = 0.0f64;
    for k in 1..=1024 {
        for spec in [
            FilterSpec::linear_rank(k, FilterSign::LowPass),
            FilterSpec::markov_diffusion(k, FilterSign::LowPass),
        ] {
            let s: f64 = damping(&spec).unwrap().iter().map(|c| c.1).sum();
            worst_mass = worst_mass.max((s - 1.0).abs());
        }
    }
    verdict(
        worst_precompute <= 1e-10 && worst_closed <= 1e-9 && worst_mass <= 1e-12,
        format!(
            "precompute vs dense {worst_precompute:.1e} (≤ 1e-10), LR closed form {worst_closed:.1e} (≤ 1e-9), |Σθ−1| {worst_mass:.1e} (≤ 1e-12)"
        ),
    )
}

// 3. The two closed forms of the denoiser agree.
fn denoising() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst = 0.0f64;
    for case in 0..60 {
        let g = random_digraph(&mut rng, 30);
        let q = CHARGES[case % CHARGES.len()];
        let x: Vec<Complex64> = (0..g.node_count())
            .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        for mu in [0.1, 1.0, 10.0] {
            let a = denoise_operator_dense(&g, q, mu, DenoiseMethod::PprForm, HALF_SUM).unwrap();
            let b = denoise_operator_dense(&g, q, mu, DenoiseMethod::VonNeumann, HALF_SUM).unwrap();
            worst = worst.max(max_diff(&a, &b));
            let ya = denoise(&g, q, &x, mu, DenoiseMethod::PprForm, HALF_SUM).unwrap();
            let yb = denoise(&g, q, &x, mu, DenoiseMethod::VonNeumann, HALF_SUM).unwrap();
            worst = worst.max(ya.iter().zip(&yb).map(|(u, v)| (u - v).norm()).fold(0.0, f64::max));
        }
    }
    verdict(worst <= 1e-10, format!("60 graphs, μ ∈ {{0.1, 1, 10}}; max difference {worst:.1e} (≤ 1e-10)"))
}

/// Largest relative error between analytic and central-difference gradients.
/// The denominator is floored at 1e-3 so entries that vanish do not divide by zero.
fn worst_gradient_error(params: &ModelParams, x: &CMatrix, y: &[usize], mask: &[bool], scope: L2Scope) -> f64 {
    let eps = 1e-5;
    let l2 = 1e-3;
    let (_, grads) = loss_and_grads_scoped(params, x, y, mask, l2, scope).unwrap();
    let mut worst = 0.0f64;
    let blocks: &[usize] = if params.real_degenerate { &[0, 2] } else { &[0, 1, 2] };
    for &b in blocks {
        let shape = if b == 2 { params.w1.dim() } else { params.w0.re.dim() };
        for i in 0..shape.0 {
            for j in 0..shape.1 {
                let eval = |delta: f64| {
                    let mut p = params.clone();
                    match b {
                        0 => p.w0.re[(i, j)] += delta,
                        1 => p.w0.im[(i, j)] += delta,
                        _ => p.w1[(i, j)] += delta,
                    }
                    loss_and_grads_scoped(&p, x, y, mask, l2, scope).unwrap().0
                };
                let numeric = (eval(eps) - eval(-eps)) / (2.0 * eps);
                let analytic = match b {
                    0 => grads.w0.re[(i, j)],
                    1 => grads.w0.im[(i, j)],
                    _ => grads.w1[(i, j)],
                };
                worst = worst.max((numeric - analytic).abs() / numeric.abs().max(analytic.abs()).max(1e-3));
            }
        }
    }
    worst
}

// 4. Analytic gradients against finite differences.
fn gradients() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (n, c, classes) = (8, 5, 3);
    let re = Array2::from_shape_simple_fn((n, c), || rng.random_range(-1.0..1.0));
    let im = Array2::from_shape_simple_fn((n, c), || rng.random_range(-1.0..1.0));
    let y: Vec<usize> = (0..n).map(|i| i % classes).collect();
    let mask: Vec<bool> = (0..n).map(|i| i != 3).collect();
    let complex = CMatrix { re: re.clone(), im };
    let real = CMatrix::from_real(re);
    let mut parts = Vec::new();
    let mut worst = 0.0f64;
    for scope in [L2Scope::FirstLayer, L2Scope::AllLayers] {
        for (name, params, x) in [
            ("complex", init_weights(c, 6, classes, 1, false), &complex),
            ("real-degenerate", init_weights(c, 6, classes, 2, true), &real),
            ("linear", init_linear(c, classes, 3, false), &complex),
        ] {
            let e = worst_gradient_error(&params, x, &y, &mask, scope);
            worst = worst.max(e);
            if scope == L2Scope::FirstLayer {
                parts.push(format!("{name} {e:.1e}"));
            }
        }
    }
    verdict(worst < 1e-5, format!("relative error {} (all < 1e-5; worst {worst:.1e})", parts.join(", ")))
}

fn brute_force_cycles(g: &DirectedGraph) -> BTreeMap<usize, u64> {
    fn walk(g: &DirectedGraph, start: usize, u: usize, on: &mut [bool], len: usize, out: &mut BTreeMap<usize, u64>) {
        for &v in g.out_neighbors(u) {
            if v == start && v != u {
                *out.entry(len).or_default() += 1;
            } else if v > start && !on[v] {
                on[v] = true;
                walk(g, start, v, on, len + 1, out);
                on[v] = false;
            }
        }
    }
    let n = g.node_count();
    let mut out = BTreeMap::new();
    for s in 0..n {
        let mut on = vec![false; n];
        on[s] = true;
        walk(g, s, s, &mut on, 1, &mut out);
    }
    out
}

// 5. Cycle enumeration against brute force.
fn cycles() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut mismatches = 0;
    for _ in 0..100 {
        let n = rng.random_range(1..=6);
        let p = rng.random_range(0.1..0.9);
        let edges: Vec<(usize, usize)> = (0..n)
            .flat_map(|u| (0..n).map(move |v| (u, v)))
            .filter(|_| rng.random::<f64>() < p)
            .collect();
        let g = DirectedGraph::from_edges(n, edges).unwrap();
        let oracle = brute_force_cycles(&g);
        let found = elementary_cycles(&g, CycleLimits::default());
        let survey = cycle_survey(&g, CycleLimits::default());
        if found.histogram != oracle || survey.histogram != oracle || found.truncated {
            mismatches += 1;
        }
    }
    let k3 = elementary_cycles(&complete_digraph(3), CycleLimits::default()).cycle_count();
    verdict(
        mismatches == 0 && k3 == 5,
        format!("100 random digraphs (n ≤ 6): {mismatches} mismatches; complete K3 yields {k3} cycles"),
    )
}

fn data_dir() -> Option<PathBuf> {
    std::env::var_os("MAGNETO_DATA_DIR").map(PathBuf::from)
}

fn config_for(name: &str, data: &Path, out: &Path) -> ExperimentConfig {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(format!("{name}.json"));
    let mut cfg = ExperimentConfig::from_path(&path).expect("bundled config parses");
    cfg.dataset = data.join(name);
    cfg.out = Some(out.join(name));
    cfg
}

fn missing(data: &Path, names: &[&str]) -> Vec<String> {
    names
        .iter()
        .filter(|n| !data.join(n).join("features.csv").exists())
        .map(|n| n.to_string())
        .collect()
}

// 6. Webpage networks: accuracy and the direction ablation.
fn webpage(data: &Path, out: &Path) -> Outcome {
    let targets = [("cornell", 79.49), ("texas", 84.21), ("washington", 83.70), ("wisconsin", 83.02)];
    let names: Vec<&str> = targets.iter().map(|t| t.0).collect();
    let gone = missing(data, &names);
    if !gone.is_empty() {
        return Outcome::Skip(format!("datasets not found under {}: {}", data.display(), gone.join(", ")));
    }
    let mut ok = true;
    let mut parts = Vec::new();
    for (name, target) in targets {
        let cfg = config_for(name, data, out);
        let acc = match cmd_train(&cfg) {
            Ok(r) => 100.0 * r.test.mean,
            Err(e) => return Outcome::Fail(format!("{name}: {e}")),
        };
        let ab = match cmd_ablate_q(&cfg) {
            Ok(a) => a,
            Err(e) => return Outcome::Fail(format!("{name} ablation: {e}")),
        };
        let zero = 100.0 * ab.zero.mean;
        let nonzero = ab.nonzero.as_ref().map(|(_, s)| 100.0 * s.mean);
        let within = (acc - target).abs() <= 5.0;
        let ordered = nonzero.is_some_and(|nz| nz > zero);
        ok &= within && ordered;
        parts.push(format!(
            "{name} {acc:.2} (target {target} ± 5.0) q=0 {zero:.2} vs q≠0 {}",
            nonzero.map(|v| format!("{v:.2}")).unwrap_or_else(|| "n/a".into())
        ));
    }
    verdict(ok, parts.join("; "))
}

// 7. Citation networks.
fn citation(data: &Path, out: &Path) -> Outcome {
    if !missing(data, &["pubmed"]).is_empty() {
        return Outcome::Skip(format!("pubmed not found under {}", data.display()));
    }
    let mut ok = true;
    let mut parts = Vec::new();
    for (name, target, band) in [("pubmed", 85.51, 2.0), ("corar", 79.83, 3.0), ("citeseerr", 68.47, 3.0)] {
        if !missing(data, &[name]).is_empty() {
            parts.push(format!("{name} not available"));
            continue;
        }
        match cmd_train(&config_for(name, data, out)) {
            Ok(r) => {
                let acc = 100.0 * r.test.mean;
                ok &= (acc - target).abs() <= band;
                parts.push(format!("{name} {acc:.2} (target {target} ± {band})"));
            }
            Err(e) => return Outcome::Fail(format!("{name}: {e}")),
        }
    }
    verdict(ok, parts.join("; "))
}

// 8. LR damping resists over-smoothing better than MD.
fn oversmoothing(data: &Path, out: &Path) -> Outcome {
    let cases = [("corar", 256), ("pubmed", 2)];
    let gone = missing(data, &["corar", "pubmed"]);
    if gone.len() == cases.len() {
        return Outcome::Skip(format!("datasets not found under {}: {}", data.display(), gone.join(", ")));
    }
    let mut ok = true;
    let mut parts = Vec::new();
    for (name, k) in cases {
        if gone.iter().any(|g| g == name) {
            parts.push(format!("{name} not available"));
            ok = false;
            continue;
        }
        let cfg = config_for(name, data, &out.join("sweep"));
        match cmd_sweep_k(&cfg, &[k]) {
            Ok((rows, _)) => {
                let acc = |kind| rows.iter().find(|r| r.filter == kind).map(|r| 100.0 * r.test.mean).unwrap_or(f64::NAN);
                let (md, lr) = (acc(FilterKind::MarkovDiffusion), acc(FilterKind::LinearRank));
                ok &= lr > md;
                parts.push(format!("{name} K={k}: LR {lr:.2} vs MD {md:.2}"));
            }
            Err(e) => return Outcome::Fail(format!("{name}: {e}")),
        }
    }
    verdict(ok, parts.join("; "))
}

// 9. Approximate frequency response is exact on regular graphs.
fn frequency_response() -> Outcome {
    let mut worst = 0.0f64;
    for g in [circulant(9, &[1, 3]), circulant(12, &[1, 2, 5]), circulant(16, &[1, 4, 6, 7])] {
        for &q in &CHARGES {
            for gso in [
                ShiftOperator::NormalizedAdjacency,
                ShiftOperator::RenormalizedAdjacency,
                ShiftOperator::NegativeRenormalized,
            ] {
                for row in response_table(&g, q, gso, HALF_SUM, 4000).unwrap() {
                    worst = worst.max((row.response_exact - row.response_approx).abs());
                }
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut exported = 0;
    let mut finite = true;
    for _ in 0..10 {
        let g = random_digraph(&mut rng, 40);
        let rows = response_table(&g, 0.25, ShiftOperator::RenormalizedAdjacency, HALF_SUM, 4000).unwrap();
        let mut buf = Vec::new();
        write_response_csv(&mut buf, &rows).unwrap();
        finite &= rows.iter().all(|r| r.eigenvalue.is_finite() && r.response_exact.is_finite() && r.response_approx.is_finite());
        exported += usize::from(String::from_utf8(buf).unwrap().lines().count() == rows.len() + 1);
    }
    verdict(
        worst <= 1e-8 && finite && exported == 10,
        format!("regular graphs: max |exact − approx| {worst:.1e} (≤ 1e-8); irregular: {exported}/10 exported, finite: {finite}"),
    )
}

fn main() {
    // `cargo test` passes harness flags such as `--nocapture`; a name filter skips the run.
    if std::env::args().skip(1).any(|a| !a.starts_with('-')) {
        return;
    }
    let data = data_dir();
    let scratch = tempfile::tempdir().expect("temporary directory");
    let gated = |f: fn(&Path, &Path) -> Outcome| match &data {
        Some(d) => f(d, scratch.path()),
        None => Outcome::Skip("MAGNETO_DATA_DIR is not set".into()),
    };
    let criteria: Vec<(&str, Box<dyn Fn() -> Outcome + '_>)> = vec![
        ("structural invariants", Box::new(structural)),
        ("filter oracle equivalence", Box::new(filter_oracle)),
        ("denoising equivalence", Box::new(denoising)),
        ("gradient checks", Box::new(gradients)),
        ("cycle enumeration", Box::new(cycles)),
        ("webpage reproduction", Box::new(|| gated(webpage))),
        ("citation reproduction", Box::new(|| gated(citation))),
        ("over-smoothing ordering", Box::new(|| gated(oversmoothing))),
        ("frequency-response exactness", Box::new(frequency_response)),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let secs = start.elapsed().as_secs_f64();
        let (tag, detail) = match outcome {
            Outcome::Pass(d) => ("PASS", d),
            Outcome::Fail(d) => {
                failed += 1;
                ("FAIL", d)
            }
            Outcome::Skip(d) => ("SKIP", d),
        };
        println!("criterion {} [{tag}] {name} ({secs:.1}s): {detail}", i + 1);
    }
    if failed > 0 {
        eprintln!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
