// SPDX-License-Identifier: Apache-2.0

use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use magneto::experiment::{
    cmd_ablate_q, cmd_eigenmaps, cmd_prep, cmd_report, cmd_spectrum, cmd_sweep_k, cmd_train, ExperimentConfig, QSetting,
    SignSetting, Summary, DEFAULT_K_LIST,
};
use magneto::Charge;

#[derive(Parser)]
#[command(name = "magneto", version, about = "Magnetic graph convolution experiments on directed graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// JSON experiment config.
    #[arg(long)]
    config: PathBuf,
    /// Comma-separated seeds, overriding the config.
    #[arg(long, value_delimiter = ',')]
    seed_list: Option<Vec<u64>>,
    /// Charge: `auto`, a fraction such as `1/4`, or a decimal.
    #[arg(long)]
    q: Option<String>,
    /// `auto`, `low-pass` or `high-pass`.
    #[arg(long)]
    sign: Option<String>,
    /// Output directory, overriding the config.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Detect cycles, pick the filter sign and cache filtered features.
    Prep(Common),
    /// Train over all seeds and report test accuracy.
    Train(Common),
    /// Recompute mean and standard deviation from stored per-seed records.
    Report(Common),
    /// Compare MD and LR filters over a list of orders.
    SweepK {
        #[command(flatten)]
        common: Common,
        /// Comma-separated orders; defaults to the config's `k_list` or 2..256.
        #[arg(long, value_delimiter = ',')]
        k_list: Option<Vec<usize>>,
    },
    /// Paired runs at q = 0 and the best nonzero charge.
    AblateQ(Common),
    /// Export exact and approximate frequency responses.
    Spectrum(Common),
    /// Export the lowest magnetic eigenvectors.
    Eigenmaps(Common),
}

fn load(common: &Common) -> Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::from_path(&common.config)?;
    if let Some(seeds) = &common.seed_list {
        cfg.seeds = seeds.clone();
    }
    if let Some(q) = &common.q {
        cfg.q = q.parse::<QSetting>().with_context(|| format!("invalid --q `{q}`"))?;
    }
    if let Some(sign) = &common.sign {
        cfg.sign = sign.parse::<SignSetting>().with_context(|| format!("invalid --sign `{sign}`"))?;
    }
    if let Some(out) = &common.out {
        cfg.out = Some(out.clone());
    }
    cfg.validate()?;
    Ok(cfg)
}

/// A fixed `--q` for the export commands.
fn fixed_charge(common: &Common) -> Result<Option<Charge>> {
    match common.q.as_deref().map(str::parse::<QSetting>).transpose()? {
        Some(QSetting::Fixed(q)) => Ok(Some(q)),
        _ => Ok(None),
    }
}

fn pct(s: &Summary) -> String {
    format!("{:.2} ± {:.2} (n={})", 100.0 * s.mean, 100.0 * s.std, s.runs)
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    match &cli.command {
        Command::Prep(c) => {
            let r = cmd_prep(&load(c)?)?;
            println!("dataset {}: {} nodes, {} edges, {} classes", r.dataset, r.nodes, r.edges, r.classes);
            println!("homophily {:.4} -> {:?}", r.homophily, r.sign);
            let hist: Vec<String> = r.cycle_histogram.iter().map(|(m, n)| format!("{m}:{n}")).collect();
            println!(
                "cycles [{}]{}",
                hist.join(" "),
                if r.cycles_truncated { " (truncated)" } else { "" }
            );
            let qs: Vec<String> = r.q_candidates.iter().map(ToString::to_string).collect();
            println!("q candidates {}", qs.join(" "));
            for e in &r.caches {
                println!("q={} {} {}", e.q, if e.hit { "cached" } else { "computed" }, e.path.display());
            }
        }
        Command::Train(c) => {
            let r = cmd_train(&load(c)?)?;
            for s in &r.candidates {
                println!("q={} mean val acc {:.2}", s.q, 100.0 * s.mean_val_acc);
            }
            for run in &r.runs {
                match (run.test_acc, &run.error) {
                    (Some(a), _) => println!("seed {} test acc {:.2}", run.seed, 100.0 * a),
                    (None, Some(e)) => println!("seed {} failed: {e}", run.seed),
                    _ => {}
                }
            }
            println!("{} q={} test acc {}", r.dataset, r.q, pct(&r.test));
        }
        Command::Report(c) => {
            let (runs, s) = cmd_report(&load(c)?)?;
            println!("{} records, test acc {}", runs.len(), pct(&s));
        }
        Command::SweepK { common, k_list } => {
            let cfg = load(common)?;
            let ks = k_list
                .clone()
                .or_else(|| cfg.k_list.clone())
                .unwrap_or_else(|| DEFAULT_K_LIST.to_vec());
            let (rows, notice) = cmd_sweep_k(&cfg, &ks)?;
            if let Some(n) = notice {
                println!("note: {n}");
            }
            for r in rows {
                println!("{:?} K={} {}", r.filter, r.k, pct(&r.test));
            }
        }
        Command::AblateQ(c) => {
            let a = cmd_ablate_q(&load(c)?)?;
            println!("q=0: {}", pct(&a.zero));
            match (&a.nonzero, &a.notice) {
                (Some((q, s)), _) => println!("q={q}: {}", pct(s)),
                (None, Some(n)) => println!("q≠0: (empty) {n}"),
                _ => {}
            }
        }
        Command::Spectrum(c) => {
            for p in cmd_spectrum(&load(c)?, fixed_charge(c)?)? {
                println!("{}", p.display());
            }
        }
        Command::Eigenmaps(c) => {
            let (p, notice) = cmd_eigenmaps(&load(c)?, fixed_charge(c)?)?;
            if let Some(n) = notice {
                println!("note: {n}");
            }
            println!("{}", p.display());
        }
    }
    Ok(())
}
