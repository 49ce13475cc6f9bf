// SPDX-License-Identifier: Apache-2.0

//! Writes a synthetic directed-flow dataset in the plain layout.
//!
//! cargo run -p magneto --example directed_flow -- <out-dir> [per_class] [seed]

fn main() -> magneto::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let Some(out) = args.first() else {
        eprintln!("usage: directed_flow <out-dir> [per_class] [seed]");
        std::process::exit(2);
    };
    let per_class = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(50);
    let seed = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(0);
    let ds = magneto::generate::directed_flow(per_class, 4, 3, 0.6, 8, seed)?;
    let dir = magneto::dataset::save_dataset(out, &ds)?;
    println!("{} nodes, {} edges -> {}", ds.graph.node_count(), ds.graph.edge_count(), dir.display());
    Ok(())
}
