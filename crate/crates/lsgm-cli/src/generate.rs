//! `lsgm generate`: write a correlated pair as edge lists plus the truth
//! bijection and a default seed file.

use crate::config::{read_toml, GeneratorConfig};
use clap::Args;
use lsgm::graph::{generate_correlated_sbm, save_edge_list, save_pairs_tsv};
use lsgm::{Error, Result};
use serde::Deserialize;
use std::path::PathBuf;

#[derive(Args)]
pub struct GenerateArgs {
    /// TOML file with the block model, rho, rng_seed, and seed count
    pub config: PathBuf,
    /// Directory for g1.edges, g2.edges, truth.tsv, seeds.tsv
    #[arg(long)]
    pub out_dir: PathBuf,
}

fn default_seed_count() -> usize {
    10
}

#[derive(Deserialize)]
struct GenerateConfig {
    rng_seed: u64,
    rho: f64,
    /// How many identity seed pairs to write.
    #[serde(default = "default_seed_count")]
    seeds: usize,
    #[serde(flatten)]
    generator: GeneratorConfig,
}

pub fn run(args: &GenerateArgs) -> Result<()> {
    let cfg: GenerateConfig = read_toml(&args.config)?;
    let params = cfg.generator.build_params()?;
    let n = cfg.generator.n();
    if cfg.seeds > n {
        return Err(Error::param(format!(
            "seed count {} exceeds graph order {n}",
            cfg.seeds
        )));
    }
    let pair = generate_correlated_sbm(&params, cfg.rho, cfg.rng_seed)?;

    crate::config::with_path(
        std::fs::create_dir_all(&args.out_dir).map_err(Error::from),
        &args.out_dir,
    )?;
    save_edge_list(&pair.g1, args.out_dir.join("g1.edges"))?;
    save_edge_list(&pair.g2, args.out_dir.join("g2.edges"))?;
    let truth: Vec<(usize, usize)> = (0..n).map(|v| (v, v)).collect();
    save_pairs_tsv(&truth, args.out_dir.join("truth.tsv"))?;
    let seeds: Vec<(usize, usize)> = (0..cfg.seeds).map(|v| (v, v)).collect();
    save_pairs_tsv(&seeds, args.out_dir.join("seeds.tsv"))?;

    println!(
        "wrote n={n} pair ({} and {} edges) with {} seeds to {}",
        pair.g1.num_edges(),
        pair.g2.num_edges(),
        cfg.seeds,
        args.out_dir.display()
    );
    Ok(())
}
