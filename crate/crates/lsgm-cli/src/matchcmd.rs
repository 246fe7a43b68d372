//! `lsgm match`: load two edge lists and a seed file, run the pipeline,
//! write the matching TSV, and print a one-line summary.

use crate::config::{
    parse_budget_flag, parse_dim_flag, parse_matcher_flag, read_toml, with_path, DimFlag,
    MatchSettings,
};
use clap::Args;
use lsgm::graph::{load_edge_list, load_pairs_tsv, Permutation};
use lsgm::matching::write_matching_tsv;
use lsgm::pipeline::{lsgm, lsgm_scored, LsgmConfig, Matcher, SeedBudget};
use lsgm::seedsel::SeedSet;
use lsgm::{Error, Result};
use std::io::Write as _;
use std::path::{Path, PathBuf};

#[derive(Args)]
pub struct MatchArgs {
    pub g1: PathBuf,
    pub g2: PathBuf,
    /// TSV of seed pairs (g1_vertex <TAB> g2_vertex)
    pub seeds: PathBuf,
    /// Optional TOML with pipeline settings; flags override it
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output path for the matching TSV
    #[arg(long, default_value = "matching.tsv")]
    pub out: PathBuf,
    /// Truth bijection TSV; adds accuracy to the summary
    #[arg(long)]
    pub truth: Option<PathBuf>,
    /// Embedding dimension or "auto"
    #[arg(long, value_parser = parse_dim_flag)]
    pub d: Option<DimFlag>,
    /// Cluster count or "auto"
    #[arg(long, value_parser = parse_dim_flag)]
    pub k: Option<DimFlag>,
    #[arg(long)]
    pub max_cluster_size: Option<usize>,
    /// L2-normalize embedding rows before clustering
    #[arg(long)]
    pub spherical: bool,
    #[arg(long)]
    pub workers: Option<usize>,
    /// Per-cluster seed budget: a count, "all", or "auto"
    #[arg(long, value_parser = parse_budget_flag)]
    pub seed_budget: Option<SeedBudget>,
    /// "sgm" or "brute-force"
    #[arg(long, value_parser = parse_matcher_flag)]
    pub matcher: Option<Matcher>,
    #[arg(long)]
    pub rng_seed: Option<u64>,
    #[arg(long)]
    pub recluster_depth: Option<usize>,
    /// Allow graphs of different orders; surplus vertices go unmatched
    #[arg(long)]
    pub non_bijective: bool,
}

impl MatchArgs {
    fn build_config(&self) -> Result<LsgmConfig> {
        let mut cfg = LsgmConfig::default();
        if let Some(path) = &self.config {
            let settings: MatchSettings = read_toml(path)?;
            settings.apply_to(&mut cfg)?;
        }
        if let Some(DimFlag(d)) = self.d {
            cfg.d = d;
        }
        if let Some(DimFlag(k)) = self.k {
            cfg.k = k;
        }
        if let Some(m) = self.max_cluster_size {
            cfg.max_cluster_size = m;
        }
        if self.spherical {
            cfg.spherical = true;
        }
        if let Some(w) = self.workers {
            cfg.workers = w;
        }
        if let Some(b) = self.seed_budget {
            cfg.seed_budget = b;
        }
        if let Some(m) = self.matcher {
            cfg.matcher = m;
        }
        if let Some(s) = self.rng_seed {
            cfg.rng_seed = s;
        }
        if let Some(r) = self.recluster_depth {
            cfg.recluster_depth = r;
        }
        if self.non_bijective {
            cfg.bijective = false;
        }
        Ok(cfg)
    }
}

/// Reads a truth file of (g1_vertex, g2_vertex) lines as a total
/// bijection on `n` vertices.
fn load_truth(path: &Path, n: usize) -> Result<Permutation> {
    let pairs = with_path(load_pairs_tsv(path), path)?;
    let mut map = vec![usize::MAX; n];
    for (u, v) in pairs {
        if u >= n {
            return Err(Error::param(format!(
                "truth vertex {u} outside graph of order {n}"
            )));
        }
        if map[u] != usize::MAX {
            return Err(Error::param(format!("truth maps vertex {u} twice")));
        }
        map[u] = v;
    }
    if map.contains(&usize::MAX) {
        return Err(Error::param("truth bijection does not cover every vertex"));
    }
    Permutation::new(map)
}

pub fn run(args: &MatchArgs) -> Result<()> {
    let a = with_path(load_edge_list(&args.g1), &args.g1)?;
    let b = with_path(load_edge_list(&args.g2), &args.g2)?;
    let seeds = SeedSet::new(with_path(load_pairs_tsv(&args.seeds), &args.seeds)?)?;
    let cfg = args.build_config()?;

    let result = match &args.truth {
        Some(path) => {
            let truth = load_truth(path, a.n())?;
            lsgm_scored(&a, &b, &seeds, &cfg, &truth)?
        }
        None => lsgm(&a, &b, &seeds, &cfg)?,
    };

    let file = with_path(std::fs::File::create(&args.out).map_err(Error::from), &args.out)?;
    let mut writer = std::io::BufWriter::new(file);
    write_matching_tsv(&result.matching, &seeds, &mut writer)?;
    writer.flush()?;

    for warning in &result.warnings {
        eprintln!("warning: {warning}");
    }
    let mut summary = format!(
        "matched {} pairs across {} clusters, {} edge disagreements",
        result.matching.pairs.len(),
        result.clusters.len(),
        result.matching.objective
    );
    if let Some(acc) = result.accuracy {
        summary.push_str(&format!(", accuracy {acc:.4}"));
    }
    println!("{summary}");
    Ok(())
}
