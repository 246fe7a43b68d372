//! `lsgm experiment`: run a (rho × seed-count × replicate) grid of
//! correlated-pair matchings and append one CSV row per run. Completed
//! rows are detected on restart and skipped, so interrupted grids resume
//! where they stopped.

use crate::config::{read_toml, GeneratorConfig, MatchSettings};
use clap::Args;
use lsgm::cluster::{clustering_consistency, ResolvedCluster, ResolvedClusters};
use lsgm::graph::{apply_permutation, generate_correlated_sbm, Permutation, SbmParams};
use lsgm::pipeline::{lsgm_scored, LsgmConfig};
use lsgm::seedsel::SeedSet;
use lsgm::{Error, Result};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::HashSet;
use std::path::{Path, PathBuf};

#[derive(Args)]
pub struct ExperimentArgs {
    /// TOML file defining the experiment grid
    pub spec: PathBuf,
}

#[derive(Debug, Clone, Copy, Default, Deserialize)]
#[serde(rename_all = "kebab-case")]
enum SeedScheme {
    /// Seeds sampled uniformly over all vertices.
    #[default]
    Uniform,
    /// Seed counts split as evenly as possible across blocks, sampled
    /// within each block.
    PerBlockBalanced,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ExperimentSpec {
    id: String,
    output: PathBuf,
    replicates: usize,
    /// Edge correlation grid.
    rho: Vec<f64>,
    /// Seed count grid.
    seeds: Vec<usize>,
    #[serde(default)]
    seed_scheme: SeedScheme,
    #[serde(default)]
    rng_seed: u64,
    generator: GeneratorConfig,
    #[serde(default)]
    config: MatchSettings,
}

/// One experiment run in the results CSV. Failed runs carry the error in
/// `message` and leave the numeric fields empty.
#[derive(Debug, Serialize, Deserialize)]
pub struct ResultRow {
    pub experiment: String,
    pub replicate: usize,
    pub rho: f64,
    pub s: usize,
    pub n: usize,
    pub k: Option<usize>,
    pub d: Option<usize>,
    pub accuracy: Option<f64>,
    pub consistency: Option<f64>,
    pub embed_s: Option<f64>,
    pub procrustes_s: Option<f64>,
    pub cluster_s: Option<f64>,
    pub match_s: Option<f64>,
    pub iterations: Option<usize>,
    pub status: String,
    pub message: String,
}

pub fn run(args: &ExperimentArgs) -> Result<()> {
    let spec: ExperimentSpec = read_toml(&args.spec)?;
    if spec.replicates == 0 {
        return Err(Error::param("replicates must be at least 1"));
    }
    if spec.rho.is_empty() || spec.seeds.is_empty() {
        return Err(Error::param("rho and seeds grids must be non-empty"));
    }
    if spec.rho.iter().any(|r| !(0.0..=1.0).contains(r)) {
        return Err(Error::param("rho values must lie in [0, 1]"));
    }
    let params = spec.generator.build_params()?;
    let n = spec.generator.n();
    let mut base_config = LsgmConfig::default();
    spec.config.apply_to(&mut base_config)?;

    let done = completed_keys(&spec.output)?;
    let existed = spec.output.exists();
    let file = std::fs::OpenOptions::new()
        .create(true)
        .append(true)
        .open(&spec.output)?;
    let mut writer = csv::WriterBuilder::new()
        .has_headers(!existed)
        .from_writer(file);

    let mut ran = 0usize;
    let mut skipped = 0usize;
    for &rho in &spec.rho {
        for &s in &spec.seeds {
            for replicate in 0..spec.replicates {
                let key = (spec.id.clone(), replicate, rho.to_bits(), s);
                if done.contains(&key) {
                    skipped += 1;
                    continue;
                }
                let row = match run_one(&spec, &params, &base_config, n, rho, s, replicate) {
                    Ok(row) => row,
                    Err(e) => error_row(&spec.id, replicate, rho, s, n, &e),
                };
                writer
                    .serialize(&row)
                    .map_err(|e| Error::numerical(format!("results CSV: {e}")))?;
                writer.flush()?;
                ran += 1;
            }
        }
    }
    println!(
        "experiment {}: {ran} runs written, {skipped} already present in {}",
        spec.id,
        spec.output.display()
    );
    Ok(())
}

/// splitmix64 step; chains grid coordinates into independent run seeds.
fn mix(h: u64, v: u64) -> u64 {
    let mut z = h
        .wrapping_add(v)
        .wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[allow(clippy::too_many_arguments)]
fn run_one(
    spec: &ExperimentSpec,
    params: &SbmParams,
    base_config: &LsgmConfig,
    n: usize,
    rho: f64,
    s: usize,
    replicate: usize,
) -> Result<ResultRow> {
    if s > n {
        return Err(Error::param(format!("seed count {s} exceeds order {n}")));
    }
    let run_seed = [rho.to_bits(), s as u64, replicate as u64]
        .into_iter()
        .fold(spec.rng_seed, mix);

    let pair = generate_correlated_sbm(params, rho, run_seed)?;
    let mut rng = ChaCha8Rng::seed_from_u64(mix(run_seed, 1));
    // hide the correspondence behind a random relabeling of graph 2
    let truth = Permutation::random(n, &mut rng);
    let g2 = apply_permutation(&pair.g2, &truth)?;
    let chosen = sample_seed_vertices(spec.seed_scheme, &spec.generator.block_sizes, s, &mut rng)?;
    let seeds = SeedSet::new(chosen.into_iter().map(|u| (u, truth.apply(u))).collect())?;

    let mut config = base_config.clone();
    config.rng_seed = mix(run_seed, 2);
    let result = lsgm_scored(&pair.g1, &g2, &seeds, &config, &truth)?;

    let resolved = ResolvedClusters {
        clusters: result
            .clusters
            .iter()
            .enumerate()
            .map(|(i, c)| ResolvedCluster {
                source: i,
                members1: c.members1.clone(),
                members2: c.members2.clone(),
            })
            .collect(),
    };
    let consistency = clustering_consistency(&resolved, &truth);

    let ms = |t: f64| (t * 1000.0).round() / 1000.0;
    Ok(ResultRow {
        experiment: spec.id.clone(),
        replicate,
        rho,
        s,
        n,
        k: Some(result.k),
        d: Some(result.d),
        accuracy: result.accuracy,
        consistency: Some(consistency),
        embed_s: Some(ms(result.times.embed)),
        procrustes_s: Some(ms(result.times.procrustes)),
        cluster_s: Some(ms(result.times.cluster)),
        match_s: Some(ms(result.times.matching)),
        iterations: Some(result.total_iterations()),
        status: "ok".into(),
        message: String::new(),
    })
}

fn error_row(id: &str, replicate: usize, rho: f64, s: usize, n: usize, e: &Error) -> ResultRow {
    ResultRow {
        experiment: id.into(),
        replicate,
        rho,
        s,
        n,
        k: None,
        d: None,
        accuracy: None,
        consistency: None,
        embed_s: None,
        procrustes_s: None,
        cluster_s: None,
        match_s: None,
        iterations: None,
        status: "error".into(),
        message: e.to_string(),
    }
}

fn sample_seed_vertices(
    scheme: SeedScheme,
    block_sizes: &[usize],
    s: usize,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<usize>> {
    let n: usize = block_sizes.iter().sum();
    let mut chosen = match scheme {
        SeedScheme::Uniform => rand::seq::index::sample(rng, n, s).into_vec(),
        SeedScheme::PerBlockBalanced => {
            let nb = block_sizes.len();
            let base = s / nb;
            let extra = s % nb;
            let mut picks = Vec::with_capacity(s);
            let mut offset = 0;
            for (b, &size) in block_sizes.iter().enumerate() {
                let want = base + usize::from(b < extra);
                if want > size {
                    return Err(Error::param(format!(
                        "block {b} of size {size} cannot host {want} seeds"
                    )));
                }
                picks.extend(
                    rand::seq::index::sample(rng, size, want)
                        .into_iter()
                        .map(|i| offset + i),
                );
                offset += size;
            }
            picks
        }
    };
    chosen.sort_unstable();
    Ok(chosen)
}

/// Keys of rows already present in the output CSV; every stored row must
/// parse back into a ResultRow.
fn completed_keys(path: &Path) -> Result<HashSet<(String, usize, u64, usize)>> {
    let mut done = HashSet::new();
    if !path.exists() {
        return Ok(done);
    }
    let mut reader =
        csv::Reader::from_path(path).map_err(|e| Error::numerical(format!("results CSV: {e}")))?;
    for record in reader.deserialize::<ResultRow>() {
        let row = record.map_err(|e| {
            Error::param(format!("{}: unreadable results row: {e}", path.display()))
        })?;
        done.insert((row.experiment, row.replicate, row.rho.to_bits(), row.s));
    }
    Ok(done)
}
