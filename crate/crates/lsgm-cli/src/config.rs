//! TOML configuration surfaces shared by the subcommands, and the
//! three-layer override scheme: built-in defaults, then a config file,
//! then command-line flags.

use lsgm::pipeline::{LsgmConfig, Matcher, SeedBudget};
use lsgm::{Error, Result};
use nalgebra::DMatrix;
use serde::Deserialize;
use std::path::Path;

pub fn read_toml<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = with_path(std::fs::read_to_string(path).map_err(Error::from), path)?;
    toml::from_str(&text).map_err(|e| Error::Parse {
        path: path.display().to_string(),
        line: 0,
        msg: e.message().to_string(),
    })
}

/// Attaches the offending path to bare I/O errors, which otherwise name
/// neither file nor operation.
pub fn with_path<T>(result: Result<T>, path: &Path) -> Result<T> {
    result.map_err(|e| match e {
        Error::Io(io) => Error::Io(std::io::Error::new(
            io.kind(),
            format!("{}: {io}", path.display()),
        )),
        other => other,
    })
}

/// Block model description as it appears in config files: block sizes
/// plus either latent positions (one row per block) or a full edge
/// probability matrix.
#[derive(Debug, Clone, Deserialize)]
pub struct GeneratorConfig {
    pub block_sizes: Vec<usize>,
    #[serde(default)]
    pub latent: Option<Vec<Vec<f64>>>,
    #[serde(default)]
    pub probability_matrix: Option<Vec<Vec<f64>>>,
}

impl GeneratorConfig {
    pub fn build_params(&self) -> Result<lsgm::graph::SbmParams> {
        match (&self.latent, &self.probability_matrix) {
            (Some(rows), None) => {
                lsgm::graph::SbmParams::from_latent(self.block_sizes.clone(), to_matrix(rows)?)
            }
            (None, Some(rows)) => lsgm::graph::SbmParams::from_probability_matrix(
                self.block_sizes.clone(),
                to_matrix(rows)?,
            ),
            _ => Err(Error::param(
                "exactly one of `latent` and `probability_matrix` must be set",
            )),
        }
    }

    pub fn n(&self) -> usize {
        self.block_sizes.iter().sum()
    }
}

fn to_matrix(rows: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    let r = rows.len();
    if r == 0 {
        return Err(Error::param("matrix needs at least one row"));
    }
    let c = rows[0].len();
    if c == 0 || rows.iter().any(|row| row.len() != c) {
        return Err(Error::param("matrix rows must be nonempty and equal length"));
    }
    let flat: Vec<f64> = rows.iter().flatten().copied().collect();
    Ok(DMatrix::from_row_slice(r, c, &flat))
}

/// A value that is either a count or a keyword like "auto" or "all".
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum NumOrWord {
    Num(usize),
    Word(String),
}

impl NumOrWord {
    fn as_dimension(&self, field: &str) -> Result<Option<usize>> {
        match self {
            NumOrWord::Num(n) if *n >= 1 => Ok(Some(*n)),
            NumOrWord::Num(_) => Err(Error::param(format!("{field} must be at least 1"))),
            NumOrWord::Word(w) if w == "auto" => Ok(None),
            NumOrWord::Word(w) => Err(Error::param(format!("{field}: expected a count or \"auto\", got {w:?}"))),
        }
    }

    fn as_budget(&self) -> Result<SeedBudget> {
        match self {
            NumOrWord::Num(n) => Ok(SeedBudget::Count(*n)),
            NumOrWord::Word(w) if w == "all" => Ok(SeedBudget::All),
            NumOrWord::Word(w) if w == "auto" => Ok(SeedBudget::Auto),
            NumOrWord::Word(w) => Err(Error::param(format!(
                "seed_budget: expected a count, \"all\", or \"auto\", got {w:?}"
            ))),
        }
    }
}

pub fn parse_matcher(name: &str) -> Result<Matcher> {
    match name {
        "sgm" => Ok(Matcher::Sgm),
        "brute-force" => Ok(Matcher::BruteForce),
        other => Err(Error::param(format!(
            "matcher: expected \"sgm\" or \"brute-force\", got {other:?}"
        ))),
    }
}

/// Pipeline settings as they appear in a config file; every field is
/// optional and only set fields override the defaults.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MatchSettings {
    pub d: Option<NumOrWord>,
    pub k: Option<NumOrWord>,
    pub max_cluster_size: Option<usize>,
    pub spherical: Option<bool>,
    pub seed_budget: Option<NumOrWord>,
    pub matcher: Option<String>,
    pub workers: Option<usize>,
    pub recluster_depth: Option<usize>,
    pub rng_seed: Option<u64>,
    pub bijective: Option<bool>,
}

impl MatchSettings {
    pub fn apply_to(&self, cfg: &mut LsgmConfig) -> Result<()> {
        if let Some(d) = &self.d {
            cfg.d = d.as_dimension("d")?;
        }
        if let Some(k) = &self.k {
            cfg.k = k.as_dimension("k")?;
        }
        if let Some(m) = self.max_cluster_size {
            cfg.max_cluster_size = m;
        }
        if let Some(s) = self.spherical {
            cfg.spherical = s;
        }
        if let Some(b) = &self.seed_budget {
            cfg.seed_budget = b.as_budget()?;
        }
        if let Some(m) = &self.matcher {
            cfg.matcher = parse_matcher(m)?;
        }
        if let Some(w) = self.workers {
            cfg.workers = w;
        }
        if let Some(r) = self.recluster_depth {
            cfg.recluster_depth = r;
        }
        if let Some(s) = self.rng_seed {
            cfg.rng_seed = s;
        }
        if let Some(b) = self.bijective {
            cfg.bijective = b;
        }
        Ok(())
    }
}

/// "auto" or a count, as a command-line flag value.
#[derive(Debug, Clone, Copy)]
pub struct DimFlag(pub Option<usize>);

pub fn parse_dim_flag(s: &str) -> std::result::Result<DimFlag, String> {
    if s == "auto" {
        return Ok(DimFlag(None));
    }
    match s.parse::<usize>() {
        Ok(n) if n >= 1 => Ok(DimFlag(Some(n))),
        _ => Err(format!("expected a positive count or \"auto\", got {s:?}")),
    }
}

pub fn parse_budget_flag(s: &str) -> std::result::Result<SeedBudget, String> {
    match s {
        "all" => Ok(SeedBudget::All),
        "auto" => Ok(SeedBudget::Auto),
        _ => s
            .parse::<usize>()
            .map(SeedBudget::Count)
            .map_err(|_| format!("expected a count, \"all\", or \"auto\", got {s:?}")),
    }
}

pub fn parse_matcher_flag(s: &str) -> std::result::Result<Matcher, String> {
    parse_matcher(s).map_err(|e| e.to_string())
}
