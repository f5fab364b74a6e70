//! JSON-backed run configuration for the ensemble verb. Unknown keys are
//! rejected; flags override file keys.

use serde::Deserialize;

use landscape_core::{DistributionSpec, Error, Result};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleFile {
    pub d: usize,
    pub k: usize,
    pub distribution: DistFile,
    pub realizations: usize,
    pub master_seed: u64,
    #[serde(default)]
    pub grid: Option<GridFile>,
    #[serde(default)]
    pub dual: bool,
    /// Dense-path cutoff for eigenvalue counting (default 4096).
    #[serde(default)]
    pub dense_limit: Option<usize>,
    #[serde(default)]
    pub tail: Option<TailFile>,
    #[serde(default)]
    pub allow_constant: bool,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, tag = "kind", rename_all = "lowercase")]
pub enum DistFile {
    Uniform { lo: f64, hi: f64 },
    Bernoulli { p: f64, height: f64 },
    Discrete { atoms: Vec<(f64, f64)> },
}

impl DistFile {
    pub fn to_spec(&self) -> DistributionSpec {
        match self {
            DistFile::Uniform { lo, hi } => DistributionSpec::Uniform { lo: *lo, hi: *hi },
            DistFile::Bernoulli { p, height } => DistributionSpec::Bernoulli {
                p: *p,
                height: *height,
            },
            DistFile::Discrete { atoms } => DistributionSpec::FiniteDiscrete {
                atoms: atoms.clone(),
            },
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridFile {
    #[serde(default)]
    pub points: Option<usize>,
    #[serde(default)]
    pub mu_min: Option<f64>,
    #[serde(default)]
    pub mu_max: Option<f64>,
    /// Explicit sorted grid; overrides the other keys.
    #[serde(default)]
    pub explicit: Option<Vec<f64>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TailFile {
    pub mu_lo: f64,
    pub mu_hi: f64,
    #[serde(default = "default_k_star")]
    pub k_star: f64,
}

fn default_k_star() -> f64 {
    1.0
}

pub fn parse_ensemble_file(text: &str) -> Result<EnsembleFile> {
    serde_json::from_str(text).map_err(|e| Error::Parse(format!("ensemble config: {e}")))
}

/// Parse a generator spec string:
/// `uniform:lo,hi` | `bernoulli:p,h` | `discrete:v:p,v:p,...`.
pub fn parse_dist(s: &str) -> Result<DistributionSpec> {
    let (kind, rest) = s
        .split_once(':')
        .ok_or_else(|| Error::Parse(format!("distribution spec {s:?} needs kind:params")))?;
    let parse_f64 = |tok: &str| -> Result<f64> {
        tok.trim()
            .parse()
            .map_err(|e| Error::Parse(format!("bad number {tok:?} in distribution spec: {e}")))
    };
    let spec = match kind {
        "uniform" => {
            let (a, b) = rest
                .split_once(',')
                .ok_or_else(|| Error::Parse("uniform needs lo,hi".into()))?;
            DistributionSpec::Uniform {
                lo: parse_f64(a)?,
                hi: parse_f64(b)?,
            }
        }
        "bernoulli" => {
            let (p, h) = rest
                .split_once(',')
                .ok_or_else(|| Error::Parse("bernoulli needs p,height".into()))?;
            DistributionSpec::Bernoulli {
                p: parse_f64(p)?,
                height: parse_f64(h)?,
            }
        }
        "discrete" => {
            let mut atoms = Vec::new();
            for pair in rest.split(',') {
                let (v, p) = pair.split_once(':').ok_or_else(|| {
                    Error::Parse(format!("discrete atom {pair:?} needs value:prob"))
                })?;
                atoms.push((parse_f64(v)?, parse_f64(p)?));
            }
            DistributionSpec::FiniteDiscrete { atoms }
        }
        other => return Err(Error::Parse(format!("unknown distribution kind {other:?}"))),
    };
    spec.validate()?;
    Ok(spec)
}
