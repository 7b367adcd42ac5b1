//! Experiment configuration: structured text with explicit schema versioning.
//! Unknown keys are rejected so config drift cannot silently change results.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::bounds::BoundKind;
use crate::dist::{ClaimLaw, CountLaw};
use crate::error::{Error, Result};
use crate::model::RandomSumModel;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Target {
    Normal,
    Gamma,
    Poisson,
}

impl Target {
    pub fn as_str(&self) -> &'static str {
        match self {
            Target::Normal => "normal",
            Target::Gamma => "gamma",
            Target::Poisson => "poisson",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    Csv,
    Text,
}

impl std::str::FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "text" => Ok(OutputFormat::Text),
            other => Err(Error::Config(format!("unknown format '{other}', expected csv|text"))),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum CountSpec {
    Poisson { lambda: f64 },
    Binomial { n: u64, p: f64 },
    GammaMixedPoisson { r: f64, p: f64 },
    Hypergeometric { population: u64, successes: u64, draws: u64 },
    FinitePmf { weights: BTreeMap<String, f64> },
}

impl CountSpec {
    pub fn to_law(&self) -> Result<CountLaw> {
        let law = match self {
            CountSpec::Poisson { lambda } => CountLaw::Poisson { lambda: *lambda },
            CountSpec::Binomial { n, p } => CountLaw::Binomial { n: *n, p: *p },
            CountSpec::GammaMixedPoisson { r, p } => {
                CountLaw::GammaMixedPoisson { r: *r, p: *p }
            }
            CountSpec::Hypergeometric { population, successes, draws } => {
                CountLaw::Hypergeometric {
                    population: *population,
                    successes: *successes,
                    draws: *draws,
                }
            }
            CountSpec::FinitePmf { weights } => {
                CountLaw::FinitePmf { weights: parse_keys(weights)? }
            }
        };
        law.validate()?;
        Ok(law)
    }
}

impl fmt::Display for CountSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CountSpec::Poisson { lambda } => write!(f, "poisson(lambda={lambda})"),
            CountSpec::Binomial { n, p } => write!(f, "binomial(n={n} p={p})"),
            CountSpec::GammaMixedPoisson { r, p } => {
                write!(f, "gamma_mixed_poisson(r={r} p={p})")
            }
            CountSpec::Hypergeometric { population, successes, draws } => {
                write!(f, "hypergeometric(N={population} K={successes} n={draws})")
            }
            CountSpec::FinitePmf { weights } => write!(f, "finite_pmf({} atoms)", weights.len()),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum ClaimSpec {
    Bernoulli { p: f64 },
    Rademacher,
    Constant { num: i64, #[serde(default = "one")] denom: u32 },
    FiniteIntPmf { weights: BTreeMap<String, f64> },
    FiniteLatticePmf { denom: u32, weights: BTreeMap<String, f64> },
}

fn one() -> u32 {
    1
}

impl ClaimSpec {
    pub fn to_law(&self) -> Result<ClaimLaw> {
        let law = match self {
            ClaimSpec::Bernoulli { p } => ClaimLaw::Bernoulli { p: *p },
            ClaimSpec::Rademacher => ClaimLaw::rademacher(),
            ClaimSpec::Constant { num, denom } => ClaimLaw::constant(*num, *denom),
            ClaimSpec::FiniteIntPmf { weights } => {
                ClaimLaw::FiniteIntPmf { weights: parse_keys(weights)? }
            }
            ClaimSpec::FiniteLatticePmf { denom, weights } => ClaimLaw::FiniteLatticePmf {
                denom: *denom,
                weights: parse_keys(weights)?,
            },
        };
        law.validate()?;
        Ok(law)
    }
}

impl fmt::Display for ClaimSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ClaimSpec::Bernoulli { p } => write!(f, "bernoulli(p={p})"),
            ClaimSpec::Rademacher => write!(f, "rademacher"),
            ClaimSpec::Constant { num, denom } => write!(f, "constant({num}/{denom})"),
            ClaimSpec::FiniteIntPmf { weights } => {
                write!(f, "finite_int_pmf({} atoms)", weights.len())
            }
            ClaimSpec::FiniteLatticePmf { denom, weights } => {
                write!(f, "finite_lattice_pmf({} atoms denom={denom})", weights.len())
            }
        }
    }
}

fn parse_keys<K>(weights: &BTreeMap<String, f64>) -> Result<BTreeMap<K, f64>>
where
    K: std::str::FromStr + Ord,
{
    let mut out = BTreeMap::new();
    for (k, &w) in weights {
        let key = k
            .parse::<K>()
            .map_err(|_| Error::Config(format!("invalid support point '{k}'")))?;
        out.insert(key, w);
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub count: CountSpec,
    pub claim: ClaimSpec,
    pub rho: f64,
}

impl ModelSpec {
    pub fn build(&self) -> Result<RandomSumModel> {
        RandomSumModel::new(self.count.to_law()?, self.claim.to_law()?, self.rho)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub model: ModelSpec,
    pub target: Target,
    pub bound_kind: BoundKind,
    #[serde(default = "default_mc_budget")]
    pub mc_budget: u64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_tail_eps")]
    pub tail_eps: f64,
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub format: Option<OutputFormat>,
}

fn default_mc_budget() -> u64 {
    1_000_000
}

fn default_tail_eps() -> f64 {
    1e-12
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig =
            serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::Config(format!(
                "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        if self.mc_budget == 0 {
            return Err(Error::Config("mc_budget must be positive".into()));
        }
        if !(self.tail_eps > 0.0 && self.tail_eps < 1.0) {
            return Err(Error::Config("tail_eps must lie in (0, 1)".into()));
        }
        let expected = match self.bound_kind {
            BoundKind::NormalZeroMean
            | BoundKind::NormalZeroMeanIndep
            | BoundKind::NormalPoisson
            | BoundKind::NormalCountCouplingAlt => Target::Normal,
            BoundKind::GammaStoploss => Target::Gamma,
            BoundKind::PoissonWasserstein | BoundKind::PoissonTv => Target::Poisson,
        };
        if self.target != expected {
            return Err(Error::Config(format!(
                "bound kind {} verifies against the {} target, not {}",
                self.bound_kind.as_str(),
                expected.as_str(),
                self.target.as_str()
            )));
        }
        self.model.build()?;
        Ok(())
    }
}
