//! Experiment configuration: one JSON document per run.
//!
//! Every field has a default except `d`, `m`, and `T`, so a minimal config is
//! `{"d": 8, "m": 2, "T": 10000}`. Unknown fields are rejected and validation
//! failures carry the offending field, so a config diff is the full
//! provenance of a run.

use anyhow::{bail, Context, Result};
use semiband::env::Environment;
use semiband::perturbation::{Family, PerturbationSpec};
use semiband::policy::{Estimator, LearningRate};
use serde::Deserialize;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PerturbationCfg {
    pub family: String,
    pub alpha: f64,
}

impl Default for PerturbationCfg {
    fn default() -> Self {
        Self { family: "frechet".into(), alpha: 2.0 }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum EtaCfg {
    Named(String),
    Fixed { fixed: f64 },
}

impl Default for EtaCfg {
    fn default() -> Self {
        EtaCfg::Named("theoretical".into())
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum EnvCfg {
    Bernoulli { mu: Vec<f64> },
    Csv { path: PathBuf },
    ConstantGap { good_arms: usize, gap: f64 },
    Sinusoidal { period: usize },
    Switching { cheap_arms: usize },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub d: usize,
    pub m: usize,
    #[serde(rename = "T")]
    pub horizon: usize,
    #[serde(default)]
    pub perturbation: PerturbationCfg,
    #[serde(default = "default_estimator")]
    pub estimator: String,
    #[serde(default)]
    pub eta: EtaCfg,
    #[serde(default)]
    pub environment: Option<EnvCfg>,
    #[serde(default = "default_replications")]
    pub replications: usize,
    #[serde(default)]
    pub base_seed: u64,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default = "default_budget_cap")]
    pub budget_cap: u64,
}

fn default_estimator() -> String {
    "cgr".into()
}

fn default_replications() -> usize {
    1
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

fn default_budget_cap() -> u64 {
    semiband::resample::ResamplingBudget::DEFAULT_CAP
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let cfg: ExperimentConfig = serde_json::from_str(&text)
            .with_context(|| format!("parsing config {}", path.display()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.m < 1 || self.m > self.d {
            bail!("config: need 1 <= m <= d, got m={}, d={}", self.m, self.d);
        }
        if self.horizon < 1 {
            bail!("config: T must be >= 1");
        }
        if self.replications < 1 {
            bail!("config: replications must be >= 1");
        }
        if self.budget_cap < 1 {
            bail!("config: budget_cap must be >= 1");
        }
        self.spec()?;
        self.estimator()?;
        if let EtaCfg::Named(name) = &self.eta {
            if name != "theoretical" {
                bail!("config: eta must be \"theoretical\" or {{\"fixed\": x}}, got \"{name}\"");
            }
        }
        if let EtaCfg::Fixed { fixed } = &self.eta {
            if !(fixed.is_finite() && *fixed > 0.0) {
                bail!("config: fixed eta must be finite and > 0, got {fixed}");
            }
        }
        if let Some(EnvCfg::Bernoulli { mu }) = &self.environment {
            if mu.len() != self.d {
                bail!("config: environment.mu has {} entries, expected d={}", mu.len(), self.d);
            }
        }
        Ok(())
    }

    pub fn spec(&self) -> Result<PerturbationSpec> {
        let family = match self.perturbation.family.as_str() {
            "frechet" => Family::Frechet,
            "pareto" => Family::Pareto,
            other => bail!("config: perturbation.family must be \"frechet\" or \"pareto\", got \"{other}\""),
        };
        PerturbationSpec::new(family, self.perturbation.alpha)
            .map_err(|e| anyhow::anyhow!("config: perturbation.alpha: {e}"))
    }

    pub fn estimator(&self) -> Result<Estimator> {
        match self.estimator.as_str() {
            "gr" => Ok(Estimator::Gr),
            "cgr" => Ok(Estimator::Cgr),
            other => bail!("config: estimator must be \"gr\" or \"cgr\", got \"{other}\""),
        }
    }

    pub fn learning_rate(&self) -> LearningRate {
        match &self.eta {
            EtaCfg::Named(_) => LearningRate::Theoretical,
            EtaCfg::Fixed { fixed } => LearningRate::Fixed(*fixed),
        }
    }

    /// Fresh environment instance for one replication.
    pub fn build_environment(&self) -> Result<Environment> {
        let env = match &self.environment {
            None => Environment::bernoulli(vec![0.5; self.d], self.horizon)?,
            Some(EnvCfg::Bernoulli { mu }) => Environment::bernoulli(mu.clone(), self.horizon)?,
            Some(EnvCfg::Csv { path }) => {
                let env = Environment::from_csv_path(path)?;
                if env.d() != self.d {
                    bail!(
                        "config: schedule {} has d={}, expected {}",
                        path.display(),
                        env.d(),
                        self.d
                    );
                }
                if env.horizon() < self.horizon {
                    bail!(
                        "config: schedule {} has {} rows, need T={}",
                        path.display(),
                        env.horizon(),
                        self.horizon
                    );
                }
                env
            }
            Some(EnvCfg::ConstantGap { good_arms, gap }) => {
                Environment::constant_gap(self.d, self.horizon, *good_arms, *gap)?
            }
            Some(EnvCfg::Sinusoidal { period }) => {
                Environment::sinusoidal(self.d, self.horizon, *period)?
            }
            Some(EnvCfg::Switching { cheap_arms }) => {
                Environment::switching(self.d, self.horizon, *cheap_arms)?
            }
        };
        Ok(env)
    }
}
