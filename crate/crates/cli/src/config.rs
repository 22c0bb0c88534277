//! Experiment configuration files.

use std::fs;
use std::path::{Path, PathBuf};

use fedsubmax::continuous::{
    FedCGConfig, FedCGPlusConfig, GradientMode, Participation, PlusGradient, UplinkPayload,
};
use fedsubmax::discrete::DiscreteParams;
use fedsubmax::federated::Aggregator;
use fedsubmax::matroid::MatroidSpec;
use fedsubmax::synthetic::SyntheticSpec;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub objective: ObjectiveConfig,
    pub matroid: MatroidSpec,
    pub algorithm: AlgorithmConfig,
    #[serde(default)]
    pub seed: u64,
    /// Where metrics go; stdout when absent. Relative to the config file.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

/// Where the clients' objectives come from. Clients are weighted uniformly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ObjectiveConfig {
    /// Either a CSV of `client_id,facility_id,score` rows or an inline
    /// client-by-facility score matrix.
    Facility {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        path: Option<PathBuf>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        scores: Option<Vec<Vec<f64>>>,
    },
    /// Either a text file of `<group_id>: <client ids>` lines or inline
    /// groups. `clients` defaults to one past the largest id mentioned.
    Coverage {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        path: Option<PathBuf>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        groups: Option<Vec<Vec<usize>>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        clients: Option<usize>,
    },
    /// Generated from `generator`; `seed` defaults to the experiment seed.
    Synthetic {
        generator: SyntheticSpec,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        seed: Option<u64>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GradientSpec {
    #[default]
    Exact,
    Estimated { samples: usize },
}

impl From<GradientSpec> for GradientMode {
    fn from(g: GradientSpec) -> Self {
        match g {
            GradientSpec::Exact => GradientMode::Exact,
            GradientSpec::Estimated { samples } => GradientMode::Estimated { samples },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AggregatorSpec {
    #[default]
    Plain,
    /// Pairwise-masked fixed-point sums, keyed by the experiment seed.
    Masked,
}

impl AggregatorSpec {
    pub fn build(self, seed: u64) -> Aggregator {
        match self {
            AggregatorSpec::Plain => Aggregator::Plain,
            AggregatorSpec::Masked => Aggregator::masked(seed),
        }
    }
}

fn one() -> usize {
    1
}

fn default_delta() -> f64 {
    0.1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", deny_unknown_fields)]
pub enum AlgorithmConfig {
    #[serde(rename = "fedcg")]
    FedCG {
        rounds: usize,
        /// Defaults to `1/rounds`.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        eta: Option<f64>,
        #[serde(default = "one")]
        clients_per_round: usize,
        #[serde(default)]
        participation: Participation,
        #[serde(default)]
        payload: UplinkPayload,
        #[serde(default)]
        gradient: GradientSpec,
        #[serde(default)]
        aggregator: AggregatorSpec,
        /// Failure probability used when reporting the sampled-participation slack.
        #[serde(default = "default_delta")]
        delta: f64,
    },
    #[serde(rename = "fedcg-plus")]
    FedCGPlus {
        rounds: usize,
        tau: usize,
        /// Defaults to `tau/rounds`.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        eta: Option<f64>,
        #[serde(default = "one")]
        clients_per_round: usize,
        sigma: f64,
        delta: f64,
        #[serde(default)]
        gradient: PlusGradient,
        /// Replaces the sample count derived from `sigma` and `delta`.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        samples: Option<usize>,
        #[serde(default)]
        aggregator: AggregatorSpec,
    },
    #[serde(rename = "fed-discrete")]
    FedDiscrete {
        epsilon: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        kappa: Option<f64>,
        #[serde(default)]
        aggregator: AggregatorSpec,
    },
    #[serde(rename = "central-cg")]
    CentralCG {
        rounds: usize,
        #[serde(default)]
        gradient: GradientSpec,
    },
    #[serde(rename = "central-greedy")]
    CentralGreedy {},
    #[serde(rename = "brute")]
    Brute {},
}

impl AlgorithmConfig {
    pub fn name(&self) -> &'static str {
        match self {
            AlgorithmConfig::FedCG { .. } => "fedcg",
            AlgorithmConfig::FedCGPlus { .. } => "fedcg-plus",
            AlgorithmConfig::FedDiscrete { .. } => "fed-discrete",
            AlgorithmConfig::CentralCG { .. } => "central-cg",
            AlgorithmConfig::CentralGreedy {} => "central-greedy",
            AlgorithmConfig::Brute {} => "brute",
        }
    }

    /// The library configuration for `fedcg`, validated.
    pub fn fedcg(&self, seed: u64) -> Result<Option<FedCGConfig>> {
        let AlgorithmConfig::FedCG {
            rounds,
            eta,
            clients_per_round,
            participation,
            payload,
            gradient,
            aggregator,
            delta,
        } = *self
        else {
            return Ok(None);
        };
        if !(delta > 0.0 && delta < 1.0) {
            return Err(CliError::validation("algorithm.delta", format!("must lie in (0,1), got {delta}")));
        }
        let mut cfg = FedCGConfig::new(rounds, clients_per_round);
        if let Some(eta) = eta {
            cfg.eta = eta;
        }
        cfg.participation = participation;
        cfg.payload = payload;
        cfg.gradient = gradient.into();
        cfg.aggregator = aggregator.build(seed);
        cfg.validate().map_err(|e| CliError::scoped("algorithm", e))?;
        Ok(Some(cfg))
    }

    /// The library configuration for `fedcg-plus`, validated.
    pub fn fedcg_plus(&self, seed: u64) -> Result<Option<FedCGPlusConfig>> {
        let AlgorithmConfig::FedCGPlus {
            rounds,
            tau,
            eta,
            clients_per_round,
            sigma,
            delta,
            gradient,
            samples,
            aggregator,
        } = *self
        else {
            return Ok(None);
        };
        let mut cfg = FedCGPlusConfig::new(rounds, tau, clients_per_round, sigma, delta);
        if let Some(eta) = eta {
            cfg.eta = eta;
        }
        cfg.gradient = gradient;
        cfg.samples_override = samples;
        cfg.aggregator = aggregator.build(seed);
        cfg.validate().map_err(|e| CliError::scoped("algorithm", e))?;
        Ok(Some(cfg))
    }

    /// The library parameters for `fed-discrete`, validated.
    pub fn discrete(&self, seed: u64) -> Result<Option<DiscreteParams>> {
        let AlgorithmConfig::FedDiscrete {
            epsilon,
            kappa,
            aggregator,
        } = *self
        else {
            return Ok(None);
        };
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(CliError::validation("algorithm.epsilon", format!("must lie in (0,1), got {epsilon}")));
        }
        if let Some(k) = kappa {
            if !(k > 0.0 && k.is_finite()) {
                return Err(CliError::validation("algorithm.kappa", format!("must be positive, got {k}")));
            }
        }
        Ok(Some(DiscreteParams {
            epsilon,
            kappa_override: kappa,
            aggregator: aggregator.build(seed),
        }))
    }

    fn validate(&self, seed: u64) -> Result<()> {
        self.fedcg(seed)?;
        self.fedcg_plus(seed)?;
        self.discrete(seed)?;
        if let AlgorithmConfig::CentralCG { rounds, gradient } = *self {
            if rounds == 0 {
                return Err(CliError::validation("algorithm.rounds", "T must be at least 1"));
            }
            if gradient == (GradientSpec::Estimated { samples: 0 }) {
                return Err(CliError::validation("algorithm.gradient.samples", "must be at least 1"));
            }
        }
        if let AlgorithmConfig::FedCG {
            gradient: GradientSpec::Estimated { samples: 0 },
            ..
        } = self
        {
            return Err(CliError::validation("algorithm.gradient.samples", "must be at least 1"));
        }
        Ok(())
    }
}

impl ExperimentConfig {
    /// Parses and validates JSON text. Relative data paths resolve against `base`.
    pub fn from_json(text: &str, origin: &Path, base: &Path) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let mut cfg: ExperimentConfig =
            serde_path_to_error::deserialize(de).map_err(|e| CliError::Parse {
                path: origin.to_path_buf(),
                field: e.path().to_string(),
                message: e.inner().to_string(),
            })?;
        cfg.resolve_paths(base);
        cfg.validate()?;
        Ok(cfg)
    }

    fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        match &mut self.objective {
            ObjectiveConfig::Facility { path: Some(p), .. }
            | ObjectiveConfig::Coverage { path: Some(p), .. } => fix(p),
            _ => {}
        }
        if let Some(p) = &mut self.output {
            fix(p);
        }
    }

    /// Checks everything that can be checked before data is loaded.
    pub fn validate(&self) -> Result<()> {
        match &self.objective {
            ObjectiveConfig::Facility { path, scores } => match (path, scores) {
                (Some(p), None) => require_file(p)?,
                (None, Some(_)) => {}
                _ => {
                    return Err(CliError::validation(
                        "objective",
                        "facility needs exactly one of `path` and `scores`",
                    ))
                }
            },
            ObjectiveConfig::Coverage { path, groups, .. } => match (path, groups) {
                (Some(p), None) => require_file(p)?,
                (None, Some(_)) => {}
                _ => {
                    return Err(CliError::validation(
                        "objective",
                        "coverage needs exactly one of `path` and `groups`",
                    ))
                }
            },
            ObjectiveConfig::Synthetic { .. } => {}
        }
        self.algorithm.validate(self.seed)
    }
}

fn require_file(path: &Path) -> Result<()> {
    fs::metadata(path).map(|_| ()).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Reads, parses and validates a config file.
pub fn load_config(path: &Path) -> Result<ExperimentConfig> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let base = path.parent().unwrap_or(Path::new("."));
    ExperimentConfig::from_json(&text, path, base)
}
