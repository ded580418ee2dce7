//! Flat key/value run configuration shared by the CLI subcommands.
//!
//! Keys mirror the command-line flags (`max-steps`, `include-distill-cost`, ...).
//! A config file supplies defaults and flags override it.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::domain::DomainKind;
use crate::error::{Error, Result};
use crate::evolution::GaConfig;
use crate::policy::PolicyConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Switch {
    On,
    Off,
}

impl Switch {
    pub fn is_on(self) -> bool {
        self == Switch::On
    }
}

impl std::str::FromStr for Switch {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "on" => Ok(Switch::On),
            "off" => Ok(Switch::Off),
            other => Err(Error::Config(format!("expected on or off, got {other:?}"))),
        }
    }
}

/// Partially specified settings. Unset keys fall back to domain defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct RunConfig {
    pub domain: Option<DomainKind>,
    pub size: Option<usize>,
    pub fraction: Option<f64>,
    pub seed: Option<u64>,
    pub p: Option<f64>,
    pub threshold: Option<f64>,
    pub levels: Option<usize>,
    pub max_steps: Option<usize>,
    pub max_restarts: Option<usize>,
    pub include_distill_cost: Option<Switch>,
    pub out: Option<PathBuf>,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text)
    }

    /// Keys set in `over` replace ours.
    pub fn overlay(self, over: RunConfig) -> RunConfig {
        RunConfig {
            domain: over.domain.or(self.domain),
            size: over.size.or(self.size),
            fraction: over.fraction.or(self.fraction),
            seed: over.seed.or(self.seed),
            p: over.p.or(self.p),
            threshold: over.threshold.or(self.threshold),
            levels: over.levels.or(self.levels),
            max_steps: over.max_steps.or(self.max_steps),
            max_restarts: over.max_restarts.or(self.max_restarts),
            include_distill_cost: over.include_distill_cost.or(self.include_distill_cost),
            out: over.out.or(self.out),
        }
    }

    /// Fill every key and check the result.
    pub fn resolve(&self) -> Result<Resolved> {
        let domain = self.domain.unwrap_or(DomainKind::Maze);
        let ga = domain.ga_defaults();
        let policy = domain.policy_defaults();
        let size = match domain {
            DomainKind::Maze => self.size.unwrap_or(10),
            DomainKind::Platformer => {
                if let Some(s) = self.size.filter(|&s| s != crate::platformer::WIDTH) {
                    return Err(Error::Config(format!(
                        "platformer levels are {} columns wide, got size {s}",
                        crate::platformer::WIDTH
                    )));
                }
                crate::platformer::WIDTH
            }
        };
        let r = Resolved {
            domain,
            size,
            fraction: self.fraction.unwrap_or(ga.acceptable_fraction),
            seed: self.seed.unwrap_or(0),
            p: self.p.unwrap_or(policy.p),
            threshold: self.threshold.unwrap_or(ga.fitness_threshold),
            levels: self.levels.unwrap_or(10),
            max_steps: self.max_steps.unwrap_or(policy.max_steps),
            max_restarts: self.max_restarts.unwrap_or(policy.max_restarts),
            include_distill_cost: self.include_distill_cost.unwrap_or(Switch::On),
            out: self.out.clone(),
        };
        r.ga_config().validate()?;
        r.policy_config().validate()?;
        crate::domain::AnyDomain::new(domain, size)?;
        Ok(r)
    }
}

/// Fully resolved settings, written next to every run's outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct Resolved {
    pub domain: DomainKind,
    pub size: usize,
    pub fraction: f64,
    pub seed: u64,
    pub p: f64,
    pub threshold: f64,
    pub levels: usize,
    pub max_steps: usize,
    pub max_restarts: usize,
    pub include_distill_cost: Switch,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

impl Resolved {
    pub fn ga_config(&self) -> GaConfig {
        GaConfig {
            acceptable_fraction: self.fraction,
            fitness_threshold: self.threshold,
            seed: self.seed,
            ..self.domain.ga_defaults()
        }
    }

    pub fn policy_config(&self) -> PolicyConfig {
        PolicyConfig {
            p: self.p,
            max_steps: self.max_steps,
            max_restarts: self.max_restarts,
            fitness_threshold: self.threshold,
            ..self.domain.policy_defaults()
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Write `config.toml` into `dir`.
    pub fn save_into(&self, dir: &Path) -> Result<()> {
        let path = dir.join("config.toml");
        std::fs::write(&path, self.to_toml()).map_err(|e| Error::io(&path, e))
    }
}
