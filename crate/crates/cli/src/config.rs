use std::path::Path;

use anyhow::{Context, Result};
use relaymatch::{
    EquilibriumConfig, ExperimentConfig, MechanismConfig, SolverConfig, TopologyConfig,
};
use serde::{Deserialize, Serialize};

/// Auction settings that sit beside `[solver]` and `[equilibrium]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MechanismSection {
    pub settle: bool,
    pub refinements: usize,
    /// Overrides the computed round cap when set.
    pub max_rounds: Option<usize>,
}

impl Default for MechanismSection {
    fn default() -> Self {
        let d = MechanismConfig::default();
        MechanismSection {
            settle: d.settle,
            refinements: d.refinements,
            max_rounds: d.max_rounds,
        }
    }
}

/// Contents of a `--config` file. Every section and key is optional.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CliConfig {
    pub topology: TopologyConfig,
    pub experiment: ExperimentConfig,
    pub solver: SolverConfig,
    pub equilibrium: EquilibriumConfig,
    pub mechanism: MechanismSection,
}

impl CliConfig {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let cfg: CliConfig = match path {
            None => CliConfig::default(),
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .with_context(|| format!("reading config {}", p.display()))?;
                toml::from_str(&text).with_context(|| format!("parsing config {}", p.display()))?
            }
        };
        cfg.topology.validate()?;
        cfg.experiment.validate()?;
        cfg.solver.validate()?;
        cfg.equilibrium.validate()?;
        Ok(cfg)
    }

    pub fn mechanism(&self, record_events: bool) -> MechanismConfig {
        MechanismConfig {
            solver: self.solver,
            equilibrium: self.equilibrium,
            max_rounds: self.mechanism.max_rounds,
            record_events,
            settle: self.mechanism.settle,
            refinements: self.mechanism.refinements,
        }
    }
}

/// The default configuration as a commented TOML file, shown in `--help`.
pub fn defaults_text() -> String {
    let body = toml::to_string(&CliConfig::default()).expect("defaults serialize");
    format!(
        "Config file (--config) defaults; unknown keys are rejected:\n\n{}\n\
         [mechanism] max_rounds is unset by default (cap derived from the offer ceilings).",
        body.trim_end()
    )
}
