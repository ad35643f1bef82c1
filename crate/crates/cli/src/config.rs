use std::path::Path;

use clap::ValueEnum;
use serde::Deserialize;
use sheafbar::geometry::ConeParams;
use sheafbar::interleaving::{SearchOptions, SearchStrategy, DEFAULT_BUDGET};
use sheafbar::PrimeField;

use crate::error::CliError;

pub const CONFIG_ENV: &str = "SHEAFBAR_CONFIG";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Human,
    Machine,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    #[default]
    Matching,
    Exhaustive,
}

/// Contents of a TOML config file; every key is optional and command-line flags win.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FileConfig {
    pub field: Option<u32>,
    pub budget: Option<u64>,
    pub strategy: Option<Strategy>,
    pub seed: Option<u64>,
    pub format: Option<Format>,
    pub theta_res_deg: Option<f64>,
    pub rank_threshold: Option<f64>,
    pub grid_step_deg: Option<f64>,
    pub hull_reach_deg: Option<f64>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        toml::from_str(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Config {
    pub field: PrimeField,
    pub budget: u64,
    pub strategy: Strategy,
    pub seed: Option<u64>,
    pub format: Format,
    pub cone: ConeParams,
}

/// Values given on the command line.
#[derive(Debug, Clone, Copy, Default)]
pub struct Overrides {
    pub field: Option<u32>,
    pub budget: Option<u64>,
    pub strategy: Option<Strategy>,
    pub seed: Option<u64>,
    pub format: Option<Format>,
}

impl Config {
    pub fn resolve(file: FileConfig, flags: Overrides) -> Result<Config, CliError> {
        let p = flags.field.or(file.field).unwrap_or(2);
        let field = PrimeField::new(p).map_err(|e| CliError::Input(e.to_string()))?;
        let budget = flags.budget.or(file.budget).unwrap_or(DEFAULT_BUDGET);
        if budget == 0 {
            return Err(CliError::Input("budget must be at least 1".into()));
        }
        let mut cone = ConeParams::default();
        if let Some(d) = file.theta_res_deg {
            cone.theta_res = d.to_radians();
        }
        if let Some(t) = file.rank_threshold {
            cone.rank_threshold = t;
        }
        if let Some(d) = file.grid_step_deg {
            cone.grid_step = d.to_radians();
        }
        if let Some(d) = file.hull_reach_deg {
            cone.hull_reach = d.to_radians();
        }
        Ok(Config {
            field,
            budget,
            strategy: flags.strategy.or(file.strategy).unwrap_or_default(),
            seed: flags.seed.or(file.seed),
            format: flags.format.or(file.format).unwrap_or_default(),
            cone,
        })
    }

    pub fn search(&self) -> SearchOptions {
        SearchOptions {
            field: self.field,
            strategy: match self.strategy {
                Strategy::Matching => SearchStrategy::Matching,
                Strategy::Exhaustive => SearchStrategy::Exhaustive { budget: self.budget },
            },
        }
    }
}
