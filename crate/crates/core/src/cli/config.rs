//! Run configuration: a flat TOML file of `key = value` lines, with command
//! line flags layered on top. Unknown keys are rejected.
//!
//! ```toml
//! name = "width-sweep"
//! widths = [1000]            # hidden layer sizes
//! activation = "sigmoid"     # sigmoid | tanh | relu | elu | selu
//! init = "fixed_normal:0.01" # random_uniform | orthogonal[:gain] | xavier | he_normal | lecun_normal | fixed_normal[:std]
//! epochs = 10
//! batch_size = 128
//! learning_rate = 0.001
//! seeds = [0, 1, 2]
//! tau_grid = [0.5, 0.6, 0.7]
//! linkage = "avg"            # avg | single | complete
//! sweep_widths = [100, 300, 1000]
//! ```

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::analysis::validate_tau_grid;
use crate::clustering::Linkage;
use crate::error::{Error, Result};
use crate::nn::{Activation, InitScheme, TrainConfig};
use crate::similarity::ZeroPolicy;

/// Keys accepted in a config file. Every key is optional.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub name: Option<String>,
    pub learning_rate: Option<f64>,
    pub beta1: Option<f64>,
    pub beta2: Option<f64>,
    pub epsilon: Option<f64>,
    pub batch_size: Option<usize>,
    pub epochs: Option<usize>,
    pub seeds: Option<Vec<u64>>,
    pub init: Option<String>,
    pub widths: Option<Vec<usize>>,
    pub activation: Option<String>,
    pub elu_alpha: Option<f64>,
    pub tau_grid: Option<Vec<f64>>,
    pub linkage: Option<String>,
    pub zero_policy: Option<String>,
    pub include_output_layer: Option<bool>,
    pub sweep_widths: Option<Vec<usize>>,
    pub sweep_depths: Option<Vec<usize>>,
    pub sweep_activations: Option<Vec<String>>,
    pub sweep_inits: Option<Vec<String>>,
    pub data_dir: Option<PathBuf>,
    pub train_limit: Option<usize>,
    pub test_limit: Option<usize>,
    pub threads: Option<usize>,
    pub out_dir: Option<PathBuf>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    /// Fields set in `overrides` replace the ones in `self`.
    pub fn overlay(mut self, overrides: ConfigFile) -> Self {
        macro_rules! take {
            ($($f:ident),*) => { $( if overrides.$f.is_some() { self.$f = overrides.$f; } )* };
        }
        take!(
            name,
            learning_rate,
            beta1,
            beta2,
            epsilon,
            batch_size,
            epochs,
            seeds,
            init,
            widths,
            activation,
            elu_alpha,
            tau_grid,
            linkage,
            zero_policy,
            include_output_layer,
            sweep_widths,
            sweep_depths,
            sweep_activations,
            sweep_inits,
            data_dir,
            train_limit,
            test_limit,
            threads,
            out_dir
        );
        self
    }
}

/// Validated configuration for `train` and `sweep`.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub name: String,
    pub train: TrainConfig,
    pub seeds: Vec<u64>,
    pub tau_grid: Vec<f64>,
    pub linkage: Linkage,
    pub zero_policy: ZeroPolicy,
    pub include_output_layer: bool,
    pub sweep_widths: Vec<usize>,
    pub sweep_depths: Vec<usize>,
    pub sweep_activations: Vec<Activation>,
    pub sweep_inits: Vec<InitScheme>,
    pub data_dir: Option<PathBuf>,
    pub train_limit: Option<usize>,
    pub test_limit: Option<usize>,
    pub threads: usize,
    pub out_dir: Option<PathBuf>,
}

fn parse_activation(s: &str, elu_alpha: Option<f64>) -> Result<Activation> {
    let a: Activation = s.parse()?;
    match (a, elu_alpha) {
        (Activation::Elu { .. }, Some(alpha)) => Activation::Elu { alpha }.validate(),
        _ => Ok(a),
    }
}

impl RunConfig {
    pub fn from_file(file: ConfigFile) -> Result<Self> {
        let defaults = TrainConfig::default();
        let activation =
            parse_activation(file.activation.as_deref().unwrap_or("relu"), file.elu_alpha)?;
        let init: InitScheme = match &file.init {
            Some(s) => s.parse()?,
            None => defaults.init,
        };
        let seeds = file.seeds.unwrap_or_else(|| vec![0]);
        if seeds.is_empty() {
            return Err(Error::Config("seeds must not be empty".into()));
        }
        let train = TrainConfig {
            learning_rate: file.learning_rate.unwrap_or(defaults.learning_rate),
            beta1: file.beta1.unwrap_or(defaults.beta1),
            beta2: file.beta2.unwrap_or(defaults.beta2),
            epsilon: file.epsilon.unwrap_or(defaults.epsilon),
            batch_size: file.batch_size.unwrap_or(defaults.batch_size),
            epochs: file.epochs.unwrap_or(defaults.epochs),
            seed: seeds[0],
            init,
            widths: file.widths.unwrap_or(defaults.widths),
            activation,
        };
        train.validate()?;

        let tau_grid = file.tau_grid.unwrap_or_else(|| vec![0.5, 0.6, 0.7]);
        validate_tau_grid(&tau_grid)?;
        let linkage: Linkage = file.linkage.as_deref().unwrap_or("avg").parse()?;
        let zero_policy = match file.zero_policy.as_deref().unwrap_or("reject") {
            "reject" => ZeroPolicy::Reject,
            "isolate" => ZeroPolicy::IsolateAsSingleton,
            other => {
                return Err(Error::Config(format!(
                    "unknown zero_policy {other:?} (expected reject or isolate)"
                )))
            }
        };

        let sweep_widths = file.sweep_widths.unwrap_or_else(|| vec![100, 300, 1000]);
        let sweep_depths = file.sweep_depths.unwrap_or_else(|| vec![1, 2, 3, 4]);
        if sweep_widths.contains(&0) || sweep_depths.contains(&0) {
            return Err(Error::Config("sweep widths and depths must be >= 1".into()));
        }
        let sweep_activations = match file.sweep_activations {
            Some(v) => v
                .iter()
                .map(|s| parse_activation(s, file.elu_alpha))
                .collect::<Result<Vec<_>>>()?,
            None => Activation::all().to_vec(),
        };
        let sweep_inits = match file.sweep_inits {
            Some(v) => v.iter().map(|s| s.parse()).collect::<Result<Vec<_>>>()?,
            None => InitScheme::comparison_set().to_vec(),
        };
        let threads = file.threads.unwrap_or(1);
        if threads == 0 {
            return Err(Error::Config("threads must be >= 1".into()));
        }
        for (key, v) in [
            ("train_limit", file.train_limit),
            ("test_limit", file.test_limit),
        ] {
            if v == Some(0) {
                return Err(Error::Config(format!("{key} must be >= 1")));
            }
        }

        Ok(RunConfig {
            name: file.name.unwrap_or_else(|| "run".into()),
            train,
            seeds,
            tau_grid,
            linkage,
            zero_policy,
            include_output_layer: file.include_output_layer.unwrap_or(false),
            sweep_widths,
            sweep_depths,
            sweep_activations,
            sweep_inits,
            data_dir: file.data_dir,
            train_limit: file.train_limit,
            test_limit: file.test_limit,
            threads,
            out_dir: file.out_dir,
        })
    }

    /// `config` file (if any) overlaid with flag values, then validated.
    pub fn resolve(path: Option<&Path>, overrides: ConfigFile) -> Result<Self> {
        let base = match path {
            Some(p) => ConfigFile::load(p)?,
            None => ConfigFile::default(),
        };
        Self::from_file(base.overlay(overrides))
    }
}
