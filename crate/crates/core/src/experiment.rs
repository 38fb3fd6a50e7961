//! Train-then-analyze experiment grids: one axis of the network
//! configuration varies, every value is trained once per seed, and each
//! trained model is swept over the threshold grid.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::analysis::{sweep, SweepResult};
use crate::cli::RunConfig;
use crate::clustering::RedundancyReport;
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::nn::{train, TrainConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    Width,
    Depth,
    Activation,
    Initializer,
    Tau,
}

impl SweepAxis {
    pub fn as_str(self) -> &'static str {
        match self {
            SweepAxis::Width => "width",
            SweepAxis::Depth => "depth",
            SweepAxis::Activation => "activation",
            SweepAxis::Initializer => "initializer",
            SweepAxis::Tau => "tau",
        }
    }
}

impl fmt::Display for SweepAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SweepAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "width" => Ok(SweepAxis::Width),
            "depth" => Ok(SweepAxis::Depth),
            "activation" => Ok(SweepAxis::Activation),
            "initializer" | "init" => Ok(SweepAxis::Initializer),
            "tau" => Ok(SweepAxis::Tau),
            other => Err(Error::Config(format!("unknown sweep axis {other:?}"))),
        }
    }
}

/// One planned training run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSpec {
    /// Axis value as printed in reports.
    pub value: String,
    pub train: TrainConfig,
}

/// One output row: a trained model analyzed at one threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub axis: SweepAxis,
    pub value: String,
    pub seed: u64,
    pub tau: f64,
    pub nbar_r_abs: f64,
    pub nbar_r_pct: f64,
    pub test_accuracy: f64,
    pub layers: Vec<RedundancyReport>,
}

/// Expands the axis values and seeds into individual training runs, in
/// (value, seed) order.
pub fn plan_runs(cfg: &RunConfig, axis: SweepAxis) -> Vec<RunSpec> {
    let base = &cfg.train;
    let depth = base.widths.len().max(1);
    let width = base.widths.first().copied().unwrap_or(1000);
    let variants: Vec<(String, TrainConfig)> = match axis {
        SweepAxis::Width => cfg
            .sweep_widths
            .iter()
            .map(|&w| {
                (
                    w.to_string(),
                    TrainConfig {
                        widths: vec![w; depth],
                        ..base.clone()
                    },
                )
            })
            .collect(),
        SweepAxis::Depth => cfg
            .sweep_depths
            .iter()
            .map(|&d| {
                (
                    d.to_string(),
                    TrainConfig {
                        widths: vec![width; d],
                        ..base.clone()
                    },
                )
            })
            .collect(),
        SweepAxis::Activation => cfg
            .sweep_activations
            .iter()
            .map(|&a| {
                (
                    a.to_string(),
                    TrainConfig {
                        activation: a,
                        ..base.clone()
                    },
                )
            })
            .collect(),
        SweepAxis::Initializer => cfg
            .sweep_inits
            .iter()
            .map(|&i| {
                (
                    i.to_string(),
                    TrainConfig {
                        init: i,
                        ..base.clone()
                    },
                )
            })
            .collect(),
        SweepAxis::Tau => vec![("base".to_string(), base.clone())],
    };
    variants
        .into_iter()
        .flat_map(|(value, train)| {
            cfg.seeds.iter().map(move |&seed| RunSpec {
                value: value.clone(),
                train: TrainConfig {
                    seed,
                    ..train.clone()
                },
            })
        })
        .collect()
}

/// Trains one model and sweeps its layers over the configured grid.
pub fn train_and_sweep(
    cfg: &RunConfig,
    run: &RunSpec,
    train_set: &Dataset,
    test_set: &Dataset,
) -> Result<(SweepResult, f64)> {
    let outcome = train(&run.train, train_set, test_set)?;
    let accuracy = outcome.history.last().map_or(0.0, |h| h.test_accuracy);
    let layers = outcome.model.feature_matrices(cfg.include_output_layer);
    let result =
        sweep(&layers, &cfg.tau_grid, cfg.linkage, cfg.zero_policy)?.with_seed(run.train.seed);
    Ok((result, accuracy))
}

fn rows_for(axis: SweepAxis, run: &RunSpec, result: &SweepResult, accuracy: f64) -> Vec<SweepRow> {
    result
        .tau_grid
        .iter()
        .enumerate()
        .map(|(t, &tau)| SweepRow {
            axis,
            value: if axis == SweepAxis::Tau {
                tau.to_string()
            } else {
                run.value.clone()
            },
            seed: run.train.seed,
            tau,
            nbar_r_abs: result.nbar_r_abs[t],
            nbar_r_pct: result.nbar_r_pct[t],
            test_accuracy: accuracy,
            layers: result
                .per_layer
                .iter()
                .map(|l| l.reports[t].clone())
                .collect(),
        })
        .collect()
}

/// Runs the whole grid on a pool of `cfg.threads` workers. Row order is
/// fixed by the plan, not by completion order.
pub fn run_sweep(
    cfg: &RunConfig,
    axis: SweepAxis,
    train_set: &Dataset,
    test_set: &Dataset,
    on_done: impl Fn(&RunSpec, f64) + Sync,
) -> Result<Vec<SweepRow>> {
    let runs = plan_runs(cfg, axis);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads)
        .build()
        .map_err(|e| Error::Config(format!("worker pool: {e}")))?;
    let results = pool.install(|| {
        runs.par_iter()
            .map(|run| {
                let (result, acc) = train_and_sweep(cfg, run, train_set, test_set)?;
                on_done(run, acc);
                Ok(rows_for(axis, run, &result, acc))
            })
            .collect::<Result<Vec<_>>>()
    })?;
    Ok(results.into_iter().flatten().collect())
}
