use std::fs;
use std::path::{Path, PathBuf};

use super::config::RunConfig;
use super::report::{
    fmt_f, write_csv, HISTORY_HEADER, REDUNDANCY_HEADER, SWEEP_HEADER, SWEEP_LAYERS_HEADER,
};
use crate::analysis::layer_redundancy;
use crate::clustering::Linkage;
use crate::data::{
    load_mnist_dir, mnist_dir, read_weight_archive, write_weight_archive, Dataset, NamedTensor,
    RawTensor, DATA_DIR_ENV,
};
use crate::error::{Error, Result};
use crate::experiment::{run_sweep, SweepAxis};
use crate::nn::{layer_name, train_with_progress};
use crate::similarity::ZeroPolicy;

pub const ARCHIVE_DIR: &str = "model.archive";
pub const HISTORY_FILE: &str = "history.csv";

fn load_data(cfg: &RunConfig) -> Result<(Dataset, Dataset)> {
    let dir: PathBuf = cfg.data_dir.clone().or_else(mnist_dir).ok_or_else(|| {
        Error::Config(format!(
            "no MNIST directory: pass --data-dir, set data_dir, or set {DATA_DIR_ENV}"
        ))
    })?;
    let (mut train, mut test) = load_mnist_dir(&dir)?;
    if let Some(n) = cfg.train_limit {
        train = train.head(n);
    }
    if let Some(n) = cfg.test_limit {
        test = test.head(n);
    }
    Ok((train, test))
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

/// Trains one model and writes `model.archive/` and `history.csv` to `out`.
pub fn cmd_train(cfg: &RunConfig, out: &Path) -> Result<()> {
    let (train_set, test_set) = load_data(cfg)?;
    let outcome = train_with_progress(&cfg.train, &train_set, &test_set, |s| {
        eprintln!(
            "epoch {:>3}  loss {:.5}  test accuracy {:.4}",
            s.epoch, s.loss, s.test_accuracy
        );
    })?;

    create_dir(out)?;
    let layers: Vec<NamedTensor> = outcome
        .model
        .layers()
        .iter()
        .enumerate()
        .map(|(l, layer)| NamedTensor {
            name: layer_name(l),
            tensor: RawTensor::dense(&layer.weights),
        })
        .collect();
    let staged = out.join(format!("{ARCHIVE_DIR}.partial"));
    let target = out.join(ARCHIVE_DIR);
    let written = write_weight_archive(&staged, &layers).and_then(|()| {
        if target.exists() {
            fs::remove_dir_all(&target).map_err(|e| Error::io(&target, e))?;
        }
        fs::rename(&staged, &target).map_err(|e| Error::io(&target, e))
    });
    if let Err(e) = written {
        let _ = fs::remove_dir_all(&staged);
        return Err(e);
    }

    let rows: Vec<Vec<String>> = outcome
        .history
        .iter()
        .map(|s| vec![s.epoch.to_string(), fmt_f(s.loss), fmt_f(s.test_accuracy)])
        .collect();
    write_csv(&out.join(HISTORY_FILE), &HISTORY_HEADER, &rows)
}

/// Reports every layer of an archive at one threshold.
pub fn cmd_analyze(
    archive: &Path,
    tau: f64,
    linkage: Linkage,
    isolate_zero: bool,
    out: &Path,
) -> Result<()> {
    if !(-1.0..=1.0).contains(&tau) {
        return Err(Error::InvalidThreshold(tau));
    }
    let policy = if isolate_zero {
        ZeroPolicy::IsolateAsSingleton
    } else {
        ZeroPolicy::Reject
    };
    let mut rows = Vec::new();
    for layer in read_weight_archive(archive)? {
        let w = layer.tensor.to_feature_matrix(&layer.name)?;
        let r = layer_redundancy(&w, tau, linkage, policy)?;
        rows.push(vec![
            r.layer_name,
            r.n_prime.to_string(),
            r.n_f.to_string(),
            r.n_r.to_string(),
            fmt_f(r.percent_redundant),
        ]);
    }
    write_csv(out, &REDUNDANCY_HEADER, &rows)
}

/// Trains the axis grid and writes `sweep_<axis>.csv` plus a per-layer
/// breakdown `sweep_<axis>_layers.csv` to `out`.
pub fn cmd_sweep(cfg: &RunConfig, axis: SweepAxis, out: &Path) -> Result<()> {
    let (train_set, test_set) = load_data(cfg)?;
    let rows = run_sweep(cfg, axis, &train_set, &test_set, |run, acc| {
        eprintln!(
            "{axis}={} seed={} done, test accuracy {acc:.4}",
            run.value, run.train.seed
        );
    })?;

    create_dir(out)?;
    let summary: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                axis.to_string(),
                r.value.clone(),
                r.seed.to_string(),
                r.tau.to_string(),
                fmt_f(r.nbar_r_abs),
                fmt_f(r.nbar_r_pct),
                fmt_f(r.test_accuracy),
            ]
        })
        .collect();
    let per_layer: Vec<Vec<String>> = rows
        .iter()
        .flat_map(|r| {
            r.layers.iter().map(move |l| {
                vec![
                    axis.to_string(),
                    r.value.clone(),
                    r.seed.to_string(),
                    r.tau.to_string(),
                    l.layer_name.clone(),
                    l.n_prime.to_string(),
                    l.n_f.to_string(),
                    l.n_r.to_string(),
                ]
            })
        })
        .collect();
    write_csv(
        &out.join(format!("sweep_{axis}.csv")),
        &SWEEP_HEADER,
        &summary,
    )?;
    write_csv(
        &out.join(format!("sweep_{axis}_layers.csv")),
        &SWEEP_LAYERS_HEADER,
        &per_layer,
    )
}
