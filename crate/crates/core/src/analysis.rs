//! End-to-end redundancy estimation: per-layer reports, threshold sweeps and
//! cross-layer averages.

use rayon::prelude::*;
use serde::Serialize;

use crate::clustering::{agglomerate, dendrogram, redundancy_count, Linkage, RedundancyReport};
use crate::error::{Error, Result};
use crate::similarity::{similarity_of, FeatureMatrix, ZeroPolicy};

/// normalize → gram → agglomerate → count, for one layer at one threshold.
pub fn layer_redundancy(
    w: &FeatureMatrix,
    tau: f64,
    linkage: Linkage,
    zero_policy: ZeroPolicy,
) -> Result<RedundancyReport> {
    let omega = similarity_of(w, zero_policy)?;
    let partition = agglomerate(&omega, tau, linkage)?;
    Ok(redundancy_count(&partition, w.layer_name()))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LayerSweep {
    pub layer_name: String,
    /// One report per threshold, in grid order.
    pub reports: Vec<RedundancyReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    pub tau_grid: Vec<f64>,
    pub per_layer: Vec<LayerSweep>,
    /// Mean `n_r` across layers, per threshold.
    pub nbar_r_abs: Vec<f64>,
    /// Mean per-layer redundancy percentage, per threshold.
    pub nbar_r_pct: Vec<f64>,
    pub linkage: Linkage,
    pub seed: Option<u64>,
}

impl SweepResult {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }
}

pub fn validate_tau_grid(tau_grid: &[f64]) -> Result<()> {
    if tau_grid.is_empty() {
        return Err(Error::Empty("threshold grid"));
    }
    if let Some(&t) = tau_grid.iter().find(|t| !(-1.0..=1.0).contains(*t)) {
        return Err(Error::InvalidThreshold(t));
    }
    if tau_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Config(format!(
            "threshold grid must be strictly ascending: {tau_grid:?}"
        )));
    }
    Ok(())
}

/// Reports every layer at every threshold. Each layer is clustered once;
/// the recorded merge sequence is then cut at each threshold.
pub fn sweep(
    layers: &[FeatureMatrix],
    tau_grid: &[f64],
    linkage: Linkage,
    zero_policy: ZeroPolicy,
) -> Result<SweepResult> {
    validate_tau_grid(tau_grid)?;
    if layers.is_empty() {
        return Err(Error::Empty("layer list"));
    }
    let per_layer = layers
        .par_iter()
        .map(|w| {
            let omega = similarity_of(w, zero_policy)?;
            let tree = dendrogram(&omega, linkage);
            let reports = tau_grid
                .iter()
                .map(|&tau| Ok(redundancy_count(&tree.cut(tau)?, w.layer_name())))
                .collect::<Result<Vec<_>>>()?;
            Ok(LayerSweep {
                layer_name: w.layer_name().to_string(),
                reports,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let mut nbar_r_abs = Vec::with_capacity(tau_grid.len());
    let mut nbar_r_pct = Vec::with_capacity(tau_grid.len());
    for t in 0..tau_grid.len() {
        let at_tau: Vec<RedundancyReport> =
            per_layer.iter().map(|l| l.reports[t].clone()).collect();
        let (abs, pct) = average_across_layers(&at_tau)?;
        nbar_r_abs.push(abs);
        nbar_r_pct.push(pct);
    }
    Ok(SweepResult {
        tau_grid: tau_grid.to_vec(),
        per_layer,
        nbar_r_abs,
        nbar_r_pct,
        linkage,
        seed: None,
    })
}

/// Mean `n_r` and mean percentage over the given layer reports.
pub fn average_across_layers(reports: &[RedundancyReport]) -> Result<(f64, f64)> {
    if reports.is_empty() {
        return Err(Error::Empty("layer reports"));
    }
    let n = reports.len() as f64;
    let abs = reports.iter().map(|r| r.n_r as f64).sum::<f64>() / n;
    let pct = reports.iter().map(|r| r.percent_redundant).sum::<f64>() / n;
    Ok((abs, pct))
}
