//! Threshold-stopped agglomerative clustering of features and redundancy
//! accounting.
//!
//! Clusters start as singletons. At each step the pair with the highest
//! linkage similarity is merged, as long as that similarity is strictly above
//! the threshold. A cluster is identified by its smallest member index, and
//! ties between equal similarities go to the lexicographically smallest
//! `(id, id)` pair, so the merge order is fully deterministic.
//!
//! The merge order never depends on the threshold, only the stopping point
//! does. [`dendrogram`] records the complete merge sequence once and
//! [`Dendrogram::cut`] recovers the partition for any threshold from it.

use std::fmt;
use std::str::FromStr;

use rand::seq::IndexedRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::similarity::SimilarityMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub enum Linkage {
    /// Mean similarity over all cross-cluster pairs.
    #[default]
    GroupAverage,
    /// Similarity of the closest cross-cluster pair (maximum).
    SingleLink,
    /// Similarity of the farthest cross-cluster pair (minimum).
    CompleteLink,
}

impl Linkage {
    pub const ALL: [Linkage; 3] = [
        Linkage::GroupAverage,
        Linkage::SingleLink,
        Linkage::CompleteLink,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Linkage::GroupAverage => "avg",
            Linkage::SingleLink => "single",
            Linkage::CompleteLink => "complete",
        }
    }
}

impl fmt::Display for Linkage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Linkage {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "avg" | "average" | "group-average" => Ok(Linkage::GroupAverage),
            "single" => Ok(Linkage::SingleLink),
            "complete" => Ok(Linkage::CompleteLink),
            other => Err(Error::Config(format!(
                "unknown linkage {other:?} (expected avg, single or complete)"
            ))),
        }
    }
}

/// One merge step: clusters `a < b` (by minimum member) joined into `a`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Merge {
    pub a: usize,
    pub b: usize,
    pub similarity: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Partition {
    clusters: Vec<Vec<usize>>,
    n_items: usize,
    merge_trace: Vec<Merge>,
}

impl Partition {
    /// Clusters sorted by smallest member, members ascending.
    pub fn clusters(&self) -> &[Vec<usize>] {
        &self.clusters
    }

    pub fn n_items(&self) -> usize {
        self.n_items
    }

    pub fn n_clusters(&self) -> usize {
        self.clusters.len()
    }

    pub fn merge_trace(&self) -> &[Merge] {
        &self.merge_trace
    }

    /// Cluster index of every item.
    pub fn labels(&self) -> Vec<usize> {
        let mut labels = vec![0; self.n_items];
        for (k, c) in self.clusters.iter().enumerate() {
            for &i in c {
                labels[i] = k;
            }
        }
        labels
    }

    fn from_members(members: Vec<Vec<usize>>, n_items: usize, merge_trace: Vec<Merge>) -> Self {
        let clusters = members.into_iter().filter(|m| !m.is_empty()).collect();
        Partition {
            clusters,
            n_items,
            merge_trace,
        }
    }
}

fn check_sets(n: usize, ca: &[usize], cb: &[usize]) -> Result<()> {
    if ca.is_empty() || cb.is_empty() {
        return Err(Error::InvalidClusters("empty cluster".into()));
    }
    if let Some(i) = ca.iter().chain(cb).find(|&&i| i >= n) {
        return Err(Error::InvalidClusters(format!(
            "index {i} out of range for {n} items"
        )));
    }
    if let Some(i) = ca.iter().find(|i| cb.contains(i)) {
        return Err(Error::InvalidClusters(format!(
            "index {i} in both clusters"
        )));
    }
    Ok(())
}

/// Linkage similarity between two disjoint, non-empty sets of features,
/// evaluated directly from the cross pairs.
pub fn linkage_similarity(
    omega: &SimilarityMatrix,
    ca: &[usize],
    cb: &[usize],
    linkage: Linkage,
) -> Result<f64> {
    check_sets(omega.n(), ca, cb)?;
    let cross = ca
        .iter()
        .flat_map(|&i| cb.iter().map(move |&j| omega.get(i, j)));
    Ok(match linkage {
        Linkage::GroupAverage => cross.sum::<f64>() / (ca.len() * cb.len()) as f64,
        Linkage::SingleLink => cross.fold(f64::NEG_INFINITY, f64::max),
        Linkage::CompleteLink => cross.fold(f64::INFINITY, f64::min),
    })
}

#[derive(Debug, Clone, Copy)]
struct RowBest {
    value: f64,
    col: usize,
}

/// Incremental clustering state.
///
/// Keeps a dense table of cluster-pair scores. Group average stores the sum
/// of cross-pair similarities (so a merge is `sum(a ∪ b, c) = sum(a, c) +
/// sum(b, c)`, the Lance–Williams update in unnormalized form); single and
/// complete link store the linkage value itself and fold with max/min.
/// Each row caches its best partner to the right, which makes finding the
/// next merge a linear scan.
pub struct Agglomerator {
    n: usize,
    linkage: Linkage,
    table: Vec<f64>,
    size: Vec<usize>,
    members: Vec<Vec<usize>>,
    active: Vec<bool>,
    best: Vec<Option<RowBest>>,
    n_active: usize,
}

impl Agglomerator {
    pub fn new(omega: &SimilarityMatrix, linkage: Linkage) -> Self {
        let n = omega.n();
        let table = omega.matrix().as_slice().to_vec();
        let mut agg = Agglomerator {
            n,
            linkage,
            table,
            size: vec![1; n],
            members: (0..n).map(|i| vec![i]).collect(),
            active: vec![true; n],
            best: vec![None; n],
            n_active: n,
        };
        for i in 0..n {
            agg.refresh_row(i);
        }
        agg
    }

    pub fn n_clusters(&self) -> usize {
        self.n_active
    }

    /// Ids (smallest member) of the clusters still alive, ascending.
    pub fn active_clusters(&self) -> Vec<usize> {
        (0..self.n).filter(|&i| self.active[i]).collect()
    }

    pub fn members(&self, id: usize) -> &[usize] {
        &self.members[id]
    }

    /// Current linkage similarity between two live clusters, as maintained
    /// by the incremental updates.
    pub fn similarity(&self, a: usize, b: usize) -> f64 {
        assert!(self.active[a] && self.active[b] && a != b);
        self.value(a.min(b), a.max(b))
    }

    #[inline]
    fn value(&self, i: usize, j: usize) -> f64 {
        let raw = self.table[i * self.n + j];
        match self.linkage {
            Linkage::GroupAverage => raw / (self.size[i] * self.size[j]) as f64,
            _ => raw,
        }
    }

    fn refresh_row(&mut self, i: usize) {
        let mut best: Option<RowBest> = None;
        for j in i + 1..self.n {
            if !self.active[j] {
                continue;
            }
            let v = self.value(i, j);
            if best.is_none_or(|b| v > b.value) {
                best = Some(RowBest { value: v, col: j });
            }
        }
        self.best[i] = best;
    }

    /// The pair that would be merged next, without merging it.
    pub fn peek(&self) -> Option<Merge> {
        let mut out: Option<Merge> = None;
        for (i, b) in self.best.iter().enumerate() {
            if !self.active[i] {
                continue;
            }
            if let Some(b) = b {
                if out.is_none_or(|o| b.value > o.similarity) {
                    out = Some(Merge {
                        a: i,
                        b: b.col,
                        similarity: b.value,
                    });
                }
            }
        }
        out
    }

    /// Merges live clusters `a` and `b` into the one with the smaller id.
    pub fn merge(&mut self, a: usize, b: usize) {
        let (a, b) = (a.min(b), a.max(b));
        assert!(a != b && self.active[a] && self.active[b]);
        let n = self.n;
        for k in 0..n {
            if !self.active[k] || k == a || k == b {
                continue;
            }
            let (x, y) = (self.table[a * n + k], self.table[b * n + k]);
            let folded = match self.linkage {
                Linkage::GroupAverage => x + y,
                Linkage::SingleLink => x.max(y),
                Linkage::CompleteLink => x.min(y),
            };
            self.table[a * n + k] = folded;
            self.table[k * n + a] = folded;
        }
        self.size[a] += self.size[b];
        let moved = std::mem::take(&mut self.members[b]);
        self.members[a].extend(moved);
        self.members[a].sort_unstable();
        self.active[b] = false;
        self.best[b] = None;
        self.n_active -= 1;

        self.refresh_row(a);
        for i in 0..b {
            if !self.active[i] || i == a {
                continue;
            }
            match self.best[i] {
                Some(rb) if rb.col == a || rb.col == b => self.refresh_row(i),
                Some(rb) if i < a => {
                    let v = self.value(i, a);
                    if v > rb.value || (v == rb.value && a < rb.col) {
                        self.best[i] = Some(RowBest { value: v, col: a });
                    }
                }
                Some(_) => {}
                // Only reachable when a row had no live partner to its right.
                None if i < a => self.refresh_row(i),
                None => {}
            }
        }
    }

    /// Merges the best pair if its similarity is strictly above `tau`.
    pub fn step(&mut self, tau: f64) -> Option<Merge> {
        let m = self.peek()?;
        if m.similarity > tau {
            self.merge(m.a, m.b);
            Some(m)
        } else {
            None
        }
    }

    fn into_partition(self, trace: Vec<Merge>) -> Partition {
        Partition::from_members(self.members, self.n, trace)
    }
}

fn check_tau(tau: f64) -> Result<()> {
    if !(-1.0..=1.0).contains(&tau) {
        return Err(Error::InvalidThreshold(tau));
    }
    Ok(())
}

/// Greedy clustering stopped at the first best pair whose similarity is not
/// strictly above `tau`.
pub fn agglomerate(omega: &SimilarityMatrix, tau: f64, linkage: Linkage) -> Result<Partition> {
    check_tau(tau)?;
    let mut agg = Agglomerator::new(omega, linkage);
    let mut trace = Vec::new();
    while let Some(m) = agg.step(tau) {
        trace.push(m);
    }
    Ok(agg.into_partition(trace))
}

/// Complete merge sequence for one similarity matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Dendrogram {
    n_items: usize,
    linkage: Linkage,
    merges: Vec<Merge>,
}

pub fn dendrogram(omega: &SimilarityMatrix, linkage: Linkage) -> Dendrogram {
    let mut agg = Agglomerator::new(omega, linkage);
    let mut merges = Vec::with_capacity(omega.n().saturating_sub(1));
    while let Some(m) = agg.peek() {
        agg.merge(m.a, m.b);
        merges.push(m);
    }
    Dendrogram {
        n_items: omega.n(),
        linkage,
        merges,
    }
}

impl Dendrogram {
    pub fn n_items(&self) -> usize {
        self.n_items
    }

    pub fn linkage(&self) -> Linkage {
        self.linkage
    }

    pub fn merges(&self) -> &[Merge] {
        &self.merges
    }

    /// Number of merges that survive at threshold `tau`.
    pub fn merges_above(&self, tau: f64) -> usize {
        self.merges
            .iter()
            .position(|m| m.similarity <= tau)
            .unwrap_or(self.merges.len())
    }

    /// Partition at `tau`: replays merges up to the first one that fails the
    /// strict `> tau` test.
    pub fn cut(&self, tau: f64) -> Result<Partition> {
        check_tau(tau)?;
        let k = self.merges_above(tau);
        let mut members: Vec<Vec<usize>> = (0..self.n_items).map(|i| vec![i]).collect();
        for m in &self.merges[..k] {
            let moved = std::mem::take(&mut members[m.b]);
            members[m.a].extend(moved);
            members[m.a].sort_unstable();
        }
        Ok(Partition::from_members(
            members,
            self.n_items,
            self.merges[..k].to_vec(),
        ))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RedundancyReport {
    pub layer_name: String,
    pub n_prime: usize,
    pub n_f: usize,
    pub n_r: usize,
    pub percent_redundant: f64,
}

/// `n_r = n' - n_f`, where `n_f` is the number of clusters.
pub fn redundancy_count(p: &Partition, layer_name: &str) -> RedundancyReport {
    let n_prime = p.n_items();
    let n_f = p.n_clusters();
    let n_r = n_prime - n_f;
    let percent_redundant = if n_prime == 0 {
        0.0
    } else {
        100.0 * n_r as f64 / n_prime as f64
    };
    RedundancyReport {
        layer_name: layer_name.to_string(),
        n_prime,
        n_f,
        n_r,
        percent_redundant,
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Representatives {
    pub kept: Vec<usize>,
    pub redundant: Vec<usize>,
}

/// Draws one representative per cluster; every other member is redundant.
pub fn select_representatives(p: &Partition, seed: u64) -> Representatives {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut kept = Vec::with_capacity(p.n_clusters());
    let mut redundant = Vec::with_capacity(p.n_items() - p.n_clusters());
    for c in p.clusters() {
        let pick = *c.choose(&mut rng).expect("clusters are non-empty");
        kept.push(pick);
        redundant.extend(c.iter().copied().filter(|&i| i != pick));
    }
    kept.sort_unstable();
    redundant.sort_unstable();
    Representatives { kept, redundant }
}
