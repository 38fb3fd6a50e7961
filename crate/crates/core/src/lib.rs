//! Estimate how many features in a trained network layer are redundant.
//!
//! A layer's weight columns are normalized, compared by cosine similarity,
//! and grouped by threshold-stopped agglomerative clustering. Each cluster
//! counts as one distinct feature; everything else is redundant.
//!
//! ```
//! use redlens::{layer_redundancy, FeatureMatrix, Linkage, Matrix, ZeroPolicy};
//!
//! // Columns 0 and 1 point the same way; column 2 is orthogonal to both.
//! let w = Matrix::from_rows(&[vec![1.0, 2.0, 0.0], vec![0.0, 0.0, 1.0]]).unwrap();
//! let layer = FeatureMatrix::new("toy", w).unwrap();
//! let r = layer_redundancy(&layer, 0.9, Linkage::GroupAverage, ZeroPolicy::Reject).unwrap();
//! assert_eq!((r.n_prime, r.n_f, r.n_r), (3, 2, 1));
//! ```

pub mod analysis;
pub mod cli;
pub mod clustering;
pub mod data;
pub mod error;
pub mod experiment;
pub mod nn;
pub mod numerics;
pub mod similarity;

pub use analysis::{average_across_layers, layer_redundancy, sweep, LayerSweep, SweepResult};
pub use clustering::{
    agglomerate, dendrogram, redundancy_count, select_representatives, Dendrogram, Linkage,
    Partition, RedundancyReport,
};
pub use error::{Error, Result};
pub use numerics::Matrix;
pub use similarity::{gram, normalize_columns, FeatureMatrix, SimilarityMatrix, ZeroPolicy};
