//! Datasets, the MNIST IDX reader, the weight-archive interchange format and
//! convolution kernel unrolling.

mod archive;
mod idx;
mod unroll;

pub use archive::{
    read_weight_archive, write_weight_archive, LayerKind, Manifest, ManifestEntry, NamedTensor,
    RawTensor, MANIFEST_FILE,
};
pub use idx::{
    load_idx, load_mnist_dir, mnist_dir, write_idx_images, write_idx_labels, DATA_DIR_ENV,
    IMAGES_MAGIC, LABELS_MAGIC,
};
pub use unroll::unroll_conv;

use crate::error::{Error, Result};
use crate::numerics::Matrix;

/// Samples as rows of `images`, with one class index per row.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    images: Matrix,
    labels: Vec<usize>,
    n_classes: usize,
}

impl Dataset {
    pub fn new(images: Matrix, labels: Vec<usize>, n_classes: usize) -> Result<Self> {
        if images.rows() != labels.len() {
            return Err(Error::Shape(format!(
                "{} samples but {} labels",
                images.rows(),
                labels.len()
            )));
        }
        if let Some(&label) = labels.iter().find(|&&y| y >= n_classes) {
            return Err(Error::LabelOutOfRange {
                label,
                classes: n_classes,
            });
        }
        Ok(Dataset {
            images,
            labels,
            n_classes,
        })
    }

    pub fn images(&self) -> &Matrix {
        &self.images
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Feature dimension.
    pub fn dim(&self) -> usize {
        self.images.cols()
    }

    /// The first `n` samples (or all of them when `n` is larger).
    pub fn head(&self, n: usize) -> Dataset {
        let n = n.min(self.len());
        let d = self.dim();
        Dataset {
            images: Matrix::from_raw(n, d, self.images.as_slice()[..n * d].to_vec()),
            labels: self.labels[..n].to_vec(),
            n_classes: self.n_classes,
        }
    }
}
