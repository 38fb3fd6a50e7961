//! Column normalization and pairwise cosine similarity of layer features.

use crate::error::{Error, Result};
use crate::numerics::{column_norms, dot, matmul_tn, Matrix};

const UNIT_TOL: f64 = 1e-9;

/// One layer's kernel matrix: `z` rows, one feature vector per column.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    inner: Matrix,
    layer_name: String,
}

impl FeatureMatrix {
    pub fn new(layer_name: impl Into<String>, inner: Matrix) -> Result<Self> {
        if inner.rows() == 0 || inner.cols() == 0 {
            return Err(Error::Shape(format!(
                "feature matrix must be non-empty, got {}x{}",
                inner.rows(),
                inner.cols()
            )));
        }
        Ok(FeatureMatrix {
            inner,
            layer_name: layer_name.into(),
        })
    }

    pub fn matrix(&self) -> &Matrix {
        &self.inner
    }

    pub fn layer_name(&self) -> &str {
        &self.layer_name
    }

    /// Feature dimension `z`.
    pub fn dim(&self) -> usize {
        self.inner.rows()
    }

    /// Number of features `n'`.
    pub fn n_features(&self) -> usize {
        self.inner.cols()
    }

    pub fn feature(&self, i: usize) -> Vec<f64> {
        self.inner.column(i)
    }
}

/// What to do with features whose weights are all zero.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum ZeroPolicy {
    #[default]
    Reject,
    /// Keep the zero vector. Its similarity to everything is 0, so it only
    /// merges when the threshold is negative.
    IsolateAsSingleton,
}

#[derive(Debug, Clone)]
pub struct Normalized {
    pub phi: FeatureMatrix,
    pub zero_columns: Vec<usize>,
}

pub fn normalize_columns(w: &FeatureMatrix, zero_policy: ZeroPolicy) -> Result<Normalized> {
    let norms = column_norms(&w.inner);
    let zero_columns: Vec<usize> = norms
        .iter()
        .enumerate()
        .filter(|(_, n)| **n == 0.0)
        .map(|(i, _)| i)
        .collect();
    if !zero_columns.is_empty() && zero_policy == ZeroPolicy::Reject {
        return Err(Error::ZeroColumns(zero_columns));
    }
    let inv: Vec<f64> = norms
        .iter()
        .map(|&n| if n == 0.0 { 0.0 } else { 1.0 / n })
        .collect();
    let mut phi = w.inner.clone();
    for r in 0..phi.rows() {
        for (v, s) in phi.row_mut(r).iter_mut().zip(&inv) {
            *v *= s;
        }
    }
    Ok(Normalized {
        phi: FeatureMatrix {
            inner: phi,
            layer_name: w.layer_name.clone(),
        },
        zero_columns,
    })
}

/// Cosine of two unit vectors, clamped to [-1, 1].
pub fn cosine(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::Shape(format!(
            "vectors of length {} and {}",
            a.len(),
            b.len()
        )));
    }
    for v in [a, b] {
        let n = dot(v, v).sqrt();
        if (n - 1.0).abs() > UNIT_TOL {
            return Err(Error::NotUnit(n));
        }
    }
    Ok(dot(a, b).clamp(-1.0, 1.0))
}

/// Symmetric matrix of pairwise feature cosines.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityMatrix {
    inner: Matrix,
}

impl SimilarityMatrix {
    /// Wraps an externally built similarity matrix after checking symmetry,
    /// range and the diagonal (1, or 0 for an isolated zero feature).
    pub fn from_matrix(m: Matrix) -> Result<Self> {
        let n = m.rows();
        if n != m.cols() || n == 0 {
            return Err(Error::Shape(format!(
                "similarity matrix must be square and non-empty, got {}x{}",
                m.rows(),
                m.cols()
            )));
        }
        for i in 0..n {
            let d = m.get(i, i);
            if (d - 1.0).abs() > UNIT_TOL && d != 0.0 {
                return Err(Error::Shape(format!("diagonal entry {i} is {d}")));
            }
            for j in 0..i {
                let (a, b) = (m.get(i, j), m.get(j, i));
                if (a - b).abs() > 1e-12 {
                    return Err(Error::Shape(format!("asymmetric at ({i}, {j})")));
                }
                if a.abs() > 1.0 + UNIT_TOL {
                    return Err(Error::Shape(format!(
                        "entry ({i}, {j}) = {a} outside [-1, 1]"
                    )));
                }
            }
        }
        Ok(SimilarityMatrix { inner: m })
    }

    pub fn n(&self) -> usize {
        self.inner.rows()
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.inner.get(i, j)
    }

    pub fn matrix(&self) -> &Matrix {
        &self.inner
    }
}

/// `Φᵀ Φ` over normalized features. The upper triangle is computed and
/// mirrored so the result is exactly symmetric.
pub fn gram(phi: &FeatureMatrix) -> Result<SimilarityMatrix> {
    for (i, n) in column_norms(&phi.inner).into_iter().enumerate() {
        if n != 0.0 && (n - 1.0).abs() > UNIT_TOL {
            return Err(Error::Shape(format!(
                "column {i} has norm {n}; normalize before building the gram matrix"
            )));
        }
    }
    let mut omega = matmul_tn(&phi.inner, &phi.inner)?;
    let n = omega.rows();
    for i in 0..n {
        for j in i..n {
            let v = omega.get(i, j).clamp(-1.0, 1.0);
            omega.set(i, j, v);
            omega.set(j, i, v);
        }
    }
    Ok(SimilarityMatrix { inner: omega })
}

/// Normalizes `w` and builds its similarity matrix in one go.
pub fn similarity_of(w: &FeatureMatrix, zero_policy: ZeroPolicy) -> Result<SimilarityMatrix> {
    gram(&normalize_columns(w, zero_policy)?.phi)
}
