//! Dense feed-forward networks: forward pass, softmax cross-entropy and
//! reverse-mode gradients.
//!
//! Layer `l` computes `x_{l+1} = f(x_l W_l + b_l)` on a batch of row
//! vectors, with `W_l` stored `fan_in x fan_out`. Column `j` of `W_l` is the
//! incoming weight vector of unit `j`, i.e. one feature of that layer. The
//! last layer has no activation and feeds softmax.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::activation::Activation;
use super::init::{init_weights, InitScheme};
use crate::error::{Error, Result};
use crate::numerics::{matmul, matmul_nt, matmul_tn, Matrix};
use crate::similarity::FeatureMatrix;

#[derive(Debug, Clone, PartialEq)]
pub struct DenseLayer {
    pub weights: Matrix,
    pub bias: Vec<f64>,
    /// `None` is the identity.
    pub activation: Option<Activation>,
}

impl DenseLayer {
    pub fn fan_in(&self) -> usize {
        self.weights.rows()
    }

    pub fn fan_out(&self) -> usize {
        self.weights.cols()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MlpModel {
    layers: Vec<DenseLayer>,
}

#[derive(Debug, Clone)]
pub struct ForwardCache {
    /// Input to each layer.
    inputs: Vec<Matrix>,
    /// Pre-activation output of each layer.
    pre: Vec<Matrix>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LayerGrads {
    pub weights: Matrix,
    pub bias: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub layers: Vec<LayerGrads>,
}

impl MlpModel {
    pub fn new(layers: Vec<DenseLayer>) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::Empty("model has no layers"));
        }
        for (l, layer) in layers.iter().enumerate() {
            if layer.bias.len() != layer.fan_out() {
                return Err(Error::Shape(format!(
                    "layer {l}: bias length {} vs fan_out {}",
                    layer.bias.len(),
                    layer.fan_out()
                )));
            }
            if !layer.weights.is_finite() || layer.bias.iter().any(|b| !b.is_finite()) {
                return Err(Error::Shape(format!("layer {l} has non-finite parameters")));
            }
            if let Some(a) = layer.activation {
                a.validate()?;
            }
            if l > 0 && layers[l - 1].fan_out() != layer.fan_in() {
                return Err(Error::Shape(format!(
                    "layer {l} expects {} inputs but layer {} produces {}",
                    layer.fan_in(),
                    l - 1,
                    layers[l - 1].fan_out()
                )));
            }
        }
        Ok(MlpModel { layers })
    }

    /// Hidden layers of the given widths with `activation`, then a linear
    /// output layer of `n_classes` units. Biases start at zero.
    pub fn init(
        n_inputs: usize,
        widths: &[usize],
        n_classes: usize,
        activation: Activation,
        scheme: InitScheme,
        seed: u64,
    ) -> Result<Self> {
        let mut seeds = ChaCha8Rng::seed_from_u64(seed);
        let mut dims = vec![n_inputs];
        dims.extend_from_slice(widths);
        dims.push(n_classes);
        let mut layers = Vec::with_capacity(dims.len() - 1);
        for (l, pair) in dims.windows(2).enumerate() {
            let weights = init_weights(scheme, pair[0], pair[1], seeds.next_u64())?;
            let is_output = l == dims.len() - 2;
            layers.push(DenseLayer {
                weights,
                bias: vec![0.0; pair[1]],
                activation: if is_output { None } else { Some(activation) },
            });
        }
        MlpModel::new(layers)
    }

    pub fn layers(&self) -> &[DenseLayer] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [DenseLayer] {
        &mut self.layers
    }

    pub fn n_inputs(&self) -> usize {
        self.layers[0].fan_in()
    }

    pub fn n_outputs(&self) -> usize {
        self.layers[self.layers.len() - 1].fan_out()
    }

    fn affine(layer: &DenseLayer, x: &Matrix) -> Result<Matrix> {
        let mut z = matmul(x, &layer.weights)?;
        for r in 0..z.rows() {
            for (v, b) in z.row_mut(r).iter_mut().zip(&layer.bias) {
                *v += b;
            }
        }
        Ok(z)
    }

    fn activate(layer: &DenseLayer, z: &Matrix) -> Matrix {
        let mut a = z.clone();
        if let Some(act) = layer.activation {
            a.as_mut_slice()
                .iter_mut()
                .for_each(|v| *v = act.apply_scalar(*v));
        }
        a
    }

    fn check_input(&self, batch: &Matrix) -> Result<()> {
        if batch.cols() != self.n_inputs() {
            return Err(Error::Shape(format!(
                "batch has {} features, model expects {}",
                batch.cols(),
                self.n_inputs()
            )));
        }
        Ok(())
    }

    /// Logits for a `B x d_in` batch plus what [`MlpModel::backward`] needs.
    pub fn forward(&self, batch: &Matrix) -> Result<(Matrix, ForwardCache)> {
        self.check_input(batch)?;
        let mut inputs = Vec::with_capacity(self.layers.len());
        let mut pre = Vec::with_capacity(self.layers.len());
        let mut x = batch.clone();
        for layer in &self.layers {
            let z = Self::affine(layer, &x)?;
            let a = Self::activate(layer, &z);
            inputs.push(x);
            pre.push(z);
            x = a;
        }
        Ok((x, ForwardCache { inputs, pre }))
    }

    /// Logits only; keeps no intermediate activations.
    pub fn predict(&self, batch: &Matrix) -> Result<Matrix> {
        self.check_input(batch)?;
        let mut x = batch.clone();
        for layer in &self.layers {
            let z = Self::affine(layer, &x)?;
            x = Self::activate(layer, &z);
        }
        Ok(x)
    }

    pub fn backward(&self, cache: &ForwardCache, dlogits: &Matrix) -> Result<Gradients> {
        let stale = cache.pre.len() != self.layers.len()
            || cache
                .pre
                .iter()
                .zip(&cache.inputs)
                .zip(&self.layers)
                .any(|((z, x), l)| z.cols() != l.fan_out() || x.cols() != l.fan_in());
        if stale {
            return Err(Error::Shape(
                "forward cache does not match this model".into(),
            ));
        }
        if dlogits.shape() != cache.pre[cache.pre.len() - 1].shape() {
            return Err(Error::Shape(format!(
                "logit gradient is {:?}, forward produced {:?}",
                dlogits.shape(),
                cache.pre[cache.pre.len() - 1].shape()
            )));
        }
        let mut grads = Vec::with_capacity(self.layers.len());
        let mut upstream = dlogits.clone();
        for (l, layer) in self.layers.iter().enumerate().rev() {
            let mut dz = upstream;
            if let Some(act) = layer.activation {
                for (d, z) in dz.as_mut_slice().iter_mut().zip(cache.pre[l].as_slice()) {
                    *d *= act.grad_scalar(*z);
                }
            }
            let dw = matmul_tn(&cache.inputs[l], &dz)?;
            let mut db = vec![0.0; layer.fan_out()];
            for r in 0..dz.rows() {
                for (acc, v) in db.iter_mut().zip(dz.row(r)) {
                    *acc += v;
                }
            }
            upstream = if l > 0 {
                matmul_nt(&dz, &layer.weights)?
            } else {
                Matrix::zeros(0, 0)
            };
            grads.push(LayerGrads {
                weights: dw,
                bias: db,
            });
        }
        grads.reverse();
        Ok(Gradients { layers: grads })
    }

    /// Per-layer feature matrices (weight matrices, one feature per output
    /// unit), named `dense_0`, `dense_1`, ... The output layer is included
    /// only when asked.
    pub fn feature_matrices(&self, include_output: bool) -> Vec<FeatureMatrix> {
        let take = if include_output {
            self.layers.len()
        } else {
            self.layers.len() - 1
        };
        self.layers[..take]
            .iter()
            .enumerate()
            .map(|(l, layer)| {
                FeatureMatrix::new(layer_name(l), layer.weights.clone())
                    .expect("layers are non-empty")
            })
            .collect()
    }
}

pub fn layer_name(index: usize) -> String {
    format!("dense_{index}")
}

/// Mean cross-entropy of softmax(logits) and its gradient with respect to
/// the logits, `(softmax - onehot) / B`.
pub fn softmax_xent(logits: &Matrix, labels: &[usize]) -> Result<(f64, Matrix)> {
    let (b, k) = logits.shape();
    if labels.len() != b {
        return Err(Error::Shape(format!(
            "{} labels for {b} rows",
            labels.len()
        )));
    }
    if b == 0 {
        return Err(Error::Empty("batch"));
    }
    if let Some(&label) = labels.iter().find(|&&y| y >= k) {
        return Err(Error::LabelOutOfRange { label, classes: k });
    }
    let mut grad = Matrix::zeros(b, k);
    let mut loss = 0.0;
    for (r, &y) in labels.iter().enumerate() {
        let row = logits.row(r);
        let max = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let g = grad.row_mut(r);
        let mut sum = 0.0;
        for (gi, &z) in g.iter_mut().zip(row) {
            *gi = (z - max).exp();
            sum += *gi;
        }
        loss += sum.ln() - (row[y] - max);
        for gi in g.iter_mut() {
            *gi /= sum * b as f64;
        }
        g[y] -= 1.0 / b as f64;
    }
    Ok((loss / b as f64, grad))
}

/// Index of the largest logit in each row.
pub fn argmax_rows(logits: &Matrix) -> Vec<usize> {
    (0..logits.rows())
        .map(|r| {
            let row = logits.row(r);
            let mut best = 0;
            for (j, &v) in row.iter().enumerate() {
                if v > row[best] {
                    best = j;
                }
            }
            best
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn random_matrix(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> Matrix {
        let data = (0..rows * cols)
            .map(|_| rng.random_range(-1.0..1.0))
            .collect();
        Matrix::from_vec(rows, cols, data).unwrap()
    }

    fn random_model(dims: &[usize], act: Activation, rng: &mut ChaCha8Rng) -> MlpModel {
        let layers = dims
            .windows(2)
            .enumerate()
            .map(|(l, d)| DenseLayer {
                weights: random_matrix(d[0], d[1], rng),
                bias: (0..d[1]).map(|_| rng.random_range(-0.5..0.5)).collect(),
                activation: (l + 2 < dims.len()).then_some(act),
            })
            .collect();
        MlpModel::new(layers).unwrap()
    }

    /// Per-sample, per-unit loops with no matrix kernels.
    fn straight_line_forward(m: &MlpModel, batch: &Matrix) -> Matrix {
        let mut out = Vec::new();
        for r in 0..batch.rows() {
            let mut x = batch.row(r).to_vec();
            for layer in m.layers() {
                let mut y = Vec::with_capacity(layer.fan_out());
                for j in 0..layer.fan_out() {
                    let mut s = layer.bias[j];
                    for (i, xi) in x.iter().enumerate() {
                        s += xi * layer.weights.get(i, j);
                    }
                    y.push(layer.activation.map_or(s, |a| a.apply_scalar(s)));
                }
                x = y;
            }
            out.push(x);
        }
        Matrix::from_rows(&out).unwrap()
    }

    #[test]
    fn zero_model_gives_zero_logits() {
        let m = MlpModel::new(vec![
            DenseLayer {
                weights: Matrix::zeros(3, 4),
                bias: vec![0.0; 4],
                activation: Some(Activation::Tanh),
            },
            DenseLayer {
                weights: Matrix::zeros(4, 2),
                bias: vec![0.0; 2],
                activation: None,
            },
        ])
        .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let (logits, _) = m.forward(&random_matrix(5, 3, &mut rng)).unwrap();
        assert!(logits.as_slice().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn single_linear_layer_by_hand() {
        let m = MlpModel::new(vec![DenseLayer {
            weights: Matrix::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap(),
            bias: vec![0.5, -1.0],
            activation: None,
        }])
        .unwrap();
        let x = Matrix::from_rows(&[vec![1.0, 0.0], vec![1.0, 1.0]]).unwrap();
        let (logits, cache) = m.forward(&x).unwrap();
        assert_eq!(logits.as_slice(), &[1.5, 1.0, 4.5, 5.0]);

        // dW = xᵀ g, db = column sums of g.
        let g = Matrix::from_rows(&[vec![1.0, 0.0], vec![0.0, 2.0]]).unwrap();
        let grads = m.backward(&cache, &g).unwrap();
        assert_eq!(grads.layers[0].weights.as_slice(), &[1.0, 2.0, 0.0, 2.0]);
        assert_eq!(grads.layers[0].bias, vec![1.0, 2.0]);
    }

    #[test]
    fn forward_matches_straight_line_version() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for act in Activation::all() {
            let m = random_model(&[6, 9, 7, 4], act, &mut rng);
            let x = random_matrix(5, 6, &mut rng);
            let (logits, _) = m.forward(&x).unwrap();
            assert!(logits.max_abs_diff(&straight_line_forward(&m, &x)) <= 1e-12);
            assert_eq!(m.predict(&x).unwrap(), logits);
        }
    }

    #[test]
    fn forward_rejects_wrong_width() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let m = random_model(&[4, 3, 2], Activation::ReLU, &mut rng);
        assert!(m.forward(&Matrix::zeros(2, 5)).is_err());
    }

    #[test]
    fn zero_upstream_gives_zero_gradients() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let m = random_model(&[4, 5, 3], Activation::Sigmoid, &mut rng);
        let (_, cache) = m.forward(&random_matrix(3, 4, &mut rng)).unwrap();
        let grads = m.backward(&cache, &Matrix::zeros(3, 3)).unwrap();
        for g in grads.layers {
            assert!(g.weights.as_slice().iter().all(|&v| v == 0.0));
            assert!(g.bias.iter().all(|&v| v == 0.0));
        }
    }

    #[test]
    fn stale_cache_rejected() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = random_model(&[4, 5, 3], Activation::Tanh, &mut rng);
        let b = random_model(&[4, 6, 3], Activation::Tanh, &mut rng);
        let (_, cache) = a.forward(&random_matrix(2, 4, &mut rng)).unwrap();
        assert!(b.backward(&cache, &Matrix::zeros(2, 3)).is_err());
        assert!(a.backward(&cache, &Matrix::zeros(3, 3)).is_err());
    }

    #[test]
    fn model_validation() {
        let bad = vec![
            DenseLayer {
                weights: Matrix::zeros(3, 4),
                bias: vec![0.0; 4],
                activation: None,
            },
            DenseLayer {
                weights: Matrix::zeros(5, 2),
                bias: vec![0.0; 2],
                activation: None,
            },
        ];
        assert!(MlpModel::new(bad).is_err());
        assert!(MlpModel::new(vec![]).is_err());
    }

    #[test]
    fn xent_uniform_and_saturated() {
        let (loss, _) = softmax_xent(&Matrix::zeros(3, 10), &[0, 4, 9]).unwrap();
        assert!((loss - 10f64.ln()).abs() < 1e-14);
        let logits = Matrix::from_rows(&[vec![800.0, 0.0, 0.0]]).unwrap();
        let (loss, grad) = softmax_xent(&logits, &[0]).unwrap();
        assert!(loss.abs() < 1e-300 && loss >= 0.0);
        assert!(grad.as_slice().iter().all(|v| v.abs() < 1e-300));
        assert!(matches!(
            softmax_xent(&Matrix::zeros(1, 3), &[3]),
            Err(Error::LabelOutOfRange {
                label: 3,
                classes: 3
            })
        ));
    }

    #[test]
    fn xent_gradient_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let logits = random_matrix(4, 5, &mut rng);
        let labels = [1, 0, 4, 2];
        let (_, grad) = softmax_xent(&logits, &labels).unwrap();
        let h = 1e-6;
        for i in 0..logits.as_slice().len() {
            let mut p = logits.clone();
            p.as_mut_slice()[i] += h;
            let mut m = logits.clone();
            m.as_mut_slice()[i] -= h;
            let fd = (softmax_xent(&p, &labels).unwrap().0 - softmax_xent(&m, &labels).unwrap().0)
                / (2.0 * h);
            assert!((fd - grad.as_slice()[i]).abs() < 1e-6 * fd.abs().max(1e-2));
        }
    }

    #[test]
    fn init_builds_expected_shapes() {
        let m = MlpModel::init(
            784,
            &[100, 50],
            10,
            Activation::ReLU,
            InitScheme::HeNormal,
            1,
        )
        .unwrap();
        let shapes: Vec<_> = m.layers().iter().map(|l| l.weights.shape()).collect();
        assert_eq!(shapes, vec![(784, 100), (100, 50), (50, 10)]);
        assert!(m.layers()[2].activation.is_none());
        assert_eq!(m.feature_matrices(false).len(), 2);
        assert_eq!(m.feature_matrices(true)[2].layer_name(), "dense_2");
    }

    #[test]
    fn argmax_picks_first_maximum() {
        let m = Matrix::from_rows(&[vec![0.1, 0.3, 0.3], vec![2.0, -1.0, 0.0]]).unwrap();
        assert_eq!(argmax_rows(&m), vec![1, 0]);
    }
}
