use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::activation::Activation;
use super::adam::{AdamParams, AdamState};
use super::init::InitScheme;
use super::mlp::{argmax_rows, softmax_xent, MlpModel};
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::numerics::Matrix;

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub batch_size: usize,
    pub epochs: usize,
    pub seed: u64,
    pub init: InitScheme,
    /// Hidden layer sizes.
    pub widths: Vec<usize>,
    pub activation: Activation,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            batch_size: 128,
            epochs: 10,
            seed: 0,
            init: InitScheme::FixedNormal { std: 0.01 },
            widths: vec![1000],
            activation: Activation::ReLU,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.batch_size == 0 {
            return Err(Error::Config("batch_size must be >= 1".into()));
        }
        if self.epochs == 0 {
            return Err(Error::Config("epochs must be >= 1".into()));
        }
        for (name, b) in [("beta1", self.beta1), ("beta2", self.beta2)] {
            if !(0.0..1.0).contains(&b) {
                return Err(Error::Config(format!("{name} must be in [0, 1), got {b}")));
            }
        }
        if self.learning_rate.is_nan()
            || self.learning_rate <= 0.0
            || self.epsilon.is_nan()
            || self.epsilon <= 0.0
        {
            return Err(Error::Config(
                "learning_rate and epsilon must be > 0".into(),
            ));
        }
        if self.widths.contains(&0) {
            return Err(Error::Config("hidden widths must be >= 1".into()));
        }
        self.init.validate()?;
        self.activation.validate()?;
        Ok(())
    }

    pub fn adam(&self) -> AdamParams {
        AdamParams {
            learning_rate: self.learning_rate,
            beta1: self.beta1,
            beta2: self.beta2,
            epsilon: self.epsilon,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochStats {
    pub epoch: usize,
    /// Mean training loss over the epoch's batches.
    pub loss: f64,
    pub test_accuracy: f64,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub model: MlpModel,
    pub history: Vec<EpochStats>,
}

fn gather(images: &Matrix, idx: &[usize]) -> Matrix {
    let d = images.cols();
    let mut data = Vec::with_capacity(idx.len() * d);
    for &i in idx {
        data.extend_from_slice(images.row(i));
    }
    Matrix::from_raw(idx.len(), d, data)
}

/// Fraction of correctly classified samples, evaluated in chunks.
pub fn accuracy(model: &MlpModel, set: &Dataset) -> Result<f64> {
    if set.is_empty() {
        return Err(Error::Empty("evaluation set"));
    }
    let mut correct = 0usize;
    let all: Vec<usize> = (0..set.len()).collect();
    for chunk in all.chunks(1000) {
        let logits = model.predict(&gather(set.images(), chunk))?;
        correct += argmax_rows(&logits)
            .into_iter()
            .zip(chunk)
            .filter(|(p, &i)| *p == set.labels()[i])
            .count();
    }
    Ok(correct as f64 / set.len() as f64)
}

pub fn train(cfg: &TrainConfig, train_set: &Dataset, test_set: &Dataset) -> Result<TrainOutcome> {
    train_with_progress(cfg, train_set, test_set, |_| {})
}

/// Seeded mini-batch Adam training. Samples are reshuffled every epoch.
pub fn train_with_progress(
    cfg: &TrainConfig,
    train_set: &Dataset,
    test_set: &Dataset,
    mut on_epoch: impl FnMut(&EpochStats),
) -> Result<TrainOutcome> {
    cfg.validate()?;
    if train_set.is_empty() {
        return Err(Error::Empty("training set"));
    }
    if test_set.is_empty() {
        return Err(Error::Empty("test set"));
    }
    if train_set.dim() != test_set.dim() {
        return Err(Error::Shape(format!(
            "train samples have {} features, test samples {}",
            train_set.dim(),
            test_set.dim()
        )));
    }
    let n_classes = train_set.n_classes().max(test_set.n_classes());
    let mut model = MlpModel::init(
        train_set.dim(),
        &cfg.widths,
        n_classes,
        cfg.activation,
        cfg.init,
        cfg.seed,
    )?;
    let hp = cfg.adam();
    let mut adam = AdamState::new(&model);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x5eed_5eed_5eed_5eed);
    let mut order: Vec<usize> = (0..train_set.len()).collect();
    let mut labels = Vec::with_capacity(cfg.batch_size);
    let mut history = Vec::with_capacity(cfg.epochs);

    for epoch in 1..=cfg.epochs {
        order.shuffle(&mut rng);
        let mut loss_sum = 0.0;
        let mut batches = 0usize;
        for idx in order.chunks(cfg.batch_size) {
            let x = gather(train_set.images(), idx);
            labels.clear();
            labels.extend(idx.iter().map(|&i| train_set.labels()[i]));
            let (logits, cache) = model.forward(&x)?;
            let (loss, dlogits) = softmax_xent(&logits, &labels)?;
            let grads = model.backward(&cache, &dlogits)?;
            adam.step(&mut model, &grads, &hp);
            loss_sum += loss;
            batches += 1;
        }
        let stats = EpochStats {
            epoch,
            loss: loss_sum / batches as f64,
            test_accuracy: accuracy(&model, test_set)?,
        };
        on_epoch(&stats);
        history.push(stats);
    }
    Ok(TrainOutcome { model, history })
}
