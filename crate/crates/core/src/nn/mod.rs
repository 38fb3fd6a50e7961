//! From-scratch dense networks: activations, initializers, backprop and Adam.

mod activation;
mod adam;
mod init;
mod mlp;
mod train;

pub use activation::{Activation, SELU_ALPHA, SELU_LAMBDA};
pub use adam::{adam_update, AdamParams, AdamState};
pub use init::{init_weights, InitScheme, TRUNCATED_STD_2SIGMA};
pub use mlp::{
    argmax_rows, layer_name, softmax_xent, DenseLayer, ForwardCache, Gradients, LayerGrads,
    MlpModel,
};
pub use train::{accuracy, train, train_with_progress, EpochStats, TrainConfig, TrainOutcome};
