//! A small CPU convolutional classifier: same-padded convolutions, ReLU,
//! 2×2 max pooling, a two-layer fully connected head and softmax
//! cross-entropy, trained by mini-batch SGD with momentum.
//!
//! Inputs are flattened `[channel][row][column]` volumes.

mod arch;
mod checkpoint;
pub mod layers;
mod network;
mod train;

pub use arch::{Architecture, ConvBlock};
pub use checkpoint::{load_checkpoint, save_checkpoint, CheckpointManifest};
pub use network::{forward, init_network, loss_and_gradients, predict, Parameters, TrainedNetwork};
pub use train::{sgd_step, train, train_monitored, EpochStats, Hyperparameters};
