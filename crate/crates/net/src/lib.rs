//! Board encoding and the residual policy/value networks.
//!
//! The trunk is a stack of plain conv+ReLU residual blocks shared by two
//! head sets: a policy head (1x1 convolution to one plane of logits) with
//! three 26-way softmax score heads, and a value-only head regressing the
//! three player scores linearly. Forward and backward passes are written
//! against ndarray matrix products; everything is generic over `f32`/`f64`
//! so numerical tests can run the same code in double precision.

mod checkpoint;
mod config;
mod elem;
mod encoding;
mod layers;
mod network;
mod optim;
mod params;

pub use checkpoint::{load_checkpoint, save_checkpoint, Checkpoint, CHECKPOINT_VERSION};
pub use config::NetConfig;
pub use elem::Elem;
pub use encoding::{encode, encodings_to_batch, Encoding};
pub use network::{expected_score, AzBatch, AzOutput, DescentBatch, Network};
pub use optim::{train_step, Batch, OptState, OptimizerKind, TrainSettings};
pub use params::{Params, TensorKind};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum NetError {
    #[error("encoding requires a 5x5 board with 3 players, got {size}x{size} with {players}")]
    UnsupportedBoard { size: usize, players: usize },
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("non-finite loss: {0}")]
    NonFiniteLoss(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("corrupt checkpoint: {0}")]
    CorruptCheckpoint(String),
    #[error("unsupported checkpoint version {found} (supported: {supported})")]
    UnsupportedVersion { found: u32, supported: u32 },
}
