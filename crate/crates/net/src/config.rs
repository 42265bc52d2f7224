//! Architecture hyperparameters for the residual trunk and heads.

/// Shapes of the trunk and heads. The defaults are the full-size network;
/// tests and desk-scale runs shrink `blocks`/`filters`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NetConfig {
    /// Board side length; the policy head emits `size * size` logits.
    pub size: usize,
    /// Player count; encodings carry `2 * players` channels and the value
    /// heads emit one output per player.
    pub players: usize,
    /// Residual blocks in the trunk.
    pub blocks: usize,
    /// Convolution filters throughout the trunk.
    pub filters: usize,
    /// Width of each parallel hidden layer in the softmax score heads.
    pub value_hidden: usize,
    /// L2 coefficient applied to convolution and dense weights (not biases).
    pub l2: f64,
}

impl Default for NetConfig {
    fn default() -> Self {
        NetConfig {
            size: 5,
            players: 3,
            blocks: 8,
            filters: 128,
            value_hidden: 128,
            l2: 1e-4,
        }
    }
}

impl NetConfig {
    /// Small configuration for numerical tests: one block, eight filters.
    pub fn tiny() -> Self {
        NetConfig {
            blocks: 1,
            filters: 8,
            value_hidden: 16,
            ..NetConfig::default()
        }
    }

    pub fn in_channels(&self) -> usize {
        2 * self.players
    }

    pub fn cells(&self) -> usize {
        self.size * self.size
    }

    /// Number of score bins per player: integer scores 0..=size^2.
    pub fn score_bins(&self) -> usize {
        self.cells() + 1
    }
}
