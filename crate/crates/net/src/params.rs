//! Parameter storage: a flat list of named tensors plus an index layout
//! used by the forward/backward passes, the optimizers and the checkpoint
//! writer. Convolution weights are kept in matrix form `(filters,
//! in_channels * k * k)` so convolutions are single matrix products over
//! im2col patches.

use ndarray::{ArrayD, IxDyn};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::NetConfig;
use crate::elem::Elem;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TensorKind {
    Weight,
    Bias,
}

#[derive(Debug, Clone)]
pub struct TensorMeta {
    pub name: String,
    pub kind: TensorKind,
}

/// Tensor indices of each layer, in storage order.
#[derive(Debug, Clone)]
pub(crate) struct Layout {
    pub input: (usize, usize),
    pub blocks: Vec<((usize, usize), (usize, usize))>,
    pub policy: (usize, usize),
    pub value: Vec<((usize, usize), (usize, usize))>,
    pub descent: (usize, usize),
}

#[derive(Debug, Clone)]
pub struct Params<T: Elem> {
    pub(crate) tensors: Vec<ArrayD<T>>,
    meta: Vec<TensorMeta>,
    pub(crate) layout: Layout,
}

struct Builder<T: Elem> {
    tensors: Vec<ArrayD<T>>,
    meta: Vec<TensorMeta>,
}

impl<T: Elem> Builder<T> {
    fn push(&mut self, name: String, kind: TensorKind, shape: &[usize]) -> usize {
        self.tensors.push(ArrayD::zeros(IxDyn(shape)));
        self.meta.push(TensorMeta { name, kind });
        self.tensors.len() - 1
    }

    fn matrix(&mut self, name: &str, rows: usize, cols: usize) -> usize {
        self.push(format!("{name}.w"), TensorKind::Weight, &[rows, cols])
    }

    fn bias(&mut self, name: &str, len: usize) -> usize {
        self.push(format!("{name}.b"), TensorKind::Bias, &[len])
    }
}

impl<T: Elem> Params<T> {
    /// All-zero parameters with the layout of `config`.
    pub fn zeros(config: &NetConfig) -> Params<T> {
        let mut b = Builder {
            tensors: Vec::new(),
            meta: Vec::new(),
        };
        let f = config.filters;
        let cells = config.cells();
        let input = (
            b.matrix("trunk.in", f, config.in_channels() * 9),
            b.bias("trunk.in", f),
        );
        let mut blocks = Vec::with_capacity(config.blocks);
        for i in 0..config.blocks {
            let c1 = (
                b.matrix(&format!("trunk.res{i}.c1"), f, f * 9),
                b.bias(&format!("trunk.res{i}.c1"), f),
            );
            let c2 = (
                b.matrix(&format!("trunk.res{i}.c2"), f, f * 9),
                b.bias(&format!("trunk.res{i}.c2"), f),
            );
            blocks.push((c1, c2));
        }
        let policy = (b.matrix("policy.conv", 1, f), b.bias("policy.conv", 1));
        let mut value = Vec::with_capacity(config.players);
        for j in 0..config.players {
            let hidden = (
                b.matrix(&format!("value.p{j}.hidden"), config.value_hidden, f * cells),
                b.bias(&format!("value.p{j}.hidden"), config.value_hidden),
            );
            let out = (
                b.matrix(&format!("value.p{j}.out"), config.score_bins(), config.value_hidden),
                b.bias(&format!("value.p{j}.out"), config.score_bins()),
            );
            value.push((hidden, out));
        }
        let descent = (
            b.matrix("descent", config.players, f * cells),
            b.bias("descent", config.players),
        );
        Params {
            tensors: b.tensors,
            meta: b.meta,
            layout: Layout {
                input,
                blocks,
                policy,
                value,
                descent,
            },
        }
    }

    /// Fan-in scaled uniform initialization of all weight matrices from a
    /// fixed seed; biases stay zero. Each weight draws from U(-a, a) with
    /// `a = sqrt(1 / fan_in)`, fan_in being the matrix column count.
    pub fn init(config: &NetConfig, seed: u64) -> Params<T> {
        let mut params = Params::zeros(config);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for (tensor, meta) in params.tensors.iter_mut().zip(&params.meta) {
            if meta.kind != TensorKind::Weight {
                continue;
            }
            let fan_in = tensor.shape()[1];
            let a = (1.0 / fan_in as f64).sqrt();
            for v in tensor.iter_mut() {
                *v = T::from_f64(rng.gen::<f64>() * 2.0 * a - a);
            }
        }
        params
    }

    pub fn len(&self) -> usize {
        self.tensors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tensors.is_empty()
    }

    pub fn tensor(&self, i: usize) -> &ArrayD<T> {
        &self.tensors[i]
    }

    pub fn tensor_mut(&mut self, i: usize) -> &mut ArrayD<T> {
        &mut self.tensors[i]
    }

    pub fn meta(&self, i: usize) -> &TensorMeta {
        &self.meta[i]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.meta.iter().position(|m| m.name == name)
    }

    /// Zero tensors with identical shapes, used for gradients and moments.
    pub fn grad_zeros(&self) -> Vec<ArrayD<T>> {
        self.tensors
            .iter()
            .map(|t| ArrayD::zeros(t.raw_dim()))
            .collect()
    }

    /// Convert element type (used when loading 32-bit checkpoints into a
    /// double-precision network and vice versa).
    pub fn cast<U: Elem>(&self) -> Params<U> {
        Params {
            tensors: self
                .tensors
                .iter()
                .map(|t| t.mapv(|v| U::from_f64(v.as_f64())))
                .collect(),
            meta: self.meta.clone(),
            layout: self.layout.clone(),
        }
    }
}
