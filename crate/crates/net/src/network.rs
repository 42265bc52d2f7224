//! Forward passes, losses and analytic gradients for both head sets.

use ndarray::{Array1, Array2, ArrayD, ArrayView1, ArrayView2, Axis, Ix1, Ix2};

use crate::config::NetConfig;
use crate::elem::Elem;
use crate::layers::{col2im3, flatten_per_sample, im2col3, unflatten_per_sample};
use crate::params::{Params, TensorKind};
use crate::NetError;

#[derive(Debug, Clone)]
pub struct Network<T: Elem> {
    pub config: NetConfig,
    pub params: Params<T>,
}

/// Softmaxed outputs of the policy/value head set.
#[derive(Debug, Clone)]
pub struct AzOutput<T: Elem> {
    /// One probability row per sample, length `cells`.
    pub policy: Array2<T>,
    /// Per player: one probability row per sample, length `score_bins`.
    pub value: Vec<Array2<T>>,
}

/// Training batch for the policy/value heads. `policy_mask` weighs each
/// sample's policy term (0 for positions without a search target).
#[derive(Debug, Clone)]
pub struct AzBatch<T: Elem> {
    pub x: Array2<T>,
    pub policy_targets: Array2<T>,
    pub policy_mask: Array1<T>,
    pub value_targets: Vec<Array2<T>>,
}

/// Training batch for the score-regression head.
#[derive(Debug, Clone)]
pub struct DescentBatch<T: Elem> {
    pub x: Array2<T>,
    pub targets: Array2<T>,
}

/// Mean of a score distribution over bins 0..=cells.
pub fn expected_score<T: Elem>(dist: ArrayView1<T>) -> f64 {
    dist.iter()
        .enumerate()
        .map(|(i, &p)| i as f64 * p.as_f64())
        .sum()
}

struct BlockTape<T: Elem> {
    h1: Array2<T>,
    out: Array2<T>,
}

struct TrunkTape<T: Elem> {
    x: Array2<T>,
    a_in: Array2<T>,
    blocks: Vec<BlockTape<T>>,
}

impl<T: Elem> TrunkTape<T> {
    fn last(&self) -> &Array2<T> {
        self.blocks.last().map(|b| &b.out).unwrap_or(&self.a_in)
    }
}

struct AzTrace<T: Elem> {
    trunk: TrunkTape<T>,
    flat: Array2<T>,
    policy_logits: Array2<T>,
    value_hidden: Vec<Array2<T>>,
    value_logits: Vec<Array2<T>>,
}

struct DescentTrace<T: Elem> {
    trunk: TrunkTape<T>,
    flat: Array2<T>,
    out: Array2<T>,
}

fn relu_inplace<T: Elem>(a: &mut Array2<T>) {
    a.mapv_inplace(|v| if v > T::zero() { v } else { T::zero() });
}

/// d(post-relu activation) -> d(pre-activation), masking where out == 0.
fn relu_backward<T: Elem>(d: &mut Array2<T>, out: &Array2<T>) {
    d.zip_mut_with(out, |g, &o| {
        if o <= T::zero() {
            *g = T::zero();
        }
    });
}

fn add_bias_rows<T: Elem>(z: &mut Array2<T>, b: ArrayView1<T>) {
    for (mut row, &bi) in z.outer_iter_mut().zip(b.iter()) {
        row.mapv_inplace(|v| v + bi);
    }
}

fn add_bias_cols<T: Elem>(z: &mut Array2<T>, b: ArrayView1<T>) {
    for mut row in z.outer_iter_mut() {
        row.zip_mut_with(&b, |v, &bi| *v = *v + bi);
    }
}

fn softmax_rows<T: Elem>(logits: &Array2<T>) -> Array2<T> {
    let mut out = logits.clone();
    for mut row in out.outer_iter_mut() {
        let max = row.iter().cloned().fold(T::neg_infinity(), T::max);
        row.mapv_inplace(|v| (v - max).exp());
        let sum = row.sum();
        row.mapv_inplace(|v| v / sum);
    }
    out
}

/// Cross-entropy of softmax(logits) against simplex targets, one weight per
/// row. Returns the weighted loss sum and the gradient at the logits.
fn weighted_softmax_ce<T: Elem>(
    logits: &Array2<T>,
    targets: &Array2<T>,
    weights: &Array1<T>,
) -> (f64, Array2<T>) {
    let mut grad = Array2::<T>::zeros(logits.raw_dim());
    let mut loss = 0.0f64;
    for ((z_row, t_row), (&w, mut g_row)) in logits
        .outer_iter()
        .zip(targets.outer_iter())
        .zip(weights.iter().zip(grad.outer_iter_mut()))
    {
        if w == T::zero() {
            continue;
        }
        let max = z_row.iter().cloned().fold(T::neg_infinity(), T::max);
        let mut sum = T::zero();
        for &z in z_row.iter() {
            sum = sum + (z - max).exp();
        }
        let lse = max + sum.ln();
        let mut dot = 0.0f64;
        for (&z, &t) in z_row.iter().zip(t_row.iter()) {
            dot += z.as_f64() * t.as_f64();
        }
        loss += w.as_f64() * (lse.as_f64() - dot);
        for ((g, &z), &t) in g_row.iter_mut().zip(z_row.iter()).zip(t_row.iter()) {
            let p = (z - lse).exp();
            *g = w * (p - t);
        }
    }
    (loss, grad)
}

fn add2<T: Elem>(grad: &mut ArrayD<T>, d: &Array2<T>) {
    let mut view = grad.view_mut().into_dimensionality::<Ix2>().expect("2d grad");
    view.zip_mut_with(d, |a, &b| *a = *a + b);
}

fn add1<T: Elem>(grad: &mut ArrayD<T>, d: &Array1<T>) {
    let mut view = grad.view_mut().into_dimensionality::<Ix1>().expect("1d grad");
    view.zip_mut_with(d, |a, &b| *a = *a + b);
}

impl<T: Elem> Network<T> {
    /// Fresh network with fan-in uniform weights drawn from `seed`.
    pub fn new(config: NetConfig, seed: u64) -> Network<T> {
        Network {
            params: Params::init(&config, seed),
            config,
        }
    }

    fn mat(&self, i: usize) -> ArrayView2<'_, T> {
        self.params
            .tensor(i)
            .view()
            .into_dimensionality::<Ix2>()
            .expect("matrix tensor")
    }

    fn vec(&self, i: usize) -> ArrayView1<'_, T> {
        self.params
            .tensor(i)
            .view()
            .into_dimensionality::<Ix1>()
            .expect("vector tensor")
    }

    fn batch_of(&self, x: &Array2<T>) -> Result<usize, NetError> {
        let cells = self.config.cells();
        if x.nrows() != self.config.in_channels() || x.ncols() % cells != 0 {
            return Err(NetError::ShapeMismatch(format!(
                "input {:?}, expected ({}, k*{cells})",
                x.shape(),
                self.config.in_channels()
            )));
        }
        Ok(x.ncols() / cells)
    }

    fn conv3(&self, idx: (usize, usize), input: &Array2<T>, batch: usize) -> Array2<T> {
        let cols = im2col3(input, batch, self.config.size);
        let mut z = self.mat(idx.0).dot(&cols);
        add_bias_rows(&mut z, self.vec(idx.1));
        z
    }

    fn trunk_forward(&self, x: &Array2<T>, batch: usize) -> TrunkTape<T> {
        let mut a_in = self.conv3(self.params.layout.input, x, batch);
        relu_inplace(&mut a_in);
        let mut blocks = Vec::with_capacity(self.config.blocks);
        let mut prev = &a_in;
        for block in &self.params.layout.blocks {
            let mut h1 = self.conv3(block.0, prev, batch);
            relu_inplace(&mut h1);
            let mut out = self.conv3(block.1, &h1, batch);
            out.zip_mut_with(prev, |o, &p| *o = *o + p);
            relu_inplace(&mut out);
            blocks.push(BlockTape { h1, out });
            prev = &blocks.last().expect("just pushed").out;
        }
        TrunkTape {
            x: x.clone(),
            a_in,
            blocks,
        }
    }

    /// Backpropagate `d_last` (gradient at the final trunk activation) into
    /// `grads`, accumulating per-tensor gradients.
    fn trunk_backward(&self, tape: &TrunkTape<T>, d_last: Array2<T>, grads: &mut [ArrayD<T>]) {
        let batch = tape.x.ncols() / self.config.cells();
        let size = self.config.size;
        let mut d = d_last;
        for (i, block) in self.params.layout.blocks.iter().enumerate().rev() {
            let tape_block = &tape.blocks[i];
            let prev = if i == 0 { &tape.a_in } else { &tape.blocks[i - 1].out };
            relu_backward(&mut d, &tape_block.out);
            // conv2: z2 = w2 * im2col(h1); out = relu(z2 + prev)
            let cols2 = im2col3(&tape_block.h1, batch, size);
            add2(&mut grads[block.1 .0], &d.dot(&cols2.t()));
            add1(&mut grads[block.1 .1], &d.sum_axis(Axis(1)));
            let mut d_h1 = col2im3(&self.mat(block.1 .0).t().dot(&d).to_owned(), batch, size);
            relu_backward(&mut d_h1, &tape_block.h1);
            let cols1 = im2col3(prev, batch, size);
            add2(&mut grads[block.0 .0], &d_h1.dot(&cols1.t()));
            add1(&mut grads[block.0 .1], &d_h1.sum_axis(Axis(1)));
            let mut d_prev = col2im3(&self.mat(block.0 .0).t().dot(&d_h1).to_owned(), batch, size);
            // identity skip
            d_prev.zip_mut_with(&d, |a, &b| *a = *a + b);
            d = d_prev;
        }
        relu_backward(&mut d, &tape.a_in);
        let cols = im2col3(&tape.x, batch, size);
        let input = self.params.layout.input;
        add2(&mut grads[input.0], &d.dot(&cols.t()));
        add1(&mut grads[input.1], &d.sum_axis(Axis(1)));
    }

    fn az_trace(&self, x: &Array2<T>) -> Result<AzTrace<T>, NetError> {
        let batch = self.batch_of(x)?;
        let cells = self.config.cells();
        let trunk = self.trunk_forward(x, batch);
        let last = trunk.last();

        // Policy head: 1x1 convolution to a single plane of logits.
        let policy_idx = self.params.layout.policy;
        let mut z = self.mat(policy_idx.0).dot(last);
        add_bias_rows(&mut z, self.vec(policy_idx.1));
        let policy_logits = z
            .into_shape_with_order((batch, cells))
            .expect("policy reshape");

        let flat = flatten_per_sample(last, batch);
        let mut value_hidden = Vec::with_capacity(self.config.players);
        let mut value_logits = Vec::with_capacity(self.config.players);
        for head in &self.params.layout.value {
            let mut h = flat.dot(&self.mat(head.0 .0).t());
            add_bias_cols(&mut h, self.vec(head.0 .1));
            relu_inplace(&mut h);
            let mut logits = h.dot(&self.mat(head.1 .0).t());
            add_bias_cols(&mut logits, self.vec(head.1 .1));
            value_hidden.push(h);
            value_logits.push(logits);
        }
        Ok(AzTrace {
            trunk,
            flat,
            policy_logits,
            value_hidden,
            value_logits,
        })
    }

    /// Policy and per-player score distributions. Deterministic; every
    /// softmax row sums to 1.
    pub fn forward_az(&self, x: &Array2<T>) -> Result<AzOutput<T>, NetError> {
        let trace = self.az_trace(x)?;
        Ok(AzOutput {
            policy: softmax_rows(&trace.policy_logits),
            value: trace.value_logits.iter().map(softmax_rows).collect(),
        })
    }

    fn descent_trace(&self, x: &Array2<T>) -> Result<DescentTrace<T>, NetError> {
        let batch = self.batch_of(x)?;
        let trunk = self.trunk_forward(x, batch);
        let flat = flatten_per_sample(trunk.last(), batch);
        let descent = self.params.layout.descent;
        let mut out = flat.dot(&self.mat(descent.0).t());
        add_bias_cols(&mut out, self.vec(descent.1));
        Ok(DescentTrace { trunk, flat, out })
    }

    /// Linear score regression: one row of `players` unbounded reals per
    /// sample.
    pub fn forward_descent(&self, x: &Array2<T>) -> Result<Array2<T>, NetError> {
        Ok(self.descent_trace(x)?.out)
    }

    /// Tensor indices participating in each loss's L2 term: trunk plus the
    /// heads the loss trains. Only weights, never biases.
    fn l2_indices(&self, descent: bool) -> Vec<usize> {
        let layout = &self.params.layout;
        let mut idx = vec![layout.input.0];
        for b in &layout.blocks {
            idx.push(b.0 .0);
            idx.push(b.1 .0);
        }
        if descent {
            idx.push(layout.descent.0);
        } else {
            idx.push(layout.policy.0);
            for head in &layout.value {
                idx.push(head.0 .0);
                idx.push(head.1 .0);
            }
        }
        debug_assert!(idx
            .iter()
            .all(|&i| self.params.meta(i).kind == TensorKind::Weight));
        idx
    }

    fn l2_loss(&self, indices: &[usize]) -> f64 {
        let sum: f64 = indices
            .iter()
            .map(|&i| self.params.tensor(i).iter().map(|v| v.as_f64() * v.as_f64()).sum::<f64>())
            .sum();
        self.config.l2 * sum
    }

    fn l2_grads(&self, indices: &[usize], grads: &mut [ArrayD<T>]) {
        let two_l2 = T::from_f64(2.0 * self.config.l2);
        for &i in indices {
            let w = self.params.tensor(i);
            grads[i].zip_mut_with(w, |g, &v| *g = *g + two_l2 * v);
        }
    }

    fn check_az_batch(&self, batch: &AzBatch<T>) -> Result<usize, NetError> {
        let b = self.batch_of(&batch.x)?;
        let cells = self.config.cells();
        let bins = self.config.score_bins();
        if batch.policy_targets.shape() != [b, cells]
            || batch.policy_mask.len() != b
            || batch.value_targets.len() != self.config.players
            || batch.value_targets.iter().any(|t| t.shape() != [b, bins])
        {
            return Err(NetError::ShapeMismatch(format!(
                "AZ batch of {b} samples has inconsistent target shapes"
            )));
        }
        Ok(b)
    }

    /// Cross-entropy of the policy head (mean over masked samples) plus the
    /// sum over players of value-head cross-entropies (mean over the batch)
    /// plus the L2 term.
    pub fn loss_az(&self, batch: &AzBatch<T>) -> Result<f64, NetError> {
        Ok(self.az_loss_and_grads(batch, false)?.0)
    }

    /// Loss plus per-tensor gradients.
    pub fn grad_az(&self, batch: &AzBatch<T>) -> Result<(f64, Vec<ArrayD<T>>), NetError> {
        let (loss, grads) = self.az_loss_and_grads(batch, true)?;
        Ok((loss, grads.expect("gradients requested")))
    }

    fn az_loss_and_grads(
        &self,
        batch: &AzBatch<T>,
        want_grads: bool,
    ) -> Result<(f64, Option<Vec<ArrayD<T>>>), NetError> {
        let b = self.check_az_batch(batch)?;
        let trace = self.az_trace(&batch.x)?;
        let cells = self.config.cells();

        // Policy: weight each sample by mask / max(1, #masked).
        let masked: f64 = batch.policy_mask.iter().map(|m| m.as_f64()).sum();
        let policy_denom = if masked > 0.0 { masked } else { 1.0 };
        let policy_weights = batch
            .policy_mask
            .mapv(|m| m * T::from_f64(1.0 / policy_denom));
        let (policy_loss, d_policy_logits) =
            weighted_softmax_ce(&trace.policy_logits, &batch.policy_targets, &policy_weights);

        // Value heads: plain batch mean per player, summed over players.
        let value_weights = Array1::from_elem(b, T::from_f64(1.0 / b as f64));
        let mut value_loss = 0.0;
        let mut d_value_logits = Vec::with_capacity(self.config.players);
        for (logits, targets) in trace.value_logits.iter().zip(&batch.value_targets) {
            let (loss, grad) = weighted_softmax_ce(logits, targets, &value_weights);
            value_loss += loss;
            d_value_logits.push(grad);
        }

        let l2_idx = self.l2_indices(false);
        let loss = policy_loss + value_loss + self.l2_loss(&l2_idx);
        if !want_grads {
            return Ok((loss, None));
        }

        let mut grads = self.params.grad_zeros();
        let last = trace.trunk.last();

        // Policy head backward.
        let policy_idx = self.params.layout.policy;
        let d_z = d_policy_logits
            .into_shape_with_order((1, b * cells))
            .expect("policy grad reshape");
        add2(&mut grads[policy_idx.0], &d_z.dot(&last.t()));
        add1(&mut grads[policy_idx.1], &d_z.sum_axis(Axis(1)));
        let mut d_last = self.mat(policy_idx.0).t().dot(&d_z);

        // Value heads backward.
        let mut d_flat = Array2::<T>::zeros(trace.flat.raw_dim());
        for ((head, d_logits), h) in self
            .params
            .layout
            .value
            .iter()
            .zip(d_value_logits)
            .zip(&trace.value_hidden)
        {
            add2(&mut grads[head.1 .0], &d_logits.t().dot(h));
            add1(&mut grads[head.1 .1], &d_logits.sum_axis(Axis(0)));
            let mut d_h = d_logits.dot(&self.mat(head.1 .0));
            relu_backward(&mut d_h, h);
            add2(&mut grads[head.0 .0], &d_h.t().dot(&trace.flat));
            add1(&mut grads[head.0 .1], &d_h.sum_axis(Axis(0)));
            d_flat.zip_mut_with(&d_h.dot(&self.mat(head.0 .0)), |a, &v| *a = *a + v);
        }
        let d_from_flat = unflatten_per_sample(&d_flat, self.config.filters, b);
        d_last.zip_mut_with(&d_from_flat, |a, &v| *a = *a + v);

        self.trunk_backward(&trace.trunk, d_last, &mut grads);
        self.l2_grads(&l2_idx, &mut grads);
        Ok((loss, Some(grads)))
    }

    /// Mean squared error over batch and players, plus the L2 term.
    pub fn loss_descent(&self, batch: &DescentBatch<T>) -> Result<f64, NetError> {
        Ok(self.descent_loss_and_grads(batch, false)?.0)
    }

    pub fn grad_descent(&self, batch: &DescentBatch<T>) -> Result<(f64, Vec<ArrayD<T>>), NetError> {
        let (loss, grads) = self.descent_loss_and_grads(batch, true)?;
        Ok((loss, grads.expect("gradients requested")))
    }

    fn descent_loss_and_grads(
        &self,
        batch: &DescentBatch<T>,
        want_grads: bool,
    ) -> Result<(f64, Option<Vec<ArrayD<T>>>), NetError> {
        let b = self.batch_of(&batch.x)?;
        if batch.targets.shape() != [b, self.config.players] {
            return Err(NetError::ShapeMismatch(format!(
                "descent targets {:?}, expected ({b}, {})",
                batch.targets.shape(),
                self.config.players
            )));
        }
        let trace = self.descent_trace(&batch.x)?;
        let denom = (b * self.config.players) as f64;
        let mut mse = 0.0f64;
        for (&o, &t) in trace.out.iter().zip(batch.targets.iter()) {
            let d = o.as_f64() - t.as_f64();
            mse += d * d;
        }
        mse /= denom;
        let l2_idx = self.l2_indices(true);
        let loss = mse + self.l2_loss(&l2_idx);
        if !want_grads {
            return Ok((loss, None));
        }

        let scale = T::from_f64(2.0 / denom);
        let mut d_out = trace.out.clone();
        d_out.zip_mut_with(&batch.targets, |o, &t| *o = (*o - t) * scale);

        let mut grads = self.params.grad_zeros();
        let descent = self.params.layout.descent;
        add2(&mut grads[descent.0], &d_out.t().dot(&trace.flat));
        add1(&mut grads[descent.1], &d_out.sum_axis(Axis(0)));
        let d_flat = d_out.dot(&self.mat(descent.0));
        let d_last = unflatten_per_sample(&d_flat, self.config.filters, b);
        self.trunk_backward(&trace.trunk, d_last, &mut grads);
        self.l2_grads(&l2_idx, &mut grads);
        Ok((loss, Some(grads)))
    }
}
