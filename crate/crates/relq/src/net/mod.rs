//! The Q-value network: a fully connected ReLU net with a scalar linear
//! output, trained by Adam on mean squared error. Parameters live in one
//! flat array, which keeps the optimizer, checkpointing, and the gradient
//! checks in the test suite simple.

#![allow(clippy::needless_range_loop)]

mod checkpoint;
mod replay;

pub use checkpoint::{load_checkpoint, save_checkpoint};
pub use replay::{ReplayBuffer, Transition};

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::{Error, Result, seed};

/// Architecture and optimizer constants.
#[derive(Debug, Clone, PartialEq)]
pub struct NetConfig {
    pub hidden: Vec<usize>,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for NetConfig {
    fn default() -> Self {
        NetConfig {
            hidden: vec![64, 64],
            learning_rate: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

/// Adam over one flat parameter array.
#[derive(Debug, Clone)]
pub struct Adam {
    m: Vec<f64>,
    v: Vec<f64>,
    t: u64,
    beta1: f64,
    beta2: f64,
    epsilon: f64,
}

impl Adam {
    pub fn new(len: usize, beta1: f64, beta2: f64, epsilon: f64) -> Adam {
        Adam { m: vec![0.0; len], v: vec![0.0; len], t: 0, beta1, beta2, epsilon }
    }

    pub fn steps(&self) -> u64 {
        self.t
    }

    /// One update: first/second moment tracking with bias correction.
    pub fn step(&mut self, params: &mut [f64], grads: &[f64], lr: f64) {
        debug_assert_eq!(params.len(), grads.len());
        self.t += 1;
        let bc1 = 1.0 - self.beta1.powi(self.t as i32);
        let bc2 = 1.0 - self.beta2.powi(self.t as i32);
        for i in 0..params.len() {
            let g = grads[i];
            self.m[i] = self.beta1 * self.m[i] + (1.0 - self.beta1) * g;
            self.v[i] = self.beta2 * self.v[i] + (1.0 - self.beta2) * g * g;
            let m_hat = self.m[i] / bc1;
            let v_hat = self.v[i] / bc2;
            params[i] -= lr * m_hat / (v_hat.sqrt() + self.epsilon);
        }
    }
}

/// Offsets of one layer's weights and biases in the flat parameter array.
#[derive(Debug, Clone, Copy)]
struct LayerSpan {
    w: usize,
    b: usize,
    rows: usize,
    cols: usize,
}

/// The Q-value approximator. Input is an encoded `(state, action)` pair;
/// output is one scalar.
#[derive(Debug, Clone)]
pub struct QNet {
    dims: Vec<usize>,
    spans: Vec<LayerSpan>,
    params: Vec<f64>,
    adam: Adam,
    config: NetConfig,
}

impl QNet {
    /// A fresh network with uniform fan-in-scaled weights from a seeded RNG.
    pub fn new(input_len: usize, config: NetConfig, net_seed: u64) -> QNet {
        let mut dims = vec![input_len];
        dims.extend(&config.hidden);
        dims.push(1);
        let mut net = QNet::zeroed(dims, config);
        let mut rng: ChaCha8Rng = seed::rng(net_seed, &[]);
        for span in net.spans.clone() {
            let bound = 1.0 / (span.cols as f64).sqrt();
            for i in 0..span.rows * span.cols {
                net.params[span.w + i] = rng.gen_range(-bound..bound);
            }
            for i in 0..span.rows {
                net.params[span.b + i] = rng.gen_range(-bound..bound);
            }
        }
        net
    }

    fn zeroed(dims: Vec<usize>, config: NetConfig) -> QNet {
        let mut spans = Vec::new();
        let mut offset = 0;
        for l in 0..dims.len() - 1 {
            let (rows, cols) = (dims[l + 1], dims[l]);
            spans.push(LayerSpan { w: offset, b: offset + rows * cols, rows, cols });
            offset += rows * cols + rows;
        }
        let adam = Adam::new(offset, config.beta1, config.beta2, config.epsilon);
        QNet { dims, spans, params: vec![0.0; offset], adam, config }
    }

    /// Rebuilds a network from explicit dimensions and parameters, with a
    /// fresh optimizer state. Used by checkpoint loading.
    pub fn from_parts(dims: Vec<usize>, params: Vec<f64>, config: NetConfig) -> Result<QNet> {
        if dims.len() < 2 || *dims.last().unwrap() != 1 {
            return Err(Error::validation("network needs at least two layers and one output"));
        }
        let mut net = QNet::zeroed(dims, config);
        if params.len() != net.params.len() {
            return Err(Error::Dimension { expected: net.params.len(), got: params.len() });
        }
        net.params = params;
        Ok(net)
    }

    pub fn input_len(&self) -> usize {
        self.dims[0]
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn config(&self) -> &NetConfig {
        &self.config
    }

    pub fn num_params(&self) -> usize {
        self.params.len()
    }

    /// Flat copy of all parameters, layer by layer (weights then biases).
    pub fn params(&self) -> Vec<f64> {
        self.params.clone()
    }

    pub fn set_params(&mut self, params: &[f64]) -> Result<()> {
        if params.len() != self.params.len() {
            return Err(Error::Dimension { expected: self.params.len(), got: params.len() });
        }
        self.params.copy_from_slice(params);
        Ok(())
    }

    /// Deterministic forward pass for one input.
    pub fn predict(&self, input: &[f64]) -> Result<f64> {
        if input.len() != self.dims[0] {
            return Err(Error::Dimension { expected: self.dims[0], got: input.len() });
        }
        let mut current = input.to_vec();
        let mut next = Vec::new();
        for (l, span) in self.spans.iter().enumerate() {
            next.clear();
            next.resize(span.rows, 0.0);
            let last = l == self.spans.len() - 1;
            for r in 0..span.rows {
                let row = &self.params[span.w + r * span.cols..span.w + (r + 1) * span.cols];
                let mut acc = self.params[span.b + r];
                for (x, w) in current.iter().zip(row) {
                    acc += x * w;
                }
                next[r] = if last { acc } else { acc.max(0.0) };
            }
            std::mem::swap(&mut current, &mut next);
        }
        Ok(current[0])
    }

    /// Mean squared error of the current parameters on a batch
    /// (`inputs` is row-major `targets.len() x input_len`).
    pub fn batch_loss(&self, inputs: &[f64], targets: &[f64]) -> Result<f64> {
        let (loss, _) = self.forward_batch(inputs, targets)?;
        Ok(loss)
    }

    /// MSE loss and its gradient with respect to every parameter.
    pub fn loss_gradients(&self, inputs: &[f64], targets: &[f64]) -> Result<(f64, Vec<f64>)> {
        let (loss, activations) = self.forward_batch(inputs, targets)?;
        let grads = self.backward_batch(inputs, targets, &activations);
        Ok((loss, grads))
    }

    /// One Adam step on the batch MSE. Returns the loss before the step.
    pub fn train_minibatch(&mut self, inputs: &[f64], targets: &[f64], lr: f64) -> Result<f64> {
        let (loss, grads) = self.loss_gradients(inputs, targets)?;
        self.adam.step(&mut self.params, &grads, lr);
        Ok(loss)
    }

    /// Post-activation values per layer for a batch, plus the batch loss.
    fn forward_batch(&self, inputs: &[f64], targets: &[f64]) -> Result<(f64, Vec<Vec<f64>>)> {
        let batch = targets.len();
        if batch == 0 {
            return Err(Error::validation("empty batch"));
        }
        if inputs.len() != batch * self.dims[0] {
            return Err(Error::Dimension { expected: batch * self.dims[0], got: inputs.len() });
        }
        let mut activations: Vec<Vec<f64>> = Vec::with_capacity(self.spans.len());
        let mut current: &[f64] = inputs;
        for (l, span) in self.spans.iter().enumerate() {
            let last = l == self.spans.len() - 1;
            let mut out = vec![0.0; batch * span.rows];
            for s in 0..batch {
                let x = &current[s * span.cols..(s + 1) * span.cols];
                let y = &mut out[s * span.rows..(s + 1) * span.rows];
                for r in 0..span.rows {
                    let row =
                        &self.params[span.w + r * span.cols..span.w + (r + 1) * span.cols];
                    let mut acc = self.params[span.b + r];
                    for (xv, wv) in x.iter().zip(row) {
                        acc += xv * wv;
                    }
                    y[r] = if last { acc } else { acc.max(0.0) };
                }
            }
            activations.push(out);
            current = activations.last().unwrap();
        }
        let outputs = activations.last().unwrap();
        let loss = outputs
            .iter()
            .zip(targets)
            .map(|(o, t)| (o - t) * (o - t))
            .sum::<f64>()
            / batch as f64;
        Ok((loss, activations))
    }

    fn backward_batch(
        &self,
        inputs: &[f64],
        targets: &[f64],
        activations: &[Vec<f64>],
    ) -> Vec<f64> {
        let batch = targets.len();
        let mut grads = vec![0.0; self.params.len()];
        // d(loss)/d(output)
        let outputs = activations.last().unwrap();
        let mut delta: Vec<f64> = outputs
            .iter()
            .zip(targets)
            .map(|(o, t)| 2.0 * (o - t) / batch as f64)
            .collect();
        for (l, span) in self.spans.iter().enumerate().rev() {
            let below: &[f64] = if l == 0 { inputs } else { &activations[l - 1] };
            for s in 0..batch {
                let d = &delta[s * span.rows..(s + 1) * span.rows];
                let x = &below[s * span.cols..(s + 1) * span.cols];
                for r in 0..span.rows {
                    let dv = d[r];
                    if dv == 0.0 {
                        continue;
                    }
                    grads[span.b + r] += dv;
                    let grow = &mut grads[span.w + r * span.cols..span.w + (r + 1) * span.cols];
                    for (g, xv) in grow.iter_mut().zip(x) {
                        *g += dv * xv;
                    }
                }
            }
            if l == 0 {
                break;
            }
            // propagate through the weights and the ReLU of the layer below
            let mut next_delta = vec![0.0; batch * span.cols];
            for s in 0..batch {
                let d = &delta[s * span.rows..(s + 1) * span.rows];
                let nd = &mut next_delta[s * span.cols..(s + 1) * span.cols];
                for r in 0..span.rows {
                    let dv = d[r];
                    if dv == 0.0 {
                        continue;
                    }
                    let row =
                        &self.params[span.w + r * span.cols..span.w + (r + 1) * span.cols];
                    for (ndv, wv) in nd.iter_mut().zip(row) {
                        *ndv += dv * wv;
                    }
                }
                let act = &activations[l - 1][s * span.cols..(s + 1) * span.cols];
                for (ndv, av) in nd.iter_mut().zip(act) {
                    if *av <= 0.0 {
                        *ndv = 0.0;
                    }
                }
            }
            delta = next_delta;
        }
        grads
    }
}
