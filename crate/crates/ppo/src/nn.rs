//! Fully connected network, tanh hidden layers, linear output.
//!
//! Parameters live in one flat vector so the optimizer and gradient checks
//! can treat them uniformly. Layer `l` stores its `out x in` weight matrix
//! row-major followed by `out` biases.

use rand::Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mlp {
    pub sizes: Vec<usize>,
    pub params: Vec<f64>,
}

/// Post-activation values of every layer; `acts[0]` is the input and the
/// last entry is the (linear) output.
#[derive(Debug, Clone)]
pub struct Cache {
    pub acts: Vec<Vec<f64>>,
}

impl Cache {
    pub fn output(&self) -> &[f64] {
        self.acts.last().expect("non-empty")
    }
}

pub fn param_count(sizes: &[usize]) -> usize {
    sizes.windows(2).map(|w| w[0] * w[1] + w[1]).sum()
}

impl Mlp {
    pub fn zeros(sizes: &[usize]) -> Self {
        assert!(sizes.len() >= 2, "need at least input and output sizes");
        Self { sizes: sizes.to_vec(), params: vec![0.0; param_count(sizes)] }
    }

    /// Glorot-uniform weights, zero biases; the output layer is scaled by
    /// `out_gain` (small for policy heads so the initial policy is near uniform).
    pub fn new<R: Rng + ?Sized>(sizes: &[usize], out_gain: f64, rng: &mut R) -> Self {
        let mut net = Self::zeros(sizes);
        let layers = sizes.len() - 1;
        let mut off = 0;
        for l in 0..layers {
            let (n_in, n_out) = (sizes[l], sizes[l + 1]);
            let gain = if l + 1 == layers { out_gain } else { 1.0 };
            let a = gain * (6.0 / (n_in + n_out) as f64).sqrt();
            for w in &mut net.params[off..off + n_in * n_out] {
                *w = rng.random_range(-a..=a);
            }
            off += n_in * n_out + n_out;
        }
        net
    }

    pub fn input_len(&self) -> usize {
        self.sizes[0]
    }

    pub fn output_len(&self) -> usize {
        *self.sizes.last().unwrap()
    }

    pub fn forward(&self, x: &[f64]) -> Vec<f64> {
        self.forward_cached(x).acts.pop().unwrap()
    }

    pub fn forward_cached(&self, x: &[f64]) -> Cache {
        assert_eq!(x.len(), self.input_len(), "input width");
        let layers = self.sizes.len() - 1;
        let mut acts = Vec::with_capacity(layers + 1);
        acts.push(x.to_vec());
        let mut off = 0;
        for l in 0..layers {
            let (n_in, n_out) = (self.sizes[l], self.sizes[l + 1]);
            let w = &self.params[off..off + n_in * n_out];
            let b = &self.params[off + n_in * n_out..off + n_in * n_out + n_out];
            let input = &acts[l];
            let mut out: Vec<f64> = (0..n_out)
                .map(|o| b[o] + w[o * n_in..(o + 1) * n_in].iter().zip(input).map(|(a, b)| a * b).sum::<f64>())
                .collect();
            if l + 1 < layers {
                out.iter_mut().for_each(|v| *v = v.tanh());
            }
            acts.push(out);
            off += n_in * n_out + n_out;
        }
        Cache { acts }
    }

    /// Accumulates `d(loss)/d(params)` into `grad` given `d(loss)/d(output)`.
    pub fn backward(&self, cache: &Cache, grad_out: &[f64], grad: &mut [f64]) {
        assert_eq!(grad.len(), self.params.len());
        let layers = self.sizes.len() - 1;
        let mut offsets = Vec::with_capacity(layers);
        let mut off = 0;
        for l in 0..layers {
            offsets.push(off);
            off += self.sizes[l] * self.sizes[l + 1] + self.sizes[l + 1];
        }
        let mut delta = grad_out.to_vec();
        for l in (0..layers).rev() {
            let (n_in, n_out) = (self.sizes[l], self.sizes[l + 1]);
            let off = offsets[l];
            let input = &cache.acts[l];
            for o in 0..n_out {
                let d = delta[o];
                if d == 0.0 {
                    continue;
                }
                let row = &mut grad[off + o * n_in..off + (o + 1) * n_in];
                for (g, a) in row.iter_mut().zip(input) {
                    *g += d * a;
                }
                grad[off + n_in * n_out + o] += d;
            }
            if l == 0 {
                break;
            }
            let w = &self.params[off..off + n_in * n_out];
            let mut prev = vec![0.0; n_in];
            for o in 0..n_out {
                let d = delta[o];
                if d == 0.0 {
                    continue;
                }
                for (p, wi) in prev.iter_mut().zip(&w[o * n_in..(o + 1) * n_in]) {
                    *p += wi * d;
                }
            }
            // tanh'(z) = 1 - tanh(z)^2
            for (p, a) in prev.iter_mut().zip(input) {
                *p *= 1.0 - a * a;
            }
            delta = prev;
        }
    }
}
