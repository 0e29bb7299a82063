//! Single-hidden-layer autoencoder (sigmoid hidden units, linear reconstruction)
//! with running min-max input scaling.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

/// Root mean squared difference of two equal-length vectors.
pub fn rmse(x: &[f64], reconstruction: &[f64]) -> f64 {
    let n = x.len().max(1) as f64;
    (x.iter().zip(reconstruction).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() / n).sqrt()
}

/// Running per-feature min/max; maps each feature onto [0, 1] over the values
/// seen so far. A feature whose min equals its max maps to 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinMax {
    min: Vec<f64>,
    max: Vec<f64>,
}

impl MinMax {
    pub fn new(dim: usize) -> Self {
        Self { min: vec![f64::INFINITY; dim], max: vec![f64::NEG_INFINITY; dim] }
    }

    pub fn update(&mut self, x: &[f64]) {
        for ((lo, hi), &v) in self.min.iter_mut().zip(self.max.iter_mut()).zip(x) {
            *lo = lo.min(v);
            *hi = hi.max(v);
        }
    }

    pub fn normalize(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(self.min.iter().zip(&self.max))
            .map(|(&v, (&lo, &hi))| if hi > lo { (v - lo) / (hi - lo) } else { 0.0 })
            .collect()
    }
}

/// Parameter gradients, laid out like [`Autoencoder::params`].
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub w_enc: Vec<f64>,
    pub b_enc: Vec<f64>,
    pub w_dec: Vec<f64>,
    pub b_dec: Vec<f64>,
}

impl Gradients {
    pub fn flatten(&self) -> Vec<f64> {
        [&self.w_enc[..], &self.b_enc, &self.w_dec, &self.b_dec].concat()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Autoencoder {
    input_dim: usize,
    hidden_dim: usize,
    /// hidden x input, row-major.
    w_enc: Vec<f64>,
    b_enc: Vec<f64>,
    /// input x hidden, row-major.
    w_dec: Vec<f64>,
    b_dec: Vec<f64>,
    learning_rate: f64,
    steps: u64,
    scale: MinMax,
}

/// `max(1, ceil(beta * n))`, kept strictly below `n` when `n >= 2`.
pub fn hidden_size(input_dim: usize, beta: f64) -> usize {
    let h = ((beta * input_dim as f64).ceil() as usize).max(1);
    if input_dim >= 2 {
        h.min(input_dim - 1)
    } else {
        h
    }
}

impl Autoencoder {
    pub fn new<R: Rng + ?Sized>(input_dim: usize, beta: f64, learning_rate: f64, rng: &mut R) -> Self {
        let hidden_dim = hidden_size(input_dim, beta);
        let a = 1.0 / input_dim.max(1) as f64;
        let mut init = |n: usize| -> Vec<f64> { (0..n).map(|_| rng.random_range(-a..a)).collect() };
        let w_enc = init(hidden_dim * input_dim);
        let w_dec = init(input_dim * hidden_dim);
        Self {
            input_dim,
            hidden_dim,
            w_enc,
            b_enc: vec![0.0; hidden_dim],
            w_dec,
            b_dec: vec![0.0; input_dim],
            learning_rate,
            steps: 0,
            scale: MinMax::new(input_dim),
        }
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn hidden_dim(&self) -> usize {
        self.hidden_dim
    }

    pub fn set_learning_rate(&mut self, lr: f64) {
        self.learning_rate = lr;
    }

    fn check(&self, x: &[f64]) -> Result<()> {
        if x.len() == self.input_dim {
            Ok(())
        } else {
            Err(Error::DimensionMismatch { expected: self.input_dim, got: x.len() })
        }
    }

    fn encode(&self, x: &[f64]) -> Vec<f64> {
        (0..self.hidden_dim)
            .map(|j| {
                let row = &self.w_enc[j * self.input_dim..(j + 1) * self.input_dim];
                sigmoid(row.iter().zip(x).map(|(w, v)| w * v).sum::<f64>() + self.b_enc[j])
            })
            .collect()
    }

    fn decode(&self, h: &[f64]) -> Vec<f64> {
        (0..self.input_dim)
            .map(|i| {
                let row = &self.w_dec[i * self.hidden_dim..(i + 1) * self.hidden_dim];
                row.iter().zip(h).map(|(w, v)| w * v).sum::<f64>() + self.b_dec[i]
            })
            .collect()
    }

    /// Reconstruction of an already-normalized input.
    pub fn reconstruct(&self, x: &[f64]) -> Vec<f64> {
        self.decode(&self.encode(x))
    }

    /// `sum((x_hat - x)^2) / dim` on an already-normalized input.
    pub fn loss(&self, x: &[f64]) -> f64 {
        let r = self.reconstruct(x);
        r.iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() / self.input_dim as f64
    }

    /// Backpropagated gradient of [`Self::loss`].
    pub fn gradients(&self, x: &[f64]) -> Gradients {
        let (n, m) = (self.input_dim, self.hidden_dim);
        let h = self.encode(x);
        let out = self.decode(&h);
        let delta_out: Vec<f64> = out.iter().zip(x).map(|(&y, &t)| 2.0 / n as f64 * (y - t)).collect();
        let mut w_dec = vec![0.0; n * m];
        for i in 0..n {
            for j in 0..m {
                w_dec[i * m + j] = delta_out[i] * h[j];
            }
        }
        let delta_h: Vec<f64> = (0..m)
            .map(|j| {
                let back: f64 = (0..n).map(|i| delta_out[i] * self.w_dec[i * m + j]).sum();
                back * h[j] * (1.0 - h[j])
            })
            .collect();
        let mut w_enc = vec![0.0; m * n];
        for j in 0..m {
            for l in 0..n {
                w_enc[j * n + l] = delta_h[j] * x[l];
            }
        }
        Gradients { w_enc, b_enc: delta_h, w_dec, b_dec: delta_out }
    }

    pub fn params(&self) -> Vec<f64> {
        [&self.w_enc[..], &self.b_enc, &self.w_dec, &self.b_dec].concat()
    }

    pub fn set_params(&mut self, p: &[f64]) {
        let mut at = 0;
        for v in [&mut self.w_enc, &mut self.b_enc, &mut self.w_dec, &mut self.b_dec] {
            let len = v.len();
            v.copy_from_slice(&p[at..at + len]);
            at += len;
        }
    }

    /// One gradient step on an already-normalized input.
    pub fn step_normalized(&mut self, x: &[f64]) {
        let lr = self.learning_rate / ((self.steps + 1) as f64).sqrt();
        let g = self.gradients(x);
        let apply = |p: &mut [f64], g: &[f64]| p.iter_mut().zip(g).for_each(|(p, g)| *p -= lr * g);
        apply(&mut self.w_enc, &g.w_enc);
        apply(&mut self.b_enc, &g.b_enc);
        apply(&mut self.w_dec, &g.w_dec);
        apply(&mut self.b_dec, &g.b_dec);
        self.steps += 1;
    }

    /// Normalizes `x` with the current running min/max and reconstructs it.
    /// Returns the reconstruction (normalized space) and its RMSE.
    pub fn forward(&self, x: &[f64]) -> Result<(Vec<f64>, f64)> {
        self.check(x)?;
        let z = self.scale.normalize(x);
        let r = self.reconstruct(&z);
        let e = rmse(&z, &r);
        Ok((r, e))
    }

    /// Folds `x` into the running min/max, then takes one SGD step on it.
    /// Returns the RMSE measured before the step.
    pub fn sgd_step(&mut self, x: &[f64]) -> Result<f64> {
        self.check(x)?;
        self.scale.update(x);
        let z = self.scale.normalize(x);
        let e = rmse(&z, &self.reconstruct(&z));
        self.step_normalized(&z);
        Ok(e)
    }
}
