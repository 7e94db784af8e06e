//! Actor-critic network over the decision features: a shared leaky-ReLU
//! trunk, a policy head with one softmax group per action set and a value
//! head. All parameters live in one flat vector.

use crate::error::{Error, Result};
use crate::rng::substream;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

const LEAK: f64 = 0.01;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetShape {
    pub features: usize,
    pub trunk: usize,
    pub policy_hidden: usize,
    pub value_hidden: [usize; 2],
    pub rules: usize,
    pub flips: usize,
}

impl Default for NetShape {
    fn default() -> Self {
        Self {
            features: crate::sim::FEATURE_COUNT,
            trunk: 512,
            policy_hidden: 64,
            value_hidden: [128, 64],
            rules: 4,
            flips: 3,
        }
    }
}

impl NetShape {
    /// Small network for tests and derivative checks.
    pub fn micro(features: usize) -> Self {
        Self {
            features,
            trunk: 8,
            policy_hidden: 6,
            value_hidden: [5, 4],
            rules: 4,
            flips: 3,
        }
    }

    /// (inputs, outputs) per layer: trunk, policy hidden, policy out,
    /// value hidden 1, value hidden 2, value out.
    pub fn layers(&self) -> [(usize, usize); 6] {
        [
            (self.features, self.trunk),
            (self.trunk, self.policy_hidden),
            (self.policy_hidden, self.rules + self.flips),
            (self.trunk, self.value_hidden[0]),
            (self.value_hidden[0], self.value_hidden[1]),
            (self.value_hidden[1], 1),
        ]
    }

    pub fn parameter_count(&self) -> usize {
        self.layers().iter().map(|(i, o)| i * o + o).sum()
    }

    pub fn validate(&self) -> Result<()> {
        if self.layers().iter().any(|&(i, o)| i == 0 || o == 0) || self.rules == 0 || self.flips == 0 {
            return Err(Error::Config("network layers must be non-empty".into()));
        }
        Ok(())
    }
}

/// Running mean and variance of the raw features (Welford).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunningNorm {
    pub count: u64,
    pub mean: Vec<f64>,
    pub m2: Vec<f64>,
}

impl RunningNorm {
    pub fn new(n: usize) -> Self {
        Self {
            count: 0,
            mean: vec![0.0; n],
            m2: vec![0.0; n],
        }
    }

    pub fn update(&mut self, x: &[f64]) {
        self.count += 1;
        let n = self.count as f64;
        for ((m, s), &v) in self.mean.iter_mut().zip(&mut self.m2).zip(x) {
            let d = v - *m;
            *m += d / n;
            *s += d * (v - *m);
        }
    }

    pub fn normalize(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .enumerate()
            .map(|(i, &v)| {
                let var = if self.count < 2 {
                    1.0
                } else {
                    self.m2[i] / self.count as f64
                };
                ((v - self.mean[i]) / (var + 1e-8).sqrt()).clamp(-10.0, 10.0)
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PolicyNet {
    pub shape: NetShape,
    pub params: Vec<f64>,
    pub norm: RunningNorm,
}

/// Activations kept for the backward pass.
#[derive(Clone, Debug, Default)]
pub struct Forward {
    pub input: Vec<f64>,
    trunk_pre: Vec<f64>,
    trunk: Vec<f64>,
    pol_pre: Vec<f64>,
    pol: Vec<f64>,
    pub logits: Vec<f64>,
    v1_pre: Vec<f64>,
    v1: Vec<f64>,
    v2_pre: Vec<f64>,
    v2: Vec<f64>,
    pub value: f64,
}

fn leaky(x: f64) -> f64 {
    if x > 0.0 {
        x
    } else {
        LEAK * x
    }
}

fn leaky_grad(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else {
        LEAK
    }
}

/// Numerically stable log-softmax.
pub fn log_softmax(z: &[f64]) -> Vec<f64> {
    let m = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lse = m + z.iter().map(|v| (v - m).exp()).sum::<f64>().ln();
    z.iter().map(|v| v - lse).collect()
}

/// Rounds every value to the nearest f32 so checkpoints are lossless.
pub(crate) fn round_f32(xs: &mut [f64]) {
    for x in xs {
        *x = *x as f32 as f64;
    }
}

impl PolicyNet {
    /// Orthogonal initialization: gain sqrt(2) on hidden layers, 0.01 on the
    /// policy output and 1 on the value output; zero biases.
    pub fn new(shape: NetShape, seed: u64) -> Result<Self> {
        shape.validate()?;
        let mut params = vec![0.0; shape.parameter_count()];
        let gains = [2f64.sqrt(), 2f64.sqrt(), 0.01, 2f64.sqrt(), 2f64.sqrt(), 1.0];
        let mut offset = 0;
        for (l, &(n_in, n_out)) in shape.layers().iter().enumerate() {
            let w = orthogonal(n_out, n_in, gains[l], seed, l as u64);
            params[offset..offset + n_in * n_out].copy_from_slice(&w);
            offset += n_in * n_out + n_out;
        }
        round_f32(&mut params);
        let norm = RunningNorm::new(shape.features);
        Ok(Self { shape, params, norm })
    }

    pub fn layer_offsets(&self) -> [usize; 6] {
        let mut out = [0; 6];
        let mut o = 0;
        for (l, (i, n)) in self.shape.layers().into_iter().enumerate() {
            out[l] = o;
            o += i * n + n;
        }
        out
    }

    fn dense(&self, layer: usize, x: &[f64]) -> Vec<f64> {
        let (n_in, n_out) = self.shape.layers()[layer];
        let o = self.layer_offsets()[layer];
        let w = &self.params[o..o + n_in * n_out];
        let b = &self.params[o + n_in * n_out..o + n_in * n_out + n_out];
        (0..n_out)
            .map(|r| {
                let row = &w[r * n_in..(r + 1) * n_in];
                b[r] + row.iter().zip(x).map(|(a, c)| a * c).sum::<f64>()
            })
            .collect()
    }

    /// Accumulates parameter gradients of one layer and returns the input gradient.
    fn dense_back(&self, grad: &mut [f64], layer: usize, x: &[f64], dy: &[f64]) -> Vec<f64> {
        let (n_in, n_out) = self.shape.layers()[layer];
        let o = self.layer_offsets()[layer];
        let mut dx = vec![0.0; n_in];
        for r in 0..n_out {
            let g = dy[r];
            if g == 0.0 {
                continue;
            }
            let row = o + r * n_in;
            for c in 0..n_in {
                grad[row + c] += g * x[c];
                dx[c] += g * self.params[row + c];
            }
            grad[o + n_in * n_out + r] += g;
        }
        dx
    }

    /// Forward pass on an already normalized input.
    pub fn forward(&self, input: &[f64]) -> Forward {
        let trunk_pre = self.dense(0, input);
        let trunk: Vec<f64> = trunk_pre.iter().map(|&v| leaky(v)).collect();
        let pol_pre = self.dense(1, &trunk);
        let pol: Vec<f64> = pol_pre.iter().map(|&v| leaky(v)).collect();
        let logits = self.dense(2, &pol);
        let v1_pre = self.dense(3, &trunk);
        let v1: Vec<f64> = v1_pre.iter().map(|&v| leaky(v)).collect();
        let v2_pre = self.dense(4, &v1);
        let v2: Vec<f64> = v2_pre.iter().map(|&v| leaky(v)).collect();
        let value = self.dense(5, &v2)[0];
        Forward {
            input: input.to_vec(),
            trunk_pre,
            trunk,
            pol_pre,
            pol,
            logits,
            v1_pre,
            v1,
            v2_pre,
            v2,
            value,
        }
    }

    /// Backward pass for loss gradients `dlogits` and `dvalue`.
    pub fn backward(&self, f: &Forward, dlogits: &[f64], dvalue: f64, grad: &mut [f64]) {
        let dpol = self.dense_back(grad, 2, &f.pol, dlogits);
        let dpol_pre: Vec<f64> = dpol.iter().zip(&f.pol_pre).map(|(g, &p)| g * leaky_grad(p)).collect();
        let mut dtrunk = self.dense_back(grad, 1, &f.trunk, &dpol_pre);

        let dv2 = self.dense_back(grad, 5, &f.v2, &[dvalue]);
        let dv2_pre: Vec<f64> = dv2.iter().zip(&f.v2_pre).map(|(g, &p)| g * leaky_grad(p)).collect();
        let dv1 = self.dense_back(grad, 4, &f.v1, &dv2_pre);
        let dv1_pre: Vec<f64> = dv1.iter().zip(&f.v1_pre).map(|(g, &p)| g * leaky_grad(p)).collect();
        let dt_value = self.dense_back(grad, 3, &f.trunk, &dv1_pre);
        for (a, b) in dtrunk.iter_mut().zip(dt_value) {
            *a += b;
        }
        let dtrunk_pre: Vec<f64> = dtrunk.iter().zip(&f.trunk_pre).map(|(g, &p)| g * leaky_grad(p)).collect();
        self.dense_back(grad, 0, &f.input, &dtrunk_pre);
    }

    /// Log-probabilities of the two action groups.
    pub fn log_probs(&self, f: &Forward) -> (Vec<f64>, Vec<f64>) {
        let r = self.shape.rules;
        (log_softmax(&f.logits[..r]), log_softmax(&f.logits[r..]))
    }

    /// Checks finiteness and applies the feature normalization.
    pub fn prepare(&self, features: &[f64]) -> Result<Vec<f64>> {
        if features.len() != self.shape.features {
            return Err(Error::Config(format!(
                "expected {} features, got {}",
                self.shape.features,
                features.len()
            )));
        }
        if let Some((index, &value)) = features.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::NonFiniteFeature { index, value });
        }
        Ok(self.norm.normalize(features))
    }

    /// Action probabilities of both groups for raw features.
    pub fn probabilities(&self, features: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        let f = self.forward(&self.prepare(features)?);
        let (a, b) = self.log_probs(&f);
        Ok((a.iter().map(|v| v.exp()).collect(), b.iter().map(|v| v.exp()).collect()))
    }
}

/// Scaled matrix with orthonormal rows (or columns when taller than wide),
/// by Gram-Schmidt on a Gaussian draw.
fn orthogonal(rows: usize, cols: usize, gain: f64, seed: u64, layer: u64) -> Vec<f64> {
    let mut r = substream(seed, &[0x0127, layer]);
    let (n, m) = if rows <= cols { (rows, cols) } else { (cols, rows) };
    // n vectors of length m
    let mut v: Vec<Vec<f64>> = Vec::with_capacity(n);
    while v.len() < n {
        let mut x: Vec<f64> = (0..m).map(|_| r.sample::<f64, _>(StandardNormal)).collect();
        for _ in 0..2 {
            for q in &v {
                let d: f64 = q.iter().zip(&x).map(|(a, b)| a * b).sum();
                for (xi, qi) in x.iter_mut().zip(q) {
                    *xi -= d * qi;
                }
            }
        }
        let norm = x.iter().map(|a| a * a).sum::<f64>().sqrt();
        if norm > 1e-8 {
            v.push(x.into_iter().map(|a| a / norm).collect());
        }
    }
    let mut out = vec![0.0; rows * cols];
    for i in 0..rows {
        for j in 0..cols {
            out[i * cols + j] = gain * if rows <= cols { v[i][j] } else { v[j][i] };
        }
    }
    out
}
