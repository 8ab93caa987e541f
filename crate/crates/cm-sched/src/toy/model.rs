//! Small sigma-conditioned fully-connected network with hand-rolled
//! reverse-mode gradients.
//!
//! The network itself is deliberately plain: linear layers with tanh
//! between them, conditioned by concatenating Fourier features of
//! `ln(sigma)` to the data point. All arithmetic is f64 and every loop
//! runs in a fixed order, so forward and backward are bit-reproducible.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;

/// Boundary parameterization constants for the consistency map.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConsistencyParam {
    pub sigma_data: f64,
    pub sigma_min: f64,
}

impl ConsistencyParam {
    pub fn validate(&self) -> Result<()> {
        if !(self.sigma_data > 0.0 && self.sigma_data.is_finite()) {
            return Err(Error::config("sigma_data", "must be a positive finite number"));
        }
        if !(self.sigma_min > 0.0 && self.sigma_min.is_finite()) {
            return Err(Error::config("sigma_min", "must be a positive finite number"));
        }
        Ok(())
    }

    /// `(c_skip, c_out)` of the consistency parameterization
    /// `f(x, sigma) = c_skip * x + c_out * nn(x, sigma)`.
    ///
    /// At `sigma == sigma_min` this is exactly `(1, 0)`, which pins the
    /// boundary condition `f(x, sigma_min) = x` without any epsilon games.
    pub fn coefficients(&self, sigma: f64) -> (f64, f64) {
        let sd2 = self.sigma_data * self.sigma_data;
        let delta = sigma - self.sigma_min;
        let c_skip = sd2 / (delta * delta + sd2);
        let c_out = self.sigma_data * delta / (sigma * sigma + sd2).sqrt();
        (c_skip, c_out)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ToyModel {
    /// Layer widths, `[input_dim, hidden..., data_dim]` where
    /// `input_dim = data_dim + 2 * sigma_freqs.len()`.
    dims: Vec<usize>,
    /// Row-major `out x in` weight matrices, one per layer.
    weights: Vec<Vec<f64>>,
    biases: Vec<Vec<f64>>,
    sigma_freqs: Vec<f64>,
    data_dim: usize,
}

/// Per-layer gradient buffers with the same shapes as the model.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub weights: Vec<Vec<f64>>,
    pub biases: Vec<Vec<f64>>,
}

impl Gradients {
    pub fn zeros_like(model: &ToyModel) -> Self {
        Gradients {
            weights: model.weights.iter().map(|w| vec![0.0; w.len()]).collect(),
            biases: model.biases.iter().map(|b| vec![0.0; b.len()]).collect(),
        }
    }
}

/// Cached activations of one forward pass, consumed by `backward`.
pub struct ForwardCache {
    /// `acts[l]` is the input to layer `l`; `acts[0]` is the embedded input.
    acts: Vec<Vec<f64>>,
}

impl ToyModel {
    /// Fresh model with seeded Gaussian init, weights scaled by
    /// `1/sqrt(fan_in)`, zero biases. Frequencies are the powers of two
    /// `1, 2, 4, ...` applied to `ln(sigma)`.
    pub fn new(data_dim: usize, hidden_dims: &[usize], n_freq: usize, seed: u64) -> Result<Self> {
        if data_dim == 0 {
            return Err(Error::config("data_dim", "must be >= 1"));
        }
        if hidden_dims.is_empty() || hidden_dims.iter().any(|&h| h == 0) {
            return Err(Error::config("hidden_dims", "need at least one non-empty hidden layer"));
        }
        if n_freq == 0 {
            return Err(Error::config("n_freq", "must be >= 1"));
        }
        let sigma_freqs: Vec<f64> = (0..n_freq).map(|m| (1u64 << m) as f64).collect();
        let input_dim = data_dim + 2 * n_freq;
        let mut dims = Vec::with_capacity(hidden_dims.len() + 2);
        dims.push(input_dim);
        dims.extend_from_slice(hidden_dims);
        dims.push(data_dim);

        let mut rng = rng::rng_from_seed(seed);
        let mut weights = Vec::new();
        let mut biases = Vec::new();
        for l in 0..dims.len() - 1 {
            let (fan_in, fan_out) = (dims[l], dims[l + 1]);
            let scale = 1.0 / (fan_in as f64).sqrt();
            weights.push(
                (0..fan_in * fan_out)
                    .map(|_| scale * rng::standard_normal(&mut rng))
                    .collect(),
            );
            biases.push(vec![0.0; fan_out]);
        }
        Ok(ToyModel {
            dims,
            weights,
            biases,
            sigma_freqs,
            data_dim,
        })
    }

    pub fn data_dim(&self) -> usize {
        self.data_dim
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn sigma_freqs(&self) -> &[f64] {
        &self.sigma_freqs
    }

    pub fn param_count(&self) -> usize {
        self.weights.iter().map(Vec::len).sum::<usize>() + self.biases.iter().map(Vec::len).sum::<usize>()
    }

    /// Flatten parameters in a fixed order (weights then biases per layer).
    pub fn to_flat(&self) -> Vec<f64> {
        let mut flat = Vec::with_capacity(self.param_count());
        for l in 0..self.weights.len() {
            flat.extend_from_slice(&self.weights[l]);
            flat.extend_from_slice(&self.biases[l]);
        }
        flat
    }

    pub fn set_flat(&mut self, flat: &[f64]) -> Result<()> {
        if flat.len() != self.param_count() {
            return Err(Error::Dimension(format!(
                "checkpoint holds {} parameters, model needs {}",
                flat.len(),
                self.param_count()
            )));
        }
        let mut offset = 0;
        for l in 0..self.weights.len() {
            let wl = self.weights[l].len();
            self.weights[l].copy_from_slice(&flat[offset..offset + wl]);
            offset += wl;
            let bl = self.biases[l].len();
            self.biases[l].copy_from_slice(&flat[offset..offset + bl]);
            offset += bl;
        }
        Ok(())
    }

    /// Rebuild a model from its architecture plus a flat parameter vector.
    pub fn from_parts(
        data_dim: usize,
        sigma_freqs: Vec<f64>,
        dims: Vec<usize>,
        flat: &[f64],
    ) -> Result<Self> {
        if dims.len() < 3 || dims[0] != data_dim + 2 * sigma_freqs.len() || *dims.last().unwrap() != data_dim {
            return Err(Error::Dimension("inconsistent checkpoint dims".into()));
        }
        let hidden: Vec<usize> = dims[1..dims.len() - 1].to_vec();
        let mut model = ToyModel::new(data_dim, &hidden, sigma_freqs.len().max(1), 0)?;
        model.sigma_freqs = sigma_freqs;
        model.dims = dims;
        model.set_flat(flat)?;
        Ok(model)
    }

    /// NaN/Inf anywhere in the parameters is a hard failure.
    pub fn check_finite(&self) -> Result<()> {
        for (l, w) in self.weights.iter().enumerate() {
            if w.iter().chain(self.biases[l].iter()).any(|v| !v.is_finite()) {
                return Err(Error::NonFinite(format!("layer {l} parameters")));
            }
        }
        Ok(())
    }

    fn embed(&self, x: &[f64], sigma: f64) -> Vec<f64> {
        let u = sigma.ln();
        let mut z = Vec::with_capacity(self.dims[0]);
        z.extend_from_slice(x);
        for &f in &self.sigma_freqs {
            z.push((f * u).sin());
            z.push((f * u).cos());
        }
        z
    }

    /// Raw network output (no consistency parameterization).
    pub fn nn_forward(&self, x: &[f64], sigma: f64) -> Vec<f64> {
        self.forward_cached(x, sigma).0
    }

    /// Forward pass that keeps per-layer activations for `backward`.
    pub fn forward_cached(&self, x: &[f64], sigma: f64) -> (Vec<f64>, ForwardCache) {
        debug_assert_eq!(x.len(), self.data_dim);
        let layers = self.weights.len();
        let mut acts = Vec::with_capacity(layers);
        let mut h = self.embed(x, sigma);
        for l in 0..layers {
            let (fan_in, fan_out) = (self.dims[l], self.dims[l + 1]);
            let mut pre = self.biases[l].clone();
            for o in 0..fan_out {
                let row = &self.weights[l][o * fan_in..(o + 1) * fan_in];
                let mut acc = 0.0;
                for i in 0..fan_in {
                    acc += row[i] * h[i];
                }
                pre[o] += acc;
            }
            acts.push(h);
            h = if l + 1 < layers {
                pre.iter().map(|v| v.tanh()).collect()
            } else {
                pre
            };
        }
        (h, ForwardCache { acts })
    }

    /// Accumulate `d(loss)/d(params)` into `grads` given the upstream
    /// gradient w.r.t. the raw network output.
    pub fn backward(&self, cache: &ForwardCache, grad_out: &[f64], grads: &mut Gradients) {
        let layers = self.weights.len();
        let mut delta = grad_out.to_vec();
        for l in (0..layers).rev() {
            let (fan_in, fan_out) = (self.dims[l], self.dims[l + 1]);
            let input = &cache.acts[l];
            for o in 0..fan_out {
                let d = delta[o];
                grads.biases[l][o] += d;
                let row = &mut grads.weights[l][o * fan_in..(o + 1) * fan_in];
                for i in 0..fan_in {
                    row[i] += d * input[i];
                }
            }
            if l == 0 {
                break;
            }
            let mut prev = vec![0.0; fan_in];
            for o in 0..fan_out {
                let d = delta[o];
                let row = &self.weights[l][o * fan_in..(o + 1) * fan_in];
                for i in 0..fan_in {
                    prev[i] += d * row[i];
                }
            }
            // Input to layer l is tanh output of layer l-1.
            for i in 0..fan_in {
                let a = input[i];
                prev[i] *= 1.0 - a * a;
            }
            delta = prev;
        }
    }

    /// One plain SGD step.
    pub fn sgd_step(&mut self, grads: &Gradients, learning_rate: f64) {
        for l in 0..self.weights.len() {
            for (p, g) in self.weights[l].iter_mut().zip(&grads.weights[l]) {
                *p -= learning_rate * g;
            }
            for (p, g) in self.biases[l].iter_mut().zip(&grads.biases[l]) {
                *p -= learning_rate * g;
            }
        }
    }

    /// Zero every weight and bias (test helper for coefficient checks).
    pub fn zero_params(&mut self) {
        for w in &mut self.weights {
            w.iter_mut().for_each(|v| *v = 0.0);
        }
        for b in &mut self.biases {
            b.iter_mut().for_each(|v| *v = 0.0);
        }
    }
}

/// Consistency map over a batch: `f(x, sigma) = c_skip * x + c_out * nn(x, sigma)`.
///
/// `points` is `n x dim` row-major, `sigmas` one value per row.
pub fn consistency_forward(
    model: &ToyModel,
    points: &[f64],
    sigmas: &[f64],
    cp: &ConsistencyParam,
) -> Result<Vec<f64>> {
    cp.validate()?;
    let dim = model.data_dim();
    if points.len() != sigmas.len() * dim {
        return Err(Error::Dimension(format!(
            "{} point values for {} sigmas of dim {dim}",
            points.len(),
            sigmas.len()
        )));
    }
    if points.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("consistency_forward input".into()));
    }
    let mut out = Vec::with_capacity(points.len());
    for (row, &sigma) in points.chunks_exact(dim).zip(sigmas) {
        if !(sigma >= cp.sigma_min) {
            return Err(Error::Schedule(format!(
                "sigma = {sigma} below sigma_min = {}",
                cp.sigma_min
            )));
        }
        let (c_skip, c_out) = cp.coefficients(sigma);
        let nn = model.nn_forward(row, sigma);
        for d in 0..dim {
            out.push(c_skip * row[d] + c_out * nn[d]);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cp() -> ConsistencyParam {
        ConsistencyParam {
            sigma_data: 0.5,
            sigma_min: 0.002,
        }
    }

    #[test]
    fn boundary_identity_at_sigma_min() {
        let model = ToyModel::new(2, &[16, 16], 4, 11).unwrap();
        let mut rng = crate::rng::rng_from_seed(42);
        for _ in 0..100 {
            let x = [
                crate::rng::standard_normal(&mut rng),
                crate::rng::standard_normal(&mut rng),
            ];
            let out = consistency_forward(&model, &x, &[0.002], &cp()).unwrap();
            assert_eq!(out[0].to_bits(), x[0].to_bits());
            assert_eq!(out[1].to_bits(), x[1].to_bits());
        }
    }

    #[test]
    fn zero_network_reduces_to_skip_path() {
        let mut model = ToyModel::new(2, &[8], 4, 0).unwrap();
        model.zero_params();
        let x = [0.7, -1.3];
        let out = consistency_forward(&model, &x, &[1.0], &cp()).unwrap();
        // c_skip at sigma = 1: 0.25 / (0.998^2 + 0.25) = 0.2006414104609616
        let c_skip = 0.200_641_410_460_961_6;
        assert!((out[0] - c_skip * x[0]).abs() < 1e-15);
        assert!((out[1] - c_skip * x[1]).abs() < 1e-15);
    }

    #[test]
    fn coefficients_continuous_in_sigma() {
        let cp = cp();
        let mut prev = cp.coefficients(cp.sigma_min);
        let mut sigma = cp.sigma_min;
        while sigma < 80.0 {
            let next_sigma = (sigma * 1.001).min(80.0);
            let next = cp.coefficients(next_sigma);
            assert!((next.0 - prev.0).abs() < 1e-2);
            assert!((next.1 - prev.1).abs() < 1e-2);
            prev = next;
            sigma = next_sigma;
        }
    }

    #[test]
    fn forward_rejects_non_finite_input() {
        let model = ToyModel::new(2, &[8], 4, 0).unwrap();
        let err = consistency_forward(&model, &[f64::NAN, 0.0], &[1.0], &cp()).unwrap_err();
        assert!(matches!(err, Error::NonFinite(_)));
    }

    #[test]
    fn forward_rejects_sigma_below_min() {
        let model = ToyModel::new(2, &[8], 4, 0).unwrap();
        assert!(consistency_forward(&model, &[0.0, 0.0], &[0.001], &cp()).is_err());
    }

    #[test]
    fn forward_deterministic() {
        let model = ToyModel::new(2, &[32, 32], 8, 5).unwrap();
        let x = [0.3, 0.4];
        let a = model.nn_forward(&x, 2.5);
        let b = model.nn_forward(&x, 2.5);
        assert_eq!(a, b);
    }

    #[test]
    fn flat_roundtrip() {
        let model = ToyModel::new(2, &[8, 8], 4, 9).unwrap();
        let flat = model.to_flat();
        let rebuilt = ToyModel::from_parts(
            2,
            model.sigma_freqs().to_vec(),
            model.dims().to_vec(),
            &flat,
        )
        .unwrap();
        assert_eq!(model, rebuilt);
    }
}
