use nalgebra::{DMatrix, DVector};
use rand::Rng;

use super::NeuralError;

/// Fully connected network: tanh on hidden layers, linear output.
#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    layer_sizes: Vec<usize>,
    /// `weights[k]` maps layer `k` to layer `k + 1` and is `out × in`.
    weights: Vec<DMatrix<f64>>,
    biases: Vec<DVector<f64>>,
}

/// Gradients (or Adam moments) with the same shapes as an [`Mlp`].
#[derive(Debug, Clone, PartialEq)]
pub struct MlpGrads {
    pub weights: Vec<DMatrix<f64>>,
    pub biases: Vec<DVector<f64>>,
}

/// Layer outputs kept for the backward pass. `activations[0]` is the input.
#[derive(Debug, Clone)]
pub struct ForwardCache {
    pub activations: Vec<DMatrix<f64>>,
}

impl ForwardCache {
    pub fn output(&self) -> &DMatrix<f64> {
        self.activations.last().expect("cache holds at least the input")
    }
}

impl Mlp {
    /// Glorot-uniform weights, zero biases.
    pub fn new<R: Rng + ?Sized>(layer_sizes: &[usize], rng: &mut R) -> Self {
        assert!(layer_sizes.len() >= 2, "need at least input and output widths");
        assert!(layer_sizes.iter().all(|&w| w > 0), "layer widths must be positive");
        let mut weights = Vec::with_capacity(layer_sizes.len() - 1);
        let mut biases = Vec::with_capacity(layer_sizes.len() - 1);
        for w in layer_sizes.windows(2) {
            let (fan_in, fan_out) = (w[0], w[1]);
            let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
            weights.push(DMatrix::from_fn(fan_out, fan_in, |_, _| {
                rng.random_range(-limit..limit)
            }));
            biases.push(DVector::zeros(fan_out));
        }
        Mlp {
            layer_sizes: layer_sizes.to_vec(),
            weights,
            biases,
        }
    }

    pub fn from_parts(
        weights: Vec<DMatrix<f64>>,
        biases: Vec<DVector<f64>>,
    ) -> Result<Self, NeuralError> {
        if weights.is_empty() || weights.len() != biases.len() {
            return Err(shape("one bias per weight matrix", format!("{} / {}", weights.len(), biases.len())));
        }
        let mut layer_sizes = vec![weights[0].ncols()];
        for (k, (w, b)) in weights.iter().zip(&biases).enumerate() {
            if w.ncols() != *layer_sizes.last().unwrap() {
                return Err(shape(
                    format!("layer {k} input width {}", layer_sizes.last().unwrap()),
                    w.ncols().to_string(),
                ));
            }
            if b.len() != w.nrows() {
                return Err(shape(format!("layer {k} bias length {}", w.nrows()), b.len().to_string()));
            }
            layer_sizes.push(w.nrows());
        }
        let mlp = Mlp {
            layer_sizes,
            weights,
            biases,
        };
        if !mlp.is_finite() {
            return Err(shape("finite parameters", "non-finite values"));
        }
        Ok(mlp)
    }

    pub fn layer_sizes(&self) -> &[usize] {
        &self.layer_sizes
    }

    pub fn input_dim(&self) -> usize {
        self.layer_sizes[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.layer_sizes.last().unwrap()
    }

    pub fn weights(&self) -> &[DMatrix<f64>] {
        &self.weights
    }

    pub fn biases(&self) -> &[DVector<f64>] {
        &self.biases
    }

    pub fn weights_mut(&mut self) -> &mut [DMatrix<f64>] {
        &mut self.weights
    }

    pub fn biases_mut(&mut self) -> &mut [DVector<f64>] {
        &mut self.biases
    }

    pub fn n_layers(&self) -> usize {
        self.weights.len()
    }

    pub fn is_finite(&self) -> bool {
        self.weights.iter().all(|w| w.iter().all(|v| v.is_finite()))
            && self.biases.iter().all(|b| b.iter().all(|v| v.is_finite()))
    }

    fn check_input(&self, rows: usize) -> Result<(), NeuralError> {
        if rows != self.input_dim() {
            return Err(shape(format!("input width {}", self.input_dim()), rows.to_string()));
        }
        Ok(())
    }

    /// Batched forward pass keeping every layer's output.
    pub fn forward_cached(&self, x: &DMatrix<f64>) -> Result<ForwardCache, NeuralError> {
        self.check_input(x.nrows())?;
        let last = self.n_layers() - 1;
        let mut activations = Vec::with_capacity(self.n_layers() + 1);
        activations.push(x.clone());
        for (k, (w, b)) in self.weights.iter().zip(&self.biases).enumerate() {
            let prev = activations.last().unwrap();
            let mut z = w * prev;
            for mut col in z.column_iter_mut() {
                col += b;
            }
            if k < last {
                z.apply(|v| *v = fast_tanh(*v));
            }
            activations.push(z);
        }
        Ok(ForwardCache { activations })
    }

    pub fn forward(&self, x: &DMatrix<f64>) -> Result<DMatrix<f64>, NeuralError> {
        Ok(self.forward_cached(x)?.activations.pop().unwrap())
    }

    pub fn forward_one(&self, x: &[f64]) -> Result<Vec<f64>, NeuralError> {
        let out = self.forward(&DMatrix::from_column_slice(x.len(), 1, x))?;
        Ok(out.as_slice().to_vec())
    }

    /// Backpropagates `upstream = ∂L/∂output` (`out × B`). Returns parameter
    /// gradients summed over the batch and `∂L/∂input` (`in × B`).
    pub fn backward(
        &self,
        cache: &ForwardCache,
        upstream: &DMatrix<f64>,
    ) -> Result<(MlpGrads, DMatrix<f64>), NeuralError> {
        self.backprop(cache, upstream, true)
            .map(|(g, dx)| (g.expect("weight gradients requested"), dx))
    }

    /// Like [`backward`](Self::backward) but only the input gradient.
    pub fn backward_input(
        &self,
        cache: &ForwardCache,
        upstream: &DMatrix<f64>,
    ) -> Result<DMatrix<f64>, NeuralError> {
        self.backprop(cache, upstream, false).map(|(_, dx)| dx)
    }

    fn backprop(
        &self,
        cache: &ForwardCache,
        upstream: &DMatrix<f64>,
        want_params: bool,
    ) -> Result<(Option<MlpGrads>, DMatrix<f64>), NeuralError> {
        let out = cache.output();
        if upstream.shape() != out.shape() {
            return Err(shape(format!("{:?}", out.shape()), format!("{:?}", upstream.shape())));
        }
        let n = self.n_layers();
        let mut gw = Vec::with_capacity(if want_params { n } else { 0 });
        let mut gb = Vec::with_capacity(if want_params { n } else { 0 });
        let mut delta = upstream.clone();
        for k in (0..n).rev() {
            if k < n - 1 {
                // through tanh: d/dz tanh(z) = 1 − tanh²
                delta.zip_apply(&cache.activations[k + 1], |d, a| *d *= 1.0 - a * a);
            }
            if want_params {
                let a_prev_t = cache.activations[k].transpose();
                gw.push(&delta * a_prev_t);
                gb.push(delta.column_sum());
            }
            delta = self.weights[k].transpose() * &delta;
        }
        let grads = want_params.then(|| {
            gw.reverse();
            gb.reverse();
            MlpGrads {
                weights: gw,
                biases: gb,
            }
        });
        Ok((grads, delta))
    }

    /// Parameters in a fixed order: per layer, weights column-major then bias.
    pub fn params_flat(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for (w, b) in self.weights.iter().zip(&self.biases) {
            out.extend_from_slice(w.as_slice());
            out.extend_from_slice(b.as_slice());
        }
        out
    }

    pub fn set_params_flat(&mut self, flat: &[f64]) {
        let mut pos = 0;
        for (w, b) in self.weights.iter_mut().zip(self.biases.iter_mut()) {
            let nw = w.len();
            w.as_mut_slice().copy_from_slice(&flat[pos..pos + nw]);
            pos += nw;
            let nb = b.len();
            b.as_mut_slice().copy_from_slice(&flat[pos..pos + nb]);
            pos += nb;
        }
        assert_eq!(pos, flat.len(), "flat parameter length");
    }

    pub fn n_params(&self) -> usize {
        self.weights.iter().map(|w| w.len()).sum::<usize>()
            + self.biases.iter().map(|b| b.len()).sum::<usize>()
    }

    /// `self ← tau·source + (1 − tau)·self`, elementwise.
    pub fn blend_from(&mut self, source: &Mlp, tau: f64) {
        assert_eq!(self.layer_sizes, source.layer_sizes, "blend shapes");
        for (t, s) in self.weights.iter_mut().zip(&source.weights) {
            t.zip_apply(s, |t, s| *t = tau * s + (1.0 - tau) * *t);
        }
        for (t, s) in self.biases.iter_mut().zip(&source.biases) {
            t.zip_apply(s, |t, s| *t = tau * s + (1.0 - tau) * *t);
        }
    }
}

impl MlpGrads {
    pub fn zeros_like(mlp: &Mlp) -> Self {
        MlpGrads {
            weights: mlp
                .weights
                .iter()
                .map(|w| DMatrix::zeros(w.nrows(), w.ncols()))
                .collect(),
            biases: mlp.biases.iter().map(|b| DVector::zeros(b.len())).collect(),
        }
    }

    /// Same order as [`Mlp::params_flat`].
    pub fn flat(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for (w, b) in self.weights.iter().zip(&self.biases) {
            out.extend_from_slice(w.as_slice());
            out.extend_from_slice(b.as_slice());
        }
        out
    }

    pub fn scale(&mut self, s: f64) {
        self.weights.iter_mut().for_each(|w| *w *= s);
        self.biases.iter_mut().for_each(|b| *b *= s);
    }
}

/// `tanh` through one `exp`; about three times faster than `f64::tanh` and
/// within a few ulps of it in absolute terms.
#[inline]
fn fast_tanh(x: f64) -> f64 {
    1.0 - 2.0 / ((2.0 * x).exp() + 1.0)
}

fn shape(expected: impl Into<String>, found: impl Into<String>) -> NeuralError {
    NeuralError::Shape {
        expected: expected.into(),
        found: found.into(),
    }
}
