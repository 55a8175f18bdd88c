use super::{Mlp, MlpGrads, NeuralError};

/// Adam optimizer state for one network.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub step: u64,
    pub m: MlpGrads,
    pub v: MlpGrads,
}

impl AdamState {
    pub fn new(net: &Mlp, lr: f64) -> Self {
        AdamState {
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            step: 0,
            m: MlpGrads::zeros_like(net),
            v: MlpGrads::zeros_like(net),
        }
    }

    /// One bias-corrected descent step. Rejects non-finite gradients before
    /// touching either the moments or the parameters.
    pub fn update(&mut self, net: &mut Mlp, grads: &MlpGrads) -> Result<(), NeuralError> {
        for (k, (w, b)) in grads.weights.iter().zip(&grads.biases).enumerate() {
            if !w.iter().chain(b.iter()).all(|v| v.is_finite()) {
                return Err(NeuralError::NonFiniteGradient { layer: k });
            }
        }
        if grads.weights.len() != net.n_layers() {
            return Err(NeuralError::Shape {
                expected: format!("{} layers", net.n_layers()),
                found: grads.weights.len().to_string(),
            });
        }
        self.step += 1;
        let t = self.step as i32;
        let c1 = 1.0 - self.beta1.powi(t);
        let c2 = 1.0 - self.beta2.powi(t);
        let (b1, b2, lr, eps) = (self.beta1, self.beta2, self.lr, self.eps);
        let step_fn = |p: &mut f64, g: f64, m: &mut f64, v: &mut f64| {
            *m = b1 * *m + (1.0 - b1) * g;
            *v = b2 * *v + (1.0 - b2) * g * g;
            let m_hat = *m / c1;
            let v_hat = *v / c2;
            *p -= lr * m_hat / (v_hat.sqrt() + eps);
        };
        for k in 0..net.n_layers() {
            let w = net.weights_mut()[k].as_mut_slice();
            let (gw, mw, vw) = (
                grads.weights[k].as_slice(),
                self.m.weights[k].as_mut_slice(),
                self.v.weights[k].as_mut_slice(),
            );
            for i in 0..w.len() {
                step_fn(&mut w[i], gw[i], &mut mw[i], &mut vw[i]);
            }
            let b = net.biases_mut()[k].as_mut_slice();
            let (gb, mb, vb) = (
                grads.biases[k].as_slice(),
                self.m.biases[k].as_mut_slice(),
                self.v.biases[k].as_mut_slice(),
            );
            for i in 0..b.len() {
                step_fn(&mut b[i], gb[i], &mut mb[i], &mut vb[i]);
            }
        }
        Ok(())
    }
}
