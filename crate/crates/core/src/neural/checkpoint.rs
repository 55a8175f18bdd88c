use std::fs;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{AdamState, Mlp, MlpGrads, NeuralError};

pub const CHECKPOINT_FORMAT: &str = "mmg-checkpoint";
pub const CHECKPOINT_VERSION: u32 = 1;

/// Versioned JSON container for a set of named networks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub format: String,
    pub version: u32,
    #[serde(default)]
    pub meta: serde_json::Map<String, serde_json::Value>,
    pub networks: Vec<NetworkCheckpoint>,
}

/// One network, weights stored row-major per layer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkCheckpoint {
    pub name: String,
    pub layer_sizes: Vec<usize>,
    pub weights: Vec<Vec<f64>>,
    pub biases: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub adam: Option<AdamCheckpoint>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdamCheckpoint {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub step: u64,
    pub m_weights: Vec<Vec<f64>>,
    pub m_biases: Vec<Vec<f64>>,
    pub v_weights: Vec<Vec<f64>>,
    pub v_biases: Vec<Vec<f64>>,
}

fn row_major(m: &DMatrix<f64>) -> Vec<f64> {
    m.transpose().as_slice().to_vec()
}

fn matrices(sizes: &[usize], rows: &[Vec<f64>]) -> Result<Vec<DMatrix<f64>>, NeuralError> {
    if rows.len() + 1 != sizes.len() {
        return Err(bad(format!("{} weight blocks for {} layers", rows.len(), sizes.len())));
    }
    sizes
        .windows(2)
        .zip(rows)
        .map(|(w, data)| {
            if data.len() != w[0] * w[1] {
                return Err(bad(format!("weight block of {} values, expected {}", data.len(), w[0] * w[1])));
            }
            Ok(DMatrix::from_row_slice(w[1], w[0], data))
        })
        .collect()
}

fn vectors(sizes: &[usize], data: &[Vec<f64>]) -> Result<Vec<DVector<f64>>, NeuralError> {
    if data.len() + 1 != sizes.len() {
        return Err(bad(format!("{} bias blocks for {} layers", data.len(), sizes.len())));
    }
    sizes[1..]
        .iter()
        .zip(data)
        .map(|(&n, b)| {
            if b.len() != n {
                return Err(bad(format!("bias block of {} values, expected {n}", b.len())));
            }
            Ok(DVector::from_column_slice(b))
        })
        .collect()
}

fn bad(msg: String) -> NeuralError {
    NeuralError::Checkpoint(msg)
}

impl NetworkCheckpoint {
    pub fn from_net(name: &str, net: &Mlp, adam: Option<&AdamState>) -> Self {
        let grads_rows = |g: &MlpGrads| -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
            (
                g.weights.iter().map(row_major).collect(),
                g.biases.iter().map(|b| b.as_slice().to_vec()).collect(),
            )
        };
        NetworkCheckpoint {
            name: name.to_string(),
            layer_sizes: net.layer_sizes().to_vec(),
            weights: net.weights().iter().map(row_major).collect(),
            biases: net.biases().iter().map(|b| b.as_slice().to_vec()).collect(),
            adam: adam.map(|a| {
                let (m_weights, m_biases) = grads_rows(&a.m);
                let (v_weights, v_biases) = grads_rows(&a.v);
                AdamCheckpoint {
                    lr: a.lr,
                    beta1: a.beta1,
                    beta2: a.beta2,
                    eps: a.eps,
                    step: a.step,
                    m_weights,
                    m_biases,
                    v_weights,
                    v_biases,
                }
            }),
        }
    }

    pub fn to_net(&self) -> Result<Mlp, NeuralError> {
        let net = Mlp::from_parts(
            matrices(&self.layer_sizes, &self.weights)?,
            vectors(&self.layer_sizes, &self.biases)?,
        )
        .map_err(|e| bad(format!("network `{}`: {e}", self.name)))?;
        Ok(net)
    }

    pub fn to_adam(&self) -> Result<Option<AdamState>, NeuralError> {
        let Some(a) = &self.adam else { return Ok(None) };
        let s = &self.layer_sizes;
        Ok(Some(AdamState {
            lr: a.lr,
            beta1: a.beta1,
            beta2: a.beta2,
            eps: a.eps,
            step: a.step,
            m: MlpGrads {
                weights: matrices(s, &a.m_weights)?,
                biases: vectors(s, &a.m_biases)?,
            },
            v: MlpGrads {
                weights: matrices(s, &a.v_weights)?,
                biases: vectors(s, &a.v_biases)?,
            },
        }))
    }
}

impl Checkpoint {
    pub fn new(networks: Vec<NetworkCheckpoint>) -> Self {
        Checkpoint {
            format: CHECKPOINT_FORMAT.to_string(),
            version: CHECKPOINT_VERSION,
            meta: Default::default(),
            networks,
        }
    }

    pub fn network(&self, name: &str) -> Result<&NetworkCheckpoint, NeuralError> {
        self.networks
            .iter()
            .find(|n| n.name == name)
            .ok_or_else(|| bad(format!("no network named `{name}`")))
    }

    pub fn to_json(&self) -> Result<String, NeuralError> {
        serde_json::to_string_pretty(self).map_err(|e| bad(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self, NeuralError> {
        let ck: Checkpoint = serde_json::from_str(text).map_err(|e| bad(e.to_string()))?;
        if ck.format != CHECKPOINT_FORMAT {
            return Err(bad(format!("unknown format `{}`", ck.format)));
        }
        if ck.version != CHECKPOINT_VERSION {
            return Err(bad(format!(
                "unsupported version {} (expected {CHECKPOINT_VERSION})",
                ck.version
            )));
        }
        Ok(ck)
    }

    pub fn save(&self, path: &Path) -> Result<(), NeuralError> {
        fs::write(path, self.to_json()?).map_err(|e| bad(format!("{}: {e}", path.display())))
    }

    pub fn load(path: &Path) -> Result<Self, NeuralError> {
        let text = fs::read_to_string(path).map_err(|e| bad(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }
}
