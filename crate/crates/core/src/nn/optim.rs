use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OptimizerKind {
    Adam,
    Adamax,
    Adagrad,
    Nadam,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptimizerConfig {
    pub kind: OptimizerKind,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            kind: OptimizerKind::Adam,
            learning_rate: 2.6e-4,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

/// First/second moment buffers and the step counter.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerState {
    pub step: u64,
    m: Vec<f64>,
    v: Vec<f64>,
}

impl OptimizerState {
    pub fn new(n_params: usize) -> Self {
        OptimizerState {
            step: 0,
            m: vec![0.0; n_params],
            v: vec![0.0; n_params],
        }
    }
}

pub fn optimizer_step(state: &mut OptimizerState, params: &mut [f64], grads: &[f64], cfg: &OptimizerConfig) {
    assert_eq!(params.len(), grads.len());
    assert_eq!(params.len(), state.m.len());
    state.step += 1;
    let t = state.step as f64;
    let (b1, b2, eps, lr) = (cfg.beta1, cfg.beta2, cfg.epsilon, cfg.learning_rate);
    let c1 = 1.0 - b1.powf(t);
    let c2 = 1.0 - b2.powf(t);
    let (m, v) = (&mut state.m, &mut state.v);
    match cfg.kind {
        OptimizerKind::Adam => {
            for i in 0..params.len() {
                let g = grads[i];
                m[i] = b1 * m[i] + (1.0 - b1) * g;
                v[i] = b2 * v[i] + (1.0 - b2) * g * g;
                let mh = m[i] / c1;
                let vh = v[i] / c2;
                params[i] -= lr * mh / (vh.sqrt() + eps);
            }
        }
        OptimizerKind::Adamax => {
            // v holds the exponentially weighted infinity norm
            for i in 0..params.len() {
                let g = grads[i];
                m[i] = b1 * m[i] + (1.0 - b1) * g;
                v[i] = (b2 * v[i]).max(g.abs());
                params[i] -= lr * (m[i] / c1) / (v[i] + eps);
            }
        }
        OptimizerKind::Adagrad => {
            for i in 0..params.len() {
                let g = grads[i];
                v[i] += g * g;
                params[i] -= lr * g / (v[i].sqrt() + eps);
            }
        }
        OptimizerKind::Nadam => {
            let c1_next = 1.0 - b1.powf(t + 1.0);
            for i in 0..params.len() {
                let g = grads[i];
                m[i] = b1 * m[i] + (1.0 - b1) * g;
                v[i] = b2 * v[i] + (1.0 - b2) * g * g;
                let mh = b1 * m[i] / c1_next + (1.0 - b1) * g / c1;
                let vh = v[i] / c2;
                params[i] -= lr * mh / (vh.sqrt() + eps);
            }
        }
    }
}
