//! Deterministic seeded training loop with SGD and Adam.

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sph::ShCoefficients;

use super::geometry::CloudGraph;
use super::model::{sh_l2_loss_node, Model, OUTPUT_DIM};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Optimizer {
    Sgd,
    Adam,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub steps: usize,
    pub batch_size: usize,
    pub seed: u64,
    pub optimizer: Optimizer,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self { learning_rate: 1e-3, steps: 1000, batch_size: 8, seed: 0, optimizer: Optimizer::Adam }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate >= 0.0) || self.steps == 0 || self.batch_size == 0 {
            return Err(Error::InvalidInput(
                "learning_rate must be >= 0, steps and batch_size >= 1".into(),
            ));
        }
        Ok(())
    }
}

/// One training example: precomputed cloud structure plus SH ground truth.
pub struct TrainSample {
    pub input: CloudGraph,
    pub truth: ShCoefficients,
}

struct AdamState {
    m: Vec<Array2<f64>>,
    v: Vec<Array2<f64>>,
    t: usize,
}

/// Runs the loop in place and returns the per-step loss curve (mean loss over
/// each step's batch). Deterministic for a fixed seed.
pub fn train(model: &mut Model, samples: &[TrainSample], cfg: &TrainConfig) -> Result<Vec<f64>> {
    cfg.validate()?;
    if samples.is_empty() {
        return Err(Error::InvalidInput("training set is empty".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut adam = AdamState {
        m: model.params.iter().map(|p| Array2::zeros(p.dim())).collect(),
        v: model.params.iter().map(|p| Array2::zeros(p.dim())).collect(),
        t: 0,
    };
    let mut curve = Vec::with_capacity(cfg.steps);
    for step in 0..cfg.steps {
        let batch: Vec<usize> = if cfg.batch_size >= samples.len() {
            (0..samples.len()).collect()
        } else {
            (0..cfg.batch_size).map(|_| rng.gen_range(0..samples.len())).collect()
        };
        let mut grads: Vec<Array2<f64>> = model.params.iter().map(|p| Array2::zeros(p.dim())).collect();
        let mut loss_acc = 0.0;
        for &si in &batch {
            let sample = &samples[si];
            let (mut g, param_ids, out) = model.build_forward(&sample.input);
            let truth_row = Array2::from_shape_vec((1, OUTPUT_DIM), sample.truth.flat().to_vec()).unwrap();
            let truth = g.leaf(truth_row);
            let loss = sh_l2_loss_node(&mut g, out, truth);
            loss_acc += g.value(loss)[(0, 0)];
            g.backward(loss)?;
            for (acc, &id) in grads.iter_mut().zip(&param_ids) {
                if let Some(grad) = g.grad(id) {
                    *acc += grad;
                }
            }
        }
        let scale = 1.0 / batch.len() as f64;
        let step_loss = loss_acc * scale;
        if !step_loss.is_finite() {
            return Err(Error::DivergedLoss { step });
        }
        curve.push(step_loss);
        match cfg.optimizer {
            Optimizer::Sgd => {
                for (p, grad) in model.params.iter_mut().zip(&grads) {
                    *p -= &(grad * (scale * cfg.learning_rate));
                }
            }
            Optimizer::Adam => {
                let (b1, b2, eps): (f64, f64, f64) = (0.9, 0.999, 1e-8);
                adam.t += 1;
                let bc1 = 1.0 - b1.powi(adam.t as i32);
                let bc2 = 1.0 - b2.powi(adam.t as i32);
                for i in 0..model.params.len() {
                    let grad = &grads[i] * scale;
                    adam.m[i] = &adam.m[i] * b1 + &grad * (1.0 - b1);
                    adam.v[i] = &adam.v[i] * b2 + &grad.mapv(|x| x * x) * (1.0 - b2);
                    let update = ndarray::Zip::from(&adam.m[i])
                        .and(&adam.v[i])
                        .map_collect(|&m, &v| (m / bc1) / ((v / bc2).sqrt() + eps));
                    model.params[i] -= &(update * cfg.learning_rate);
                }
            }
        }
    }
    Ok(curve)
}
