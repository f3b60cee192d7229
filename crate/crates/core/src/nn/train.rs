use std::io::Write;
use std::path::Path;

use ndarray::{Array2, ArrayView2, Axis};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::loss::LossKind;
use super::net::SurrogateNet;
use super::normalize::{MinMax, Standardizer};
use super::optim::{optimizer_step, OptimizerConfig, OptimizerKind, OptimizerState};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub batch_size: usize,
    pub max_epochs: usize,
    pub patience: usize,
    pub loss: LossKind,
    pub optimizer: OptimizerKind,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        let o = OptimizerConfig::default();
        TrainConfig {
            learning_rate: o.learning_rate,
            batch_size: 132,
            max_epochs: 300,
            patience: 10,
            loss: LossKind::Mae,
            optimizer: o.kind,
            beta1: o.beta1,
            beta2: o.beta2,
            epsilon: o.epsilon,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let pos = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::config(format!("{name} must be positive, got {v}")))
            }
        };
        pos("learning_rate", self.learning_rate)?;
        pos("epsilon", self.epsilon)?;
        if !(0.0..1.0).contains(&self.beta1) || !(0.0..1.0).contains(&self.beta2) {
            return Err(Error::config("betas must lie in [0, 1)"));
        }
        if self.batch_size == 0 || self.max_epochs == 0 || self.patience == 0 {
            return Err(Error::config("batch_size, max_epochs and patience must be >= 1"));
        }
        if self.patience >= self.max_epochs && self.max_epochs > 1 {
            return Err(Error::config(format!(
                "patience ({}) must be smaller than max_epochs ({})",
                self.patience, self.max_epochs
            )));
        }
        Ok(())
    }

    pub fn optimizer_config(&self) -> OptimizerConfig {
        OptimizerConfig {
            kind: self.optimizer,
            learning_rate: self.learning_rate,
            beta1: self.beta1,
            beta2: self.beta2,
            epsilon: self.epsilon,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_loss: f64,
    pub val_loss: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopDecision {
    Improved,
    Continue,
    Stop,
}

/// Patience counter over strictly improving validation loss.
#[derive(Debug, Clone)]
pub struct EarlyStopping {
    pub patience: usize,
    pub best: f64,
    pub best_epoch: usize,
    wait: usize,
}

impl EarlyStopping {
    pub fn new(patience: usize) -> Self {
        EarlyStopping {
            patience,
            best: f64::INFINITY,
            best_epoch: 0,
            wait: 0,
        }
    }

    pub fn update(&mut self, epoch: usize, val_loss: f64) -> StopDecision {
        if val_loss < self.best {
            self.best = val_loss;
            self.best_epoch = epoch;
            self.wait = 0;
            StopDecision::Improved
        } else {
            self.wait += 1;
            if self.wait >= self.patience {
                StopDecision::Stop
            } else {
                StopDecision::Continue
            }
        }
    }
}

/// Raw (unnormalized) train and validation matrices, one row per sample.
#[derive(Debug, Clone)]
pub struct TrainData {
    pub x_train: Array2<f64>,
    pub y_train: Array2<f64>,
    pub x_val: Array2<f64>,
    pub y_val: Array2<f64>,
}

#[derive(Debug, Clone)]
pub struct FitResult {
    pub net: SurrogateNet,
    pub history: Vec<EpochRecord>,
    pub best_epoch: usize,
}

/// Shuffled mini-batches covering every index exactly once.
pub fn epoch_batches(n: usize, batch_size: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<usize>> {
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(rng);
    idx.chunks(batch_size.max(1)).map(|c| c.to_vec()).collect()
}

const EVAL_CHUNK: usize = 4096;

fn mean_loss(net: &SurrogateNet, x: ArrayView2<f64>, y: ArrayView2<f64>, loss: LossKind) -> Result<f64> {
    let n = x.nrows();
    let mut acc = 0.0;
    let mut start = 0;
    while start < n {
        let end = (start + EVAL_CHUNK).min(n);
        let xs = x.slice(ndarray::s![start..end, ..]);
        let ys = y.slice(ndarray::s![start..end, ..]);
        acc += net.loss(xs, ys, loss)? * (end - start) as f64;
        start = end;
    }
    Ok(acc / n.max(1) as f64)
}

/// Trains `net` with early stopping and returns the best-validation weights.
///
/// Normalizers are fitted on the training split only and stored on the
/// returned net. `observer` sees each epoch record as it is produced.
pub fn fit(
    mut net: SurrogateNet,
    data: &TrainData,
    cfg: &TrainConfig,
    observer: &mut dyn FnMut(&EpochRecord),
) -> Result<FitResult> {
    cfg.validate()?;
    if data.x_train.nrows() == 0 || data.x_val.nrows() == 0 {
        return Err(Error::config("training needs nonempty train and validation splits"));
    }
    if data.x_train.nrows() != data.y_train.nrows() || data.x_val.nrows() != data.y_val.nrows() {
        return Err(Error::Shape {
            context: "train/target rows",
            expected: data.x_train.nrows(),
            got: data.y_train.nrows(),
        });
    }
    let out_dim = net.topology.output_dim();
    for y in [&data.y_train, &data.y_val] {
        if y.ncols() != out_dim {
            return Err(Error::Shape {
                context: "target columns",
                expected: out_dim,
                got: y.ncols(),
            });
        }
    }
    net.input_norm = MinMax::fit(data.x_train.view());
    net.output_norm = Standardizer::fit(data.y_train.view());
    let xt = net.input_norm.apply(data.x_train.view());
    let yt = net.output_norm.apply(data.y_train.view());
    let xv = net.input_norm.apply(data.x_val.view());
    let yv = net.output_norm.apply(data.y_val.view());

    let opt = cfg.optimizer_config();
    let mut state = OptimizerState::new(net.n_params());
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut stopper = EarlyStopping::new(cfg.patience);
    let mut best_params = net.params.clone();
    let mut history: Vec<EpochRecord> = Vec::new();

    for epoch in 1..=cfg.max_epochs {
        let mut train_acc = 0.0;
        let step = (|| -> Result<f64> {
            for batch in epoch_batches(xt.nrows(), cfg.batch_size, &mut rng) {
                let xb = xt.select(Axis(0), &batch);
                let yb = yt.select(Axis(0), &batch);
                let (l, g) = net.loss_and_grad(xb.view(), yb.view(), cfg.loss)?;
                train_acc += l * batch.len() as f64;
                optimizer_step(&mut state, &mut net.params, &g, &opt);
            }
            mean_loss(&net, xv.view(), yv.view(), cfg.loss)
        })();
        let val_loss = match step {
            Ok(v) if v.is_finite() => v,
            Ok(_) | Err(Error::Numeric { .. }) => return Err(Error::Diverged { epoch, history }),
            Err(e) => return Err(e),
        };
        let rec = EpochRecord {
            epoch,
            train_loss: train_acc / xt.nrows() as f64,
            val_loss,
        };
        history.push(rec);
        observer(&rec);
        match stopper.update(epoch, val_loss) {
            StopDecision::Improved => best_params.clone_from(&net.params),
            StopDecision::Continue => {}
            StopDecision::Stop => break,
        }
    }
    net.params = best_params;
    Ok(FitResult {
        net,
        history,
        best_epoch: stopper.best_epoch,
    })
}

/// Mean training-split loss of `net` in normalized units, using the net's
/// own normalizers.
pub fn evaluate_loss(net: &SurrogateNet, x_raw: ArrayView2<f64>, y_raw: ArrayView2<f64>, loss: LossKind) -> Result<f64> {
    let x = net.input_norm.apply(x_raw);
    let y = net.output_norm.apply(y_raw);
    mean_loss(net, x.view(), y.view(), loss)
}

pub fn write_history_csv(path: &Path, history: &[EpochRecord]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    for r in history {
        w.serialize(r).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

pub(crate) fn csv_err(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Io(std::io::Error::other(format!("{other:?}"))),
    }
}

/// Plain-text progress line used by the CLI.
pub fn log_epoch(out: &mut dyn Write, r: &EpochRecord) {
    let _ = writeln!(out, "epoch {:>4}  train {:.6e}  val {:.6e}", r.epoch, r.train_loss, r.val_loss);
}
