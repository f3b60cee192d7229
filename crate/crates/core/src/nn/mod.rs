//! Feed-forward surrogate networks: topology, forward/backward passes,
//! optimizers, training loop and checkpoints.

pub mod activation;
pub mod checkpoint;
pub mod loss;
pub mod net;
pub mod normalize;
pub mod optim;
pub mod samples;
pub mod topology;
pub mod train;

pub use activation::Activation;
pub use checkpoint::{Checkpoint, NetKind};
pub use loss::{loss_mae, LossKind};
pub use net::SurrogateNet;
pub use normalize::{MinMax, Standardizer};
pub use optim::{optimizer_step, OptimizerConfig, OptimizerKind, OptimizerState};
pub use samples::{predict_measures, PredictedMeasures};
pub use topology::{BranchSpec, NetTopology, Preset, HYBRID_BRANCHES};
pub use train::{fit, EarlyStopping, EpochRecord, FitResult, TrainConfig, TrainData};
