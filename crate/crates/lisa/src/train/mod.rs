//! Desk-scale training and worst-group evaluation.
//!
//! Plain SGD over small linear, logistic and one-hidden-layer models, with
//! the training schemes compared throughout the crate: raw regression,
//! inverse-frequency upweighting, vanilla mixup, in-group mixup and selective
//! mixing. [`make_cmnist_analog`] generates the two-feature
//! spurious-correlation task used by the end-to-end experiments.

mod batching;
mod cmnist;
mod model;
mod run;

pub use batching::{group_balanced_batches, upweights, GroupBalancedBatches};
pub use cmnist::{make_cmnist_analog, INVARIANT_MEAN, SPURIOUS_MEAN};
pub use model::{loss_and_grad, Loss, ModelKind, PredictiveModel};
pub use run::{evaluate, train, EvalReport, TrainConfig, TrainMethod};

pub(crate) mod model_internals {
    pub(crate) use super::model::loss_and_score_grad;
}
