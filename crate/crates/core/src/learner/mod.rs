//! Reverse-mode autodiff core, the PointConv-style SH regressor, its loss,
//! and the deterministic training loop.

pub mod autodiff;
mod geometry;
mod model;
mod train;

pub use autodiff::{Graph, TensorId};
pub use geometry::{BlockGeometry, CloudGraph};
pub use model::{sh_l2_loss, sh_l2_loss_node, BlockConfig, Model, PointConvConfig, OUTPUT_DIM};
pub use train::{train, Optimizer, TrainConfig, TrainSample};
