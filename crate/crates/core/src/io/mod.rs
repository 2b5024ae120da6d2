//! File formats: PFM panoramas, `.lpc` point clouds, `.rgbd` containers,
//! SH coefficient JSON, PNG ingestion, and `.lptm` model checkpoints.

mod checkpoint;
mod lpc;
mod pfm;
mod png;
mod rgbd;
mod shjson;

pub use checkpoint::{load_checkpoint, save_checkpoint};
pub use lpc::{read_lpc, write_lpc};
pub use pfm::{read_pfm, read_pfm_env, write_pfm};
pub use png::{read_rgbd_png, write_preview_png};
pub use rgbd::{read_rgbd, write_rgbd};
pub use shjson::{read_sh_json, write_sh_json, ShJson};
