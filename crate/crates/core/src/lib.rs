//! Two-stage lighting estimation for AR: RGB-D observations become point
//! clouds, the view is transformed to the rendering position, and a compact
//! point-cloud network regresses 2nd-order spherical-harmonics lighting.

pub mod dataset;
pub mod error;
pub mod imaging;
pub mod io;
pub mod learner;
pub mod metrics;
pub mod pointcloud;
pub mod sph;

pub use error::{Error, Result};
pub use imaging::{CameraIntrinsics, DepthFillConfig, RgbdImage};
pub use pointcloud::{Point, PointCloud, RenderingRelation};
pub use sph::{EnvironmentMap, IrradianceMap, ShCoefficients};
