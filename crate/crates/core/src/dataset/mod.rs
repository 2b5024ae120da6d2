//! Training-tuple generation, serialization, and scene-level splitting.
//!
//! A tuple bundles the observation RGB-D image, the ground-truth panorama at
//! the rendering position, the relation metadata, the transformed and
//! downsampled point cloud, and the SH ground truth. Synthetic box scenes
//! stand in for large license-gated RGB-D corpora; the pipeline math is
//! identical either way.

mod store;
mod synth;

pub use store::{load_tuple, save_tuple, Manifest, ManifestEntry, TUPLE_FORMAT_VERSION};
pub use synth::{generate_synthetic, SceneSpec};

use crate::error::{Error, Result};
use crate::imaging::{CameraIntrinsics, RgbdImage};
use crate::pointcloud::{PointCloud, RenderingRelation};
use crate::sph::{EnvironmentMap, ShCoefficients};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// ((C, D), E, R, P, S) plus provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetTuple {
    pub scene_id: String,
    pub seed: u64,
    pub intrinsics: CameraIntrinsics,
    pub observation: RgbdImage,
    pub env: EnvironmentMap,
    pub relation: RenderingRelation,
    pub cloud: PointCloud,
    pub sh: ShCoefficients,
}

/// Splits items into train/test by scene id: every scene lands on exactly one
/// side. Deterministic per seed; the train share is within one scene of
/// `train_fraction`.
pub fn split<T, F>(items: &[T], scene_id: F, train_fraction: f64, seed: u64) -> Result<(Vec<usize>, Vec<usize>)>
where
    F: Fn(&T) -> &str,
{
    if !(0.0..=1.0).contains(&train_fraction) {
        return Err(Error::InvalidInput("train_fraction must be in [0, 1]".into()));
    }
    let mut scenes: Vec<&str> = items.iter().map(|t| scene_id(t)).collect();
    scenes.sort();
    scenes.dedup();
    if scenes.len() < 2 {
        return Err(Error::TooFewScenes(scenes.len()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    scenes.shuffle(&mut rng);
    let n_train = ((scenes.len() as f64 * train_fraction).round() as usize).clamp(1, scenes.len() - 1);
    let train_scenes: std::collections::HashSet<&str> = scenes[..n_train].iter().copied().collect();
    let mut train = Vec::new();
    let mut test = Vec::new();
    for (i, item) in items.iter().enumerate() {
        if train_scenes.contains(scene_id(item)) {
            train.push(i);
        } else {
            test.push(i);
        }
    }
    Ok((train, test))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tagged(n_scenes: usize, per_scene: usize) -> Vec<String> {
        let mut out = Vec::new();
        for s in 0..n_scenes {
            for _ in 0..per_scene {
                out.push(format!("scene-{s:03}"));
            }
        }
        out
    }

    #[test]
    fn split_ten_scenes_80_20() {
        let items = tagged(10, 4);
        let (train, test) = split(&items, |s| s.as_str(), 0.8, 7).unwrap();
        let train_scenes: std::collections::HashSet<&String> = train.iter().map(|&i| &items[i]).collect();
        let test_scenes: std::collections::HashSet<&String> = test.iter().map(|&i| &items[i]).collect();
        assert_eq!(train_scenes.len(), 8);
        assert_eq!(test_scenes.len(), 2);
        assert_eq!(train.len(), 32);
        assert_eq!(test.len(), 8);
    }

    #[test]
    fn split_is_a_partition_with_no_scene_leakage() {
        let items = tagged(7, 3);
        let (train, test) = split(&items, |s| s.as_str(), 0.6, 3).unwrap();
        assert_eq!(train.len() + test.len(), items.len());
        let train_scenes: std::collections::HashSet<&String> = train.iter().map(|&i| &items[i]).collect();
        for &i in &test {
            assert!(!train_scenes.contains(&items[i]));
        }
    }

    #[test]
    fn split_is_seed_deterministic() {
        let items = tagged(12, 2);
        let a = split(&items, |s| s.as_str(), 0.75, 11).unwrap();
        let b = split(&items, |s| s.as_str(), 0.75, 11).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn split_needs_two_scenes() {
        let items = tagged(1, 5);
        assert!(matches!(split(&items, |s| s.as_str(), 0.5, 0), Err(Error::TooFewScenes(1))));
    }
}
