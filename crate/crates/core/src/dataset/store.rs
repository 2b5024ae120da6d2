//! On-disk tuple layout: one directory per tuple holding `o.rgbd`, `e.pfm`,
//! `r.json`, `p.lpc`, `s.json`, plus a `tuple.json` with format version,
//! provenance, and SHA-256 checksums. A dataset root carries `manifest.json`
//! enumerating all tuples.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::imaging::CameraIntrinsics;
use crate::io;

use super::DatasetTuple;

pub const TUPLE_FORMAT_VERSION: u32 = 1;

const DATA_FILES: [&str; 5] = ["o.rgbd", "e.pfm", "r.json", "p.lpc", "s.json"];

#[derive(Debug, Serialize, Deserialize, Clone)]
struct TupleMeta {
    version: u32,
    scene_id: String,
    seed: u64,
    intrinsics: CameraIntrinsics,
    image_dims: [usize; 2],
    env_dims: [usize; 2],
    n_points: usize,
    checksums: std::collections::BTreeMap<String, String>,
}

#[derive(Debug, Serialize, Deserialize, Clone, PartialEq)]
pub struct ManifestEntry {
    pub dir: String,
    pub scene_id: String,
    pub seed: u64,
    pub checksums: std::collections::BTreeMap<String, String>,
}

/// Top-level dataset index, written once after generation.
#[derive(Debug, Serialize, Deserialize, Clone, Default, PartialEq)]
pub struct Manifest {
    pub version: u32,
    pub tuples: Vec<ManifestEntry>,
}

impl Manifest {
    pub fn save(&self, root: &Path) -> Result<()> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        std::fs::write(root.join("manifest.json"), text)?;
        Ok(())
    }

    pub fn load(root: &Path) -> Result<Self> {
        let m: Manifest = serde_json::from_str(&std::fs::read_to_string(root.join("manifest.json"))?)?;
        if m.version != TUPLE_FORMAT_VERSION {
            return Err(Error::FormatVersionMismatch {
                expected: TUPLE_FORMAT_VERSION,
                found: m.version,
            });
        }
        Ok(m)
    }
}

fn sha256_hex(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path)?;
    let mut hasher = Sha256::new();
    hasher.update(&bytes);
    Ok(format!("{:x}", hasher.finalize()))
}

/// Writes all five items plus `tuple.json`; returns the manifest entry.
pub fn save_tuple(dir: &Path, tuple: &DatasetTuple) -> Result<ManifestEntry> {
    std::fs::create_dir_all(dir)?;
    io::write_rgbd(&dir.join("o.rgbd"), &tuple.observation)?;
    io::write_pfm(
        &dir.join("e.pfm"),
        tuple.env.width(),
        tuple.env.height(),
        tuple.env.pixels(),
    )?;
    let mut rel_text = serde_json::to_string_pretty(&tuple.relation)?;
    rel_text.push('\n');
    std::fs::write(dir.join("r.json"), rel_text)?;
    io::write_lpc(&dir.join("p.lpc"), &tuple.cloud)?;
    io::write_sh_json(&dir.join("s.json"), &tuple.sh)?;

    let mut checksums = std::collections::BTreeMap::new();
    for name in DATA_FILES {
        checksums.insert(name.to_string(), sha256_hex(&dir.join(name))?);
    }
    let meta = TupleMeta {
        version: TUPLE_FORMAT_VERSION,
        scene_id: tuple.scene_id.clone(),
        seed: tuple.seed,
        intrinsics: tuple.intrinsics,
        image_dims: [tuple.observation.width(), tuple.observation.height()],
        env_dims: [tuple.env.width(), tuple.env.height()],
        n_points: tuple.cloud.len(),
        checksums: checksums.clone(),
    };
    let mut text = serde_json::to_string_pretty(&meta)?;
    text.push('\n');
    std::fs::write(dir.join("tuple.json"), text)?;
    Ok(ManifestEntry {
        dir: dir.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default(),
        scene_id: tuple.scene_id.clone(),
        seed: tuple.seed,
        checksums,
    })
}

/// Loads a tuple directory, verifying the format version and every checksum.
pub fn load_tuple(dir: &Path) -> Result<DatasetTuple> {
    let meta: TupleMeta = serde_json::from_str(&std::fs::read_to_string(dir.join("tuple.json"))?)?;
    if meta.version != TUPLE_FORMAT_VERSION {
        return Err(Error::FormatVersionMismatch {
            expected: TUPLE_FORMAT_VERSION,
            found: meta.version,
        });
    }
    for name in DATA_FILES {
        let path = dir.join(name);
        let expected = meta
            .checksums
            .get(name)
            .ok_or_else(|| Error::Format(format!("tuple.json missing checksum for {name}")))?;
        if &sha256_hex(&path)? != expected {
            return Err(Error::ChecksumMismatch { path: path.display().to_string() });
        }
    }
    let observation = io::read_rgbd(&dir.join("o.rgbd"))?;
    let (ew, eh, env_pixels) = io::read_pfm(&dir.join("e.pfm"))?;
    let env = crate::sph::EnvironmentMap::new(ew, eh, env_pixels)?;
    let relation = serde_json::from_str(&std::fs::read_to_string(dir.join("r.json"))?)?;
    let cloud = io::read_lpc(&dir.join("p.lpc"))?;
    let sh = io::read_sh_json(&dir.join("s.json"))?;
    Ok(DatasetTuple {
        scene_id: meta.scene_id,
        seed: meta.seed,
        intrinsics: meta.intrinsics,
        observation,
        env,
        relation,
        cloud,
        sh,
    })
}
