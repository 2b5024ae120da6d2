use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sph::ShCoefficients;

/// On-disk SH coefficient format. Coefficients are stored as f32.
#[derive(Debug, Serialize, Deserialize)]
pub struct ShJson {
    pub order: u32,
    pub layout: String,
    pub channels: Vec<String>,
    pub coeffs: Vec<Vec<f32>>,
}

pub fn write_sh_json(path: &Path, sh: &ShCoefficients) -> Result<()> {
    let doc = ShJson {
        order: 2,
        layout: "lm-row-major".into(),
        channels: vec!["r".into(), "g".into(), "b".into()],
        coeffs: sh.coeffs.iter().map(|ch| ch.iter().map(|v| *v as f32).collect()).collect(),
    };
    let mut text = serde_json::to_string_pretty(&doc)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

pub fn read_sh_json(path: &Path) -> Result<ShCoefficients> {
    let doc: ShJson = serde_json::from_str(&std::fs::read_to_string(path)?)?;
    if doc.order != 2 || doc.layout != "lm-row-major" || doc.coeffs.len() != 3 {
        return Err(Error::Format(format!("{}: unsupported SH layout", path.display())));
    }
    let mut coeffs = [[0.0f64; 9]; 3];
    for (c, channel) in doc.coeffs.iter().enumerate() {
        if channel.len() != 9 {
            return Err(Error::Format("SH channel must hold 9 coefficients".into()));
        }
        for (i, v) in channel.iter().enumerate() {
            coeffs[c][i] = *v as f64;
        }
    }
    ShCoefficients::new(coeffs)
}
