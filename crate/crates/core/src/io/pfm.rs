use std::io::{BufRead, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::sph::EnvironmentMap;

/// Writes a color PFM (32-bit float, little-endian, rows bottom-to-top per
/// the format convention). The -1 missing sentinel passes through unchanged.
pub fn write_pfm(path: &Path, width: usize, height: usize, pixels: &[[f64; 3]]) -> Result<()> {
    if pixels.len() != width * height {
        return Err(Error::InvalidInput("pixel buffer size mismatch".into()));
    }
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    write!(f, "PF\n{} {}\n-1.0\n", width, height)?;
    for v in (0..height).rev() {
        for u in 0..width {
            for c in 0..3 {
                f.write_all(&(pixels[v * width + u][c] as f32).to_le_bytes())?;
            }
        }
    }
    f.flush()?;
    Ok(())
}

/// Reads a color PFM into (width, height, row-major top-down pixels).
pub fn read_pfm(path: &Path) -> Result<(usize, usize, Vec<[f64; 3]>)> {
    let mut f = std::io::BufReader::new(std::fs::File::open(path)?);
    let mut header = String::new();
    f.read_line(&mut header)?;
    if header.trim() != "PF" {
        return Err(Error::Format(format!("{}: not a color PFM", path.display())));
    }
    let mut dims = String::new();
    f.read_line(&mut dims)?;
    let mut it = dims.split_whitespace();
    let width: usize = it
        .next()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| Error::Format("bad PFM dimensions".into()))?;
    let height: usize = it
        .next()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| Error::Format("bad PFM dimensions".into()))?;
    let mut scale_line = String::new();
    f.read_line(&mut scale_line)?;
    let scale: f64 = scale_line.trim().parse().map_err(|_| Error::Format("bad PFM scale".into()))?;
    let little_endian = scale < 0.0;
    let mut data = vec![0u8; width * height * 12];
    f.read_exact(&mut data)?;
    let mut pixels = vec![[0.0f64; 3]; width * height];
    for row in 0..height {
        let v = height - 1 - row; // PFM stores bottom row first
        for u in 0..width {
            let base = (row * width + u) * 12;
            for c in 0..3 {
                let b: [u8; 4] = data[base + c * 4..base + c * 4 + 4].try_into().unwrap();
                let val = if little_endian { f32::from_le_bytes(b) } else { f32::from_be_bytes(b) };
                pixels[v * width + u][c] = val as f64;
            }
        }
    }
    Ok((width, height, pixels))
}

/// Reads a PFM that is expected to be an equirectangular environment map.
pub fn read_pfm_env(path: &Path) -> Result<EnvironmentMap> {
    let (w, h, pixels) = read_pfm(path)?;
    EnvironmentMap::new(w, h, pixels)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pfm_round_trip_preserves_values_and_orientation() {
        let (w, h) = (4usize, 2usize);
        let pixels: Vec<[f64; 3]> = (0..w * h).map(|i| [i as f64, 0.5, -1.0]).collect();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.pfm");
        write_pfm(&path, w, h, &pixels).unwrap();
        let (rw, rh, back) = read_pfm(&path).unwrap();
        assert_eq!((rw, rh), (w, h));
        assert_eq!(back, pixels);
    }
}
