use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::imaging::RgbdImage;

/// Writes the binary `.rgbd` container: u32 width, u32 height, then
/// width*height RGB f32 triples, then width*height depth f32, little-endian.
pub fn write_rgbd(path: &Path, img: &RgbdImage) -> Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    f.write_all(&(img.width() as u32).to_le_bytes())?;
    f.write_all(&(img.height() as u32).to_le_bytes())?;
    for p in img.color() {
        for c in p {
            f.write_all(&(*c as f32).to_le_bytes())?;
        }
    }
    for d in img.depth() {
        f.write_all(&(*d as f32).to_le_bytes())?;
    }
    f.flush()?;
    Ok(())
}

pub fn read_rgbd(path: &Path) -> Result<RgbdImage> {
    let mut f = std::io::BufReader::new(std::fs::File::open(path)?);
    let mut b4 = [0u8; 4];
    f.read_exact(&mut b4)?;
    let width = u32::from_le_bytes(b4) as usize;
    f.read_exact(&mut b4)?;
    let height = u32::from_le_bytes(b4) as usize;
    let n = width
        .checked_mul(height)
        .ok_or_else(|| Error::Format("rgbd dimensions overflow".into()))?;
    let mut color = Vec::with_capacity(n);
    let mut buf = vec![0u8; n * 12];
    f.read_exact(&mut buf)?;
    for i in 0..n {
        let mut p = [0.0f64; 3];
        for c in 0..3 {
            p[c] = f32::from_le_bytes(buf[i * 12 + c * 4..i * 12 + c * 4 + 4].try_into().unwrap()) as f64;
        }
        color.push(p);
    }
    let mut dbuf = vec![0u8; n * 4];
    f.read_exact(&mut dbuf)?;
    let depth = (0..n)
        .map(|i| f32::from_le_bytes(dbuf[i * 4..i * 4 + 4].try_into().unwrap()) as f64)
        .collect();
    RgbdImage::new(width, height, color, depth)
}
