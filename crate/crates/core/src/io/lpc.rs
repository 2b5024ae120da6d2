use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::pointcloud::{Point, PointCloud};

const MAGIC: &[u8; 4] = b"LPC1";

/// Writes a point cloud: magic "LPC1", u64 count, then count x 6 f32
/// (x, y, z, r, g, b), all little-endian.
pub fn write_lpc(path: &Path, pc: &PointCloud) -> Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    f.write_all(MAGIC)?;
    f.write_all(&(pc.len() as u64).to_le_bytes())?;
    for p in pc.points() {
        for v in p.position {
            f.write_all(&(v as f32).to_le_bytes())?;
        }
        for v in p.color {
            f.write_all(&(v as f32).to_le_bytes())?;
        }
    }
    f.flush()?;
    Ok(())
}

pub fn read_lpc(path: &Path) -> Result<PointCloud> {
    let mut f = std::io::BufReader::new(std::fs::File::open(path)?);
    let mut magic = [0u8; 4];
    f.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Format(format!("{}: bad .lpc magic", path.display())));
    }
    let mut count_buf = [0u8; 8];
    f.read_exact(&mut count_buf)?;
    let count = u64::from_le_bytes(count_buf) as usize;
    let mut points = Vec::with_capacity(count);
    let mut buf = [0u8; 24];
    for _ in 0..count {
        f.read_exact(&mut buf)?;
        let mut vals = [0.0f64; 6];
        for (i, v) in vals.iter_mut().enumerate() {
            *v = f32::from_le_bytes(buf[i * 4..i * 4 + 4].try_into().unwrap()) as f64;
        }
        points.push(Point { position: [vals[0], vals[1], vals[2]], color: [vals[3], vals[4], vals[5]] });
    }
    Ok(PointCloud::new(points))
}
