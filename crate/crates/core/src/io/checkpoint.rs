use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};

const MAGIC: &[u8; 4] = b"LPTM";
const VERSION: u32 = 1;

/// Writes a model checkpoint: magic "LPTM", u32 version, u64 config JSON
/// length + bytes, u32 array count, then each parameter array as u64 length
/// plus f64 little-endian values, in declaration order.
pub fn save_checkpoint(path: &Path, config_json: &str, arrays: &[&[f64]]) -> Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    f.write_all(MAGIC)?;
    f.write_all(&VERSION.to_le_bytes())?;
    f.write_all(&(config_json.len() as u64).to_le_bytes())?;
    f.write_all(config_json.as_bytes())?;
    f.write_all(&(arrays.len() as u32).to_le_bytes())?;
    for a in arrays {
        f.write_all(&(a.len() as u64).to_le_bytes())?;
        for v in *a {
            f.write_all(&v.to_le_bytes())?;
        }
    }
    f.flush()?;
    Ok(())
}

pub fn load_checkpoint(path: &Path) -> Result<(String, Vec<Vec<f64>>)> {
    let mut f = std::io::BufReader::new(std::fs::File::open(path)?);
    let mut magic = [0u8; 4];
    f.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Format(format!("{}: bad checkpoint magic", path.display())));
    }
    let mut b4 = [0u8; 4];
    f.read_exact(&mut b4)?;
    let version = u32::from_le_bytes(b4);
    if version != VERSION {
        return Err(Error::FormatVersionMismatch { expected: VERSION, found: version });
    }
    let mut b8 = [0u8; 8];
    f.read_exact(&mut b8)?;
    let json_len = u64::from_le_bytes(b8) as usize;
    let mut json_buf = vec![0u8; json_len];
    f.read_exact(&mut json_buf)?;
    let config_json =
        String::from_utf8(json_buf).map_err(|_| Error::Format("checkpoint config is not UTF-8".into()))?;
    f.read_exact(&mut b4)?;
    let count = u32::from_le_bytes(b4) as usize;
    let mut arrays = Vec::with_capacity(count);
    for _ in 0..count {
        f.read_exact(&mut b8)?;
        let len = u64::from_le_bytes(b8) as usize;
        let mut vals = Vec::with_capacity(len);
        let mut buf = vec![0u8; len * 8];
        f.read_exact(&mut buf)?;
        for i in 0..len {
            vals.push(f64::from_le_bytes(buf[i * 8..i * 8 + 8].try_into().unwrap()));
        }
        arrays.push(vals);
    }
    Ok((config_json, arrays))
}
