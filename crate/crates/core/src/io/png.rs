use std::path::Path;

use crate::error::{Error, Result};
use crate::imaging::RgbdImage;

fn srgb_to_linear(v: f64) -> f64 {
    if v <= 0.04045 {
        v / 12.92
    } else {
        ((v + 0.055) / 1.055).powf(2.4)
    }
}

fn linear_to_srgb(v: f64) -> f64 {
    if v <= 0.0031308 {
        v * 12.92
    } else {
        1.055 * v.powf(1.0 / 2.4) - 0.055
    }
}

/// Loads an 8-bit RGB color PNG plus a 16-bit grayscale depth PNG holding
/// millimeters, producing an RGB-D image in meters. `srgb` applies the
/// sRGB-to-linear transfer on load; core math always sees linear radiance.
pub fn read_rgbd_png(color_path: &Path, depth_path: &Path, srgb: bool) -> Result<RgbdImage> {
    let color_img = image::open(color_path)
        .map_err(|e| Error::Format(format!("{}: {}", color_path.display(), e)))?
        .to_rgb8();
    let depth_img = image::open(depth_path)
        .map_err(|e| Error::Format(format!("{}: {}", depth_path.display(), e)))?
        .to_luma16();
    let (w, h) = (color_img.width() as usize, color_img.height() as usize);
    if (depth_img.width() as usize, depth_img.height() as usize) != (w, h) {
        return Err(Error::InvalidInput("color and depth dimensions differ".into()));
    }
    let color = color_img
        .pixels()
        .map(|p| {
            let mut out = [0.0f64; 3];
            for c in 0..3 {
                let v = p.0[c] as f64 / 255.0;
                out[c] = if srgb { srgb_to_linear(v) } else { v };
            }
            out
        })
        .collect();
    let depth = depth_img.pixels().map(|p| p.0[0] as f64 / 1000.0).collect();
    RgbdImage::new(w, h, color, depth)
}

/// Writes a tonemapped 8-bit RGB preview PNG from linear radiance pixels:
/// fixed exposure multiply, then sRGB encode and clamp.
pub fn write_preview_png(
    path: &Path,
    width: usize,
    height: usize,
    pixels: &[[f64; 3]],
    exposure: f64,
) -> Result<()> {
    if pixels.len() != width * height {
        return Err(Error::InvalidInput("pixel buffer size mismatch".into()));
    }
    let mut buf = image::RgbImage::new(width as u32, height as u32);
    for (i, p) in pixels.iter().enumerate() {
        let mut rgb = [0u8; 3];
        for c in 0..3 {
            let v = linear_to_srgb((p[c].max(0.0) * exposure).min(1.0));
            rgb[c] = (v * 255.0).round().clamp(0.0, 255.0) as u8;
        }
        buf.put_pixel((i % width) as u32, (i / width) as u32, image::Rgb(rgb));
    }
    buf.save(path).map_err(|e| Error::Format(format!("{}: {}", path.display(), e)))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn png_pair_loads_with_millimeter_conversion() {
        let dir = tempfile::tempdir().unwrap();
        let cpath = dir.path().join("c.png");
        let dpath = dir.path().join("d.png");
        let mut c = image::RgbImage::new(2, 2);
        c.put_pixel(0, 0, image::Rgb([255, 0, 0]));
        c.save(&cpath).unwrap();
        let mut d = image::ImageBuffer::<image::Luma<u16>, Vec<u16>>::new(2, 2);
        d.put_pixel(0, 0, image::Luma([1500u16]));
        d.put_pixel(1, 1, image::Luma([250u16]));
        d.save(&dpath).unwrap();
        let img = read_rgbd_png(&cpath, &dpath, false).unwrap();
        assert_eq!(img.depth_at(0, 0), 1.5);
        assert_eq!(img.depth_at(1, 1), 0.25);
        assert_eq!(img.depth_at(1, 0), 0.0);
        assert_eq!(img.color_at(0, 0), [1.0, 0.0, 0.0]);
    }
}
