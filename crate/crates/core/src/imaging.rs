//! RGB-D images, cross-bilateral depth hole filling, and pinhole unprojection.
//!
//! Camera convention: +z forward along the optical axis, +x right, +y down
//! (image-aligned), so the unprojection equations hold verbatim:
//! `x = (u - cx) * z / fx`, `y = (v - cy) * z / fy`.

use crate::error::{Error, Result};
use crate::pointcloud::{Point, PointCloud};

/// Pinhole camera intrinsics in pixel units.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct CameraIntrinsics {
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
}

impl CameraIntrinsics {
    /// Validates against the paired image dimensions.
    pub fn validate(&self, width: usize, height: usize) -> Result<()> {
        if !(self.fx > 0.0 && self.fy > 0.0) {
            return Err(Error::InvalidInput(format!(
                "focal lengths must be positive, got fx={} fy={}",
                self.fx, self.fy
            )));
        }
        if !(self.cx >= 0.0 && self.cx < width as f64) || !(self.cy >= 0.0 && self.cy < height as f64) {
            return Err(Error::InvalidInput(format!(
                "principal point ({}, {}) outside {}x{} image",
                self.cx, self.cy, width, height
            )));
        }
        Ok(())
    }

    /// Unprojects a single pixel at depth `z` into the camera frame.
    pub fn unproject_pixel(&self, u: f64, v: f64, z: f64) -> [f64; 3] {
        [(u - self.cx) * z / self.fx, (v - self.cy) * z / self.fy, z]
    }

    /// Projects a camera-frame point back to pixel coordinates.
    pub fn project_point(&self, p: [f64; 3]) -> [f64; 2] {
        [p[0] * self.fx / p[2] + self.cx, p[1] * self.fy / p[2] + self.cy]
    }
}

/// An aligned color + depth image pair. Depth is in meters; 0 marks a missing
/// measurement. Color is linear radiance.
#[derive(Debug, Clone, PartialEq)]
pub struct RgbdImage {
    width: usize,
    height: usize,
    color: Vec<[f64; 3]>,
    depth: Vec<f64>,
}

impl RgbdImage {
    pub fn new(width: usize, height: usize, color: Vec<[f64; 3]>, depth: Vec<f64>) -> Result<Self> {
        if color.len() != width * height || depth.len() != width * height {
            return Err(Error::InvalidInput(format!(
                "buffer sizes ({}, {}) do not match {}x{} image",
                color.len(),
                depth.len(),
                width,
                height
            )));
        }
        if depth.iter().any(|d| !d.is_finite() || *d < 0.0) {
            return Err(Error::InvalidInput("depth must be finite and non-negative".into()));
        }
        Ok(Self { width, height, color, depth })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn color(&self) -> &[[f64; 3]] {
        &self.color
    }

    pub fn depth(&self) -> &[f64] {
        &self.depth
    }

    pub fn color_at(&self, u: usize, v: usize) -> [f64; 3] {
        self.color[v * self.width + u]
    }

    pub fn depth_at(&self, u: usize, v: usize) -> f64 {
        self.depth[v * self.width + u]
    }
}

/// Cross-bilateral filter parameters for depth hole filling.
#[derive(Debug, Clone, Copy, serde::Serialize, serde::Deserialize)]
pub struct DepthFillConfig {
    /// Spatial Gaussian sigma in pixels.
    pub spatial_sigma: f64,
    /// Range Gaussian sigma in linear-RGB distance units.
    pub range_sigma: f64,
    /// Half-width of the square filter window in pixels.
    pub window_radius: usize,
}

impl Default for DepthFillConfig {
    fn default() -> Self {
        Self { spatial_sigma: 2.0, range_sigma: 0.1, window_radius: 5 }
    }
}

impl DepthFillConfig {
    pub fn validate(&self, width: usize, height: usize) -> Result<()> {
        if self.spatial_sigma <= 0.0 || self.range_sigma <= 0.0 || self.window_radius == 0 {
            return Err(Error::InvalidInput("depth-fill parameters must be strictly positive".into()));
        }
        if self.window_radius > width.min(height) / 2 {
            return Err(Error::InvalidInput(format!(
                "window_radius {} exceeds min(width, height)/2 = {}",
                self.window_radius,
                width.min(height) / 2
            )));
        }
        Ok(())
    }
}

fn color_dist2(a: [f64; 3], b: [f64; 3]) -> f64 {
    let dr = a[0] - b[0];
    let dg = a[1] - b[1];
    let db = a[2] - b[2];
    dr * dr + dg * dg + db * db
}

/// Fills missing (zero) depth pixels with a cross-bilateral weighted average of
/// valid neighbor depths, guided by the color image. Valid pixels pass through
/// unchanged; holes with no valid neighbor in the window stay at zero.
pub fn fill_depth(img: &RgbdImage, cfg: &DepthFillConfig) -> Result<RgbdImage> {
    cfg.validate(img.width, img.height)?;
    if img.depth.iter().all(|d| *d == 0.0) {
        return Err(Error::AllDepthMissing);
    }
    let w = img.width as isize;
    let h = img.height as isize;
    let r = cfg.window_radius as isize;
    let inv_2ss = 1.0 / (2.0 * cfg.spatial_sigma * cfg.spatial_sigma);
    let inv_2rs = 1.0 / (2.0 * cfg.range_sigma * cfg.range_sigma);

    let mut out = img.depth.clone();
    for v in 0..h {
        for u in 0..w {
            let idx = (v * w + u) as usize;
            if img.depth[idx] != 0.0 {
                continue;
            }
            let center = img.color[idx];
            let mut num = 0.0;
            let mut den = 0.0;
            for dv in -r..=r {
                let nv = v + dv;
                if nv < 0 || nv >= h {
                    continue;
                }
                for du in -r..=r {
                    let nu = u + du;
                    if nu < 0 || nu >= w {
                        continue;
                    }
                    let nidx = (nv * w + nu) as usize;
                    let z = img.depth[nidx];
                    if z == 0.0 {
                        continue;
                    }
                    let ws = (-((du * du + dv * dv) as f64) * inv_2ss).exp();
                    let wr = (-color_dist2(center, img.color[nidx]) * inv_2rs).exp();
                    num += ws * wr * z;
                    den += ws * wr;
                }
            }
            if den > 0.0 {
                out[idx] = num / den;
            }
        }
    }
    RgbdImage::new(img.width, img.height, img.color.clone(), out)
}

/// Unprojects every pixel with positive depth into a point cloud in the camera
/// frame, carrying the pixel's color. Pixels with zero depth are skipped.
pub fn unproject(img: &RgbdImage, k: &CameraIntrinsics) -> Result<PointCloud> {
    k.validate(img.width, img.height)?;
    let mut points = Vec::new();
    for v in 0..img.height {
        for u in 0..img.width {
            let z = img.depth[v * img.width + u];
            if z > 0.0 {
                points.push(Point {
                    position: k.unproject_pixel(u as f64, v as f64, z),
                    color: img.color[v * img.width + u],
                });
            }
        }
    }
    Ok(PointCloud::new(points))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn uniform_image(w: usize, h: usize, depth: f64) -> RgbdImage {
        RgbdImage::new(w, h, vec![[0.5, 0.5, 0.5]; w * h], vec![depth; w * h]).unwrap()
    }

    #[test]
    fn fill_is_noop_on_complete_depth() {
        let img = uniform_image(8, 8, 1.5);
        let out = fill_depth(&img, &DepthFillConfig { window_radius: 2, ..Default::default() }).unwrap();
        assert_eq!(out, img);
    }

    #[test]
    fn fill_center_hole_with_uniform_neighbors() {
        let mut depth = vec![2.0; 9];
        depth[4] = 0.0;
        let img = RgbdImage::new(3, 3, vec![[0.3, 0.3, 0.3]; 9], depth).unwrap();
        let cfg = DepthFillConfig { window_radius: 1, ..Default::default() };
        let out = fill_depth(&img, &cfg).unwrap();
        assert_abs_diff_eq!(out.depth_at(1, 1), 2.0, epsilon = 1e-12);
    }

    #[test]
    fn fill_all_missing_is_an_error() {
        let img = uniform_image(4, 4, 0.0);
        let cfg = DepthFillConfig { window_radius: 1, ..Default::default() };
        assert!(matches!(fill_depth(&img, &cfg), Err(Error::AllDepthMissing)));
    }

    // Independent direct-summation oracle of the cross-bilateral formula,
    // written separately from the implementation above.
    fn oracle_fill(img: &RgbdImage, cfg: &DepthFillConfig) -> Vec<f64> {
        let (w, h) = (img.width() as i64, img.height() as i64);
        let mut out: Vec<f64> = img.depth().to_vec();
        for y in 0..h {
            for x in 0..w {
                if img.depth()[(y * w + x) as usize] != 0.0 {
                    continue;
                }
                let c0 = img.color()[(y * w + x) as usize];
                let (mut acc, mut wsum) = (0.0f64, 0.0f64);
                for yy in 0..h {
                    for xx in 0..w {
                        if (xx - x).abs() > cfg.window_radius as i64 || (yy - y).abs() > cfg.window_radius as i64 {
                            continue;
                        }
                        let z = img.depth()[(yy * w + xx) as usize];
                        if z == 0.0 {
                            continue;
                        }
                        let c1 = img.color()[(yy * w + xx) as usize];
                        let d2 = ((xx - x).pow(2) + (yy - y).pow(2)) as f64;
                        let cd2 = (c0[0] - c1[0]).powi(2) + (c0[1] - c1[1]).powi(2) + (c0[2] - c1[2]).powi(2);
                        let weight = (-d2 / (2.0 * cfg.spatial_sigma.powi(2))).exp()
                            * (-cd2 / (2.0 * cfg.range_sigma.powi(2))).exp();
                        acc += weight * z;
                        wsum += weight;
                    }
                }
                if wsum > 0.0 {
                    out[(y * w + x) as usize] = acc / wsum;
                }
            }
        }
        out
    }

    #[test]
    fn fill_matches_direct_summation_oracle_across_step_edge() {
        // 5x5 image, 2-pixel hole, step edge in the guide color.
        let mut color = vec![[0.1, 0.1, 0.1]; 25];
        for v in 0..5 {
            for u in 3..5 {
                color[v * 5 + u] = [0.9, 0.2, 0.4];
            }
        }
        let mut depth: Vec<f64> = (0..25).map(|i| 1.0 + 0.05 * (i % 7) as f64).collect();
        depth[12] = 0.0;
        depth[13] = 0.0;
        let img = RgbdImage::new(5, 5, color, depth).unwrap();
        let cfg = DepthFillConfig { spatial_sigma: 1.5, range_sigma: 0.2, window_radius: 2 };
        let got = fill_depth(&img, &cfg).unwrap();
        let want = oracle_fill(&img, &cfg);
        for i in 0..25 {
            assert_abs_diff_eq!(got.depth()[i], want[i], epsilon = 1e-6);
        }
    }

    #[test]
    fn fill_is_idempotent_once_holes_close() {
        let mut depth = vec![1.0; 49];
        depth[24] = 0.0;
        depth[25] = 0.0;
        let img = RgbdImage::new(7, 7, vec![[0.2, 0.4, 0.6]; 49], depth).unwrap();
        let cfg = DepthFillConfig { window_radius: 2, ..Default::default() };
        let once = fill_depth(&img, &cfg).unwrap();
        assert!(once.depth().iter().all(|d| *d > 0.0));
        let twice = fill_depth(&once, &cfg).unwrap();
        assert_eq!(once, twice);
    }

    #[test]
    fn unproject_optical_center_ray() {
        let k = CameraIntrinsics { fx: 400.0, fy: 400.0, cx: 2.0, cy: 2.0 };
        let mut depth = vec![0.0; 25];
        depth[2 * 5 + 2] = 3.0;
        let img = RgbdImage::new(5, 5, vec![[1.0; 3]; 25], depth).unwrap();
        let pc = unproject(&img, &k).unwrap();
        assert_eq!(pc.len(), 1);
        assert_abs_diff_eq!(pc.points()[0].position[0], 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(pc.points()[0].position[1], 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(pc.points()[0].position[2], 3.0, epsilon = 1e-12);
    }

    #[test]
    fn unproject_matches_pinhole_equation() {
        // fx = fy = 500, cx = cy = 256, pixel (756, 256), z = 2 -> (2, 0, 2).
        let k = CameraIntrinsics { fx: 500.0, fy: 500.0, cx: 256.0, cy: 256.0 };
        let p = k.unproject_pixel(756.0, 256.0, 2.0);
        assert_abs_diff_eq!(p[0], 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(p[1], 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(p[2], 2.0, epsilon = 1e-12);
    }

    #[test]
    fn unproject_point_count_equals_positive_depth_pixels() {
        let mut depth = vec![1.0; 64];
        depth[3] = 0.0;
        depth[17] = 0.0;
        let img = RgbdImage::new(8, 8, vec![[1.0; 3]; 64], depth).unwrap();
        let k = CameraIntrinsics { fx: 10.0, fy: 10.0, cx: 4.0, cy: 4.0 };
        assert_eq!(unproject(&img, &k).unwrap().len(), 62);
    }

    #[test]
    fn unprojection_is_linear_in_depth() {
        let k = CameraIntrinsics { fx: 320.0, fy: 240.0, cx: 160.0, cy: 120.0 };
        let a = k.unproject_pixel(37.0, 201.0, 1.7);
        let b = k.unproject_pixel(37.0, 201.0, 3.4);
        for i in 0..3 {
            assert_eq!(b[i], 2.0 * a[i]);
        }
    }
}
