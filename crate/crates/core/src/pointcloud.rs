//! Point-cloud container and the observation-to-rendering view transform:
//! recentering toward a target pixel, rotation alignment, uniform
//! downsampling, and equirectangular projection.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::imaging::CameraIntrinsics;
use crate::sph::EnvironmentMap;

/// One point: position in meters, color as linear RGB radiance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub position: [f64; 3],
    pub color: [f64; 3],
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct PointCloud {
    points: Vec<Point>,
}

impl PointCloud {
    pub fn new(points: Vec<Point>) -> Self {
        Self { points }
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn positions(&self) -> impl Iterator<Item = [f64; 3]> + '_ {
        self.points.iter().map(|p| p.position)
    }
}

/// How an observation cloud relates to the rendering position: which pixel the
/// rendering position projects to, the empirical recentering scale, and the
/// rotation aligning the recentered cloud to the panorama frame.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct RenderingRelation {
    pub pixel_uv: [f64; 2],
    pub scale_factor: f64,
    pub rotation: [[f64; 3]; 3],
}

impl RenderingRelation {
    pub fn validate(&self) -> Result<()> {
        if !(self.scale_factor > 0.0 && self.scale_factor <= 1.0) {
            return Err(Error::InvalidInput(format!(
                "scale_factor must be in (0, 1], got {}",
                self.scale_factor
            )));
        }
        validate_rotation(&self.rotation)
    }
}

/// Checks R^T R = I and det R = +1 to 1e-6.
pub fn validate_rotation(rot: &[[f64; 3]; 3]) -> Result<()> {
    for i in 0..3 {
        for j in 0..3 {
            let dot: f64 = (0..3).map(|k| rot[k][i] * rot[k][j]).sum();
            let expect = if i == j { 1.0 } else { 0.0 };
            if (dot - expect).abs() > 1e-6 {
                return Err(Error::NotARotation);
            }
        }
    }
    let det = rot[0][0] * (rot[1][1] * rot[2][2] - rot[1][2] * rot[2][1])
        - rot[0][1] * (rot[1][0] * rot[2][2] - rot[1][2] * rot[2][0])
        + rot[0][2] * (rot[1][0] * rot[2][1] - rot[1][1] * rot[2][0]);
    if (det - 1.0).abs() > 1e-6 {
        return Err(Error::NotARotation);
    }
    Ok(())
}

fn mat_vec(m: &[[f64; 3]; 3], v: [f64; 3]) -> [f64; 3] {
    [
        m[0][0] * v[0] + m[0][1] * v[1] + m[0][2] * v[2],
        m[1][0] * v[0] + m[1][1] * v[1] + m[1][2] * v[2],
        m[2][0] * v[0] + m[2][1] * v[1] + m[2][2] * v[2],
    ]
}

/// Translates the cloud so the unprojected rendering-position target, scaled
/// by `scale_factor`, moves to the origin. With scale 0.95 the target ends up
/// at 5% of its original distance, compensating placement offset and depth
/// noise.
pub fn recenter(
    pc: &PointCloud,
    rel: &RenderingRelation,
    k: &CameraIntrinsics,
    depth_at_uv: f64,
) -> Result<PointCloud> {
    if depth_at_uv <= 0.0 {
        return Err(Error::ZeroDepthTarget);
    }
    rel.validate()?;
    let t = k.unproject_pixel(rel.pixel_uv[0], rel.pixel_uv[1], depth_at_uv);
    let shift = [rel.scale_factor * t[0], rel.scale_factor * t[1], rel.scale_factor * t[2]];
    let points = pc
        .points
        .iter()
        .map(|p| Point {
            position: [
                p.position[0] - shift[0],
                p.position[1] - shift[1],
                p.position[2] - shift[2],
            ],
            color: p.color,
        })
        .collect();
    Ok(PointCloud::new(points))
}

/// Rotates every position by `rot`; colors unchanged.
pub fn rotate(pc: &PointCloud, rot: &[[f64; 3]; 3]) -> Result<PointCloud> {
    validate_rotation(rot)?;
    let points = pc
        .points
        .iter()
        .map(|p| Point { position: mat_vec(rot, p.position), color: p.color })
        .collect();
    Ok(PointCloud::new(points))
}

/// Draws `min(n, |pc|)` points uniformly without replacement, deterministic
/// per seed.
pub fn downsample_uniform(pc: &PointCloud, n: usize, seed: u64) -> Result<PointCloud> {
    if pc.is_empty() {
        return Err(Error::EmptyCloud);
    }
    if n == 0 {
        return Err(Error::InvalidInput("downsample target must be >= 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut indices: Vec<usize> = (0..pc.len()).collect();
    indices.shuffle(&mut rng);
    indices.truncate(n.min(pc.len()));
    Ok(PointCloud::new(indices.into_iter().map(|i| pc.points[i]).collect()))
}

/// Projects the cloud onto an equirectangular panorama seen from the origin.
///
/// Convention: longitude theta in [-pi, pi) measured from +z around +y,
/// latitude phi in [-pi/2, pi/2] with "up" = -y; pixel (0,0) corresponds to
/// (-pi, +pi/2). A point on +z lands at the panorama center. Pixels hit by
/// several points take the mean color; uncovered pixels hold the -1 sentinel.
///
/// Points within 1e-9 of the origin cannot be assigned a direction; they are
/// skipped and reported via `PointAtOrigin` only when *all* points are
/// degenerate, otherwise the skipped count is returned alongside the map.
pub fn project_equirect(pc: &PointCloud, width: usize, height: usize) -> Result<(EnvironmentMap, usize)> {
    if width != 2 * height || height == 0 {
        return Err(Error::InvalidInput(format!(
            "panorama must satisfy width = 2*height, got {}x{}",
            width, height
        )));
    }
    if pc.is_empty() {
        return Err(Error::EmptyCloud);
    }
    let mut sums = vec![[0.0f64; 3]; width * height];
    let mut counts = vec![0u32; width * height];
    let mut skipped = 0usize;
    for p in &pc.points {
        let [x, y, z] = p.position;
        let r = (x * x + y * y + z * z).sqrt();
        if r < 1e-9 {
            skipped += 1;
            continue;
        }
        let theta = x.atan2(z); // [-pi, pi]
        let phi = (-y / r).clamp(-1.0, 1.0).asin();
        let mut u = ((theta + std::f64::consts::PI) / (2.0 * std::f64::consts::PI) * width as f64).floor() as isize;
        let mut v = ((std::f64::consts::FRAC_PI_2 - phi) / std::f64::consts::PI * height as f64).floor() as isize;
        if u >= width as isize {
            u -= width as isize;
        }
        v = v.clamp(0, height as isize - 1);
        let idx = v as usize * width + u as usize;
        for c in 0..3 {
            sums[idx][c] += p.color[c];
        }
        counts[idx] += 1;
    }
    if skipped == pc.len() {
        return Err(Error::PointAtOrigin { count: skipped });
    }
    let pixels = sums
        .iter()
        .zip(&counts)
        .map(|(s, &c)| {
            if c == 0 {
                [-1.0, -1.0, -1.0]
            } else {
                [s[0] / c as f64, s[1] / c as f64, s[2] / c as f64]
            }
        })
        .collect();
    Ok((EnvironmentMap::new_unchecked(width, height, pixels), skipped))
}
