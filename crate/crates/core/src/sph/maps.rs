use std::f64::consts::{FRAC_PI_2, PI};

use crate::error::{Error, Result};

/// Per-channel sentinel for uncovered panorama pixels.
pub const MISSING: f64 = -1.0;

/// A pixel is missing only when every channel holds the exact sentinel;
/// band-limited SH expansions may legitimately ring slightly negative.
pub fn is_missing_pixel(p: &[f64; 3]) -> bool {
    *p == [MISSING; 3]
}

/// Unit direction through the center of equirectangular pixel (u, v).
///
/// Longitude theta in [-pi, pi) from +z around +y, latitude phi in
/// [-pi/2, pi/2] with "up" = -y; pixel (0,0) is (-pi, +pi/2).
pub fn pixel_direction(u: usize, v: usize, width: usize, height: usize) -> [f64; 3] {
    let theta = (u as f64 + 0.5) / width as f64 * 2.0 * PI - PI;
    let phi = FRAC_PI_2 - (v as f64 + 0.5) / height as f64 * PI;
    let (st, ct) = theta.sin_cos();
    let (sp, cp) = phi.sin_cos();
    [st * cp, -sp, ct * cp]
}

/// Solid angle of a pixel in row `v`: (2 pi / W) * (pi / H) * cos(phi_center).
pub fn pixel_solid_angle(v: usize, width: usize, height: usize) -> f64 {
    let phi = FRAC_PI_2 - (v as f64 + 0.5) / height as f64 * PI;
    (2.0 * PI / width as f64) * (PI / height as f64) * phi.cos()
}

/// Equirectangular radiance panorama; width = 2 * height. Uncovered pixels
/// carry the -1 sentinel in all channels.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvironmentMap {
    width: usize,
    height: usize,
    pixels: Vec<[f64; 3]>,
}

impl EnvironmentMap {
    pub fn new(width: usize, height: usize, pixels: Vec<[f64; 3]>) -> Result<Self> {
        if width != 2 * height || height == 0 {
            return Err(Error::InvalidInput(format!(
                "environment map must satisfy width = 2*height, got {}x{}",
                width, height
            )));
        }
        if pixels.len() != width * height {
            return Err(Error::InvalidInput("pixel buffer size mismatch".into()));
        }
        for p in &pixels {
            let missing = p.iter().any(|c| *c < 0.0);
            if missing && *p != [MISSING; 3] {
                return Err(Error::InvalidInput(
                    "negative radiance other than the -1 missing sentinel".into(),
                ));
            }
            if p.iter().any(|c| !c.is_finite()) {
                return Err(Error::InvalidInput("radiance must be finite".into()));
            }
        }
        Ok(Self { width, height, pixels })
    }

    pub(crate) fn new_unchecked(width: usize, height: usize, pixels: Vec<[f64; 3]>) -> Self {
        Self { width, height, pixels }
    }

    /// Evaluates an SH expansion at every pixel center. Values are clamped at
    /// zero only if `clamp` is set; raw expansions can ring negative.
    pub fn from_sh(sh: &super::ShCoefficients, width: usize, height: usize, clamp: bool) -> Result<Self> {
        if width != 2 * height || height == 0 {
            return Err(Error::InvalidInput("width must be 2*height".into()));
        }
        let mut pixels = Vec::with_capacity(width * height);
        for v in 0..height {
            for u in 0..width {
                let mut p = sh.eval(pixel_direction(u, v, width, height))?;
                if clamp {
                    for c in &mut p {
                        *c = c.max(0.0);
                    }
                }
                pixels.push(p);
            }
        }
        Ok(Self { width, height, pixels })
    }

    pub fn constant(width: usize, height: usize, value: [f64; 3]) -> Result<Self> {
        Self::new(width, height, vec![value; width * height])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[[f64; 3]] {
        &self.pixels
    }

    pub fn pixel(&self, u: usize, v: usize) -> [f64; 3] {
        self.pixels[v * self.width + u]
    }

    pub fn is_missing(&self, u: usize, v: usize) -> bool {
        is_missing_pixel(&self.pixel(u, v))
    }

    pub fn has_missing(&self) -> bool {
        self.pixels.iter().any(is_missing_pixel)
    }

    /// Bilinear lookup at a unit direction (missing pixels excluded from the
    /// blend; returns black if all four taps are missing).
    pub fn sample_dir(&self, dir: [f64; 3]) -> [f64; 3] {
        let [x, y, z] = dir;
        let r = (x * x + y * y + z * z).sqrt();
        let theta = x.atan2(z);
        let phi = (-y / r).clamp(-1.0, 1.0).asin();
        let fu = (theta + PI) / (2.0 * PI) * self.width as f64 - 0.5;
        let fv = (FRAC_PI_2 - phi) / PI * self.height as f64 - 0.5;
        let u0 = fu.floor();
        let v0 = fv.floor();
        let (au, av) = (fu - u0, fv - v0);
        let mut acc = [0.0; 3];
        let mut wsum = 0.0;
        for (du, dv, wgt) in [
            (0.0, 0.0, (1.0 - au) * (1.0 - av)),
            (1.0, 0.0, au * (1.0 - av)),
            (0.0, 1.0, (1.0 - au) * av),
            (1.0, 1.0, au * av),
        ] {
            let uu = (u0 + du).rem_euclid(self.width as f64) as usize;
            let vv = (v0 + dv).clamp(0.0, self.height as f64 - 1.0) as usize;
            let p = self.pixel(uu, vv);
            if !is_missing_pixel(&p) {
                for c in 0..3 {
                    acc[c] += wgt * p[c];
                }
                wsum += wgt;
            }
        }
        if wsum > 0.0 {
            for c in &mut acc {
                *c /= wsum;
            }
        }
        acc
    }
}

/// Per-direction cosine-weighted hemispherical integral of radiance; what a
/// Lambertian surface facing each direction receives.
#[derive(Debug, Clone, PartialEq)]
pub struct IrradianceMap {
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<[f64; 3]>,
}

impl IrradianceMap {
    pub fn pixel(&self, u: usize, v: usize) -> [f64; 3] {
        self.pixels[v * self.width + u]
    }
}
