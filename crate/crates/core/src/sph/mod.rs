//! Real spherical harmonics up to l = 2, SH projection of equirectangular
//! environment maps (dense quadrature and Monte Carlo), irradiance via
//! per-band convolution, and a brute-force diffuse-convolution reference.

mod basis;
mod irradiance;
mod maps;
mod project;

pub use basis::{sh_basis, SH_BASIS_COUNT};
pub use irradiance::{
    diffuse_convolution_oracle, irradiance_rms, irradiance_sh, reconstruct_irradiance_map,
    BAND_SCALE,
};
pub use maps::{is_missing_pixel, pixel_direction, pixel_solid_angle, EnvironmentMap, IrradianceMap, MISSING};
pub use project::{
    project_mc, project_quadrature, project_quadrature_masked, uniform_sphere_dirs, ShSample,
};

use crate::error::{Error, Result};

/// 27-float lighting representation: 9 real-SH coefficients per RGB channel,
/// ordered (0,0), (1,-1), (1,0), (1,1), (2,-2), (2,-1), (2,0), (2,1), (2,2).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ShCoefficients {
    pub coeffs: [[f64; 9]; 3],
}

/// Band index l for each of the 9 basis slots.
pub const BAND_OF: [usize; 9] = [0, 1, 1, 1, 2, 2, 2, 2, 2];

impl ShCoefficients {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn new(coeffs: [[f64; 9]; 3]) -> Result<Self> {
        if coeffs.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("SH coefficients must be finite".into()));
        }
        Ok(Self { coeffs })
    }

    /// Flat 27-value view, channel-major (r0..r8, g0..g8, b0..b8).
    pub fn flat(&self) -> [f64; 27] {
        let mut out = [0.0; 27];
        for c in 0..3 {
            out[c * 9..(c + 1) * 9].copy_from_slice(&self.coeffs[c]);
        }
        out
    }

    pub fn from_flat(values: &[f64; 27]) -> Self {
        let mut coeffs = [[0.0; 9]; 3];
        for c in 0..3 {
            coeffs[c].copy_from_slice(&values[c * 9..(c + 1) * 9]);
        }
        Self { coeffs }
    }

    /// Evaluates the expansion at a unit direction, one value per channel.
    pub fn eval(&self, dir: [f64; 3]) -> Result<[f64; 3]> {
        let y = sh_basis(dir)?;
        let mut out = [0.0; 3];
        for c in 0..3 {
            out[c] = (0..9).map(|i| self.coeffs[c][i] * y[i]).sum();
        }
        Ok(out)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let mut m = 0.0f64;
        for c in 0..3 {
            for i in 0..9 {
                m = m.max((self.coeffs[c][i] - other.coeffs[c][i]).abs());
            }
        }
        m
    }
}
