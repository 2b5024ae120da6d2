use std::f64::consts::PI;

use crate::error::{Error, Result};

use super::basis::sh_basis;
use super::maps::{pixel_direction, pixel_solid_angle, EnvironmentMap};
use super::ShCoefficients;

/// One Monte Carlo sample: a unit direction and the radiance seen along it.
#[derive(Debug, Clone, Copy)]
pub struct ShSample {
    pub dir: [f64; 3],
    pub radiance: [f64; 3],
}

/// Dense-quadrature SH projection of a complete environment map:
/// `coeffs[c][lm] = sum over pixels of env_c * Y_lm(dir) * solid_angle`.
pub fn project_quadrature(env: &EnvironmentMap) -> Result<ShCoefficients> {
    if env.has_missing() {
        return Err(Error::MissingPixels);
    }
    let (sh, _) = integrate(env, false)?;
    Ok(sh)
}

/// Mask-aware variant: integrates over covered pixels only and renormalizes
/// by the covered solid angle (coefficients scaled by 4 pi / omega_covered),
/// keeping the DC term unbiased under uniformly-missing coverage.
pub fn project_quadrature_masked(env: &EnvironmentMap) -> Result<(ShCoefficients, f64)> {
    integrate(env, true)
}

fn integrate(env: &EnvironmentMap, masked: bool) -> Result<(ShCoefficients, f64)> {
    let (w, h) = (env.width(), env.height());
    let mut coeffs = [[0.0f64; 9]; 3];
    let mut covered = 0.0f64;
    for v in 0..h {
        let dw = pixel_solid_angle(v, w, h);
        for u in 0..w {
            let p = env.pixel(u, v);
            if super::maps::is_missing_pixel(&p) {
                continue;
            }
            covered += dw;
            let y = sh_basis(pixel_direction(u, v, w, h))?;
            for c in 0..3 {
                for i in 0..9 {
                    coeffs[c][i] += p[c] * y[i] * dw;
                }
            }
        }
    }
    if masked {
        if covered <= 0.0 {
            return Err(Error::MissingPixels);
        }
        let scale = 4.0 * PI / covered;
        for channel in &mut coeffs {
            for v in channel.iter_mut() {
                *v *= scale;
            }
        }
    }
    Ok((ShCoefficients { coeffs }, covered))
}

/// Monte Carlo SH projection over uniform sphere samples:
/// `coeffs[c][lm] = (4 pi / N) * sum_i radiance_c(i) * Y_lm(dir_i)`.
/// Unbiased estimator of `project_quadrature` under uniform sampling.
pub fn project_mc(samples: &[ShSample]) -> Result<ShCoefficients> {
    if samples.is_empty() {
        return Err(Error::EmptySamples);
    }
    let mut coeffs = [[0.0f64; 9]; 3];
    for s in samples {
        let y = sh_basis(s.dir)?;
        for c in 0..3 {
            for i in 0..9 {
                coeffs[c][i] += s.radiance[c] * y[i];
            }
        }
    }
    let scale = 4.0 * PI / samples.len() as f64;
    for channel in &mut coeffs {
        for v in channel.iter_mut() {
            *v *= scale;
        }
    }
    Ok(ShCoefficients { coeffs })
}

/// Uniformly distributed unit directions on the sphere, seeded.
pub fn uniform_sphere_dirs(n: usize, rng: &mut impl rand::Rng) -> Vec<[f64; 3]> {
    (0..n)
        .map(|_| {
            let z: f64 = rng.gen::<f64>() * 2.0 - 1.0;
            let theta: f64 = rng.gen::<f64>() * 2.0 * PI;
            let r = (1.0 - z * z).max(0.0).sqrt();
            [r * theta.cos(), r * theta.sin(), z]
        })
        .collect()
}
