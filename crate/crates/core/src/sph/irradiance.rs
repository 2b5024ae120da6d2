use std::f64::consts::PI;

use crate::error::{Error, Result};

use super::maps::{pixel_direction, pixel_solid_angle, EnvironmentMap, IrradianceMap};
use super::{ShCoefficients, BAND_OF};

/// Diffuse-convolution scaling per band: A0 = pi, A1 = 2 pi / 3, A2 = pi / 4.
pub const BAND_SCALE: [f64; 3] = [PI, 2.0 * PI / 3.0, PI / 4.0];

/// Converts light SH to irradiance SH by scaling each band by its clamped
/// cosine kernel coefficient.
pub fn irradiance_sh(light: &ShCoefficients) -> ShCoefficients {
    let mut out = *light;
    for channel in &mut out.coeffs {
        for (i, v) in channel.iter_mut().enumerate() {
            *v *= BAND_SCALE[BAND_OF[i]];
        }
    }
    out
}

/// Evaluates an irradiance SH expansion over an equirectangular grid.
pub fn reconstruct_irradiance_map(irr: &ShCoefficients, width: usize, height: usize) -> Result<IrradianceMap> {
    if width != 2 * height || height == 0 {
        return Err(Error::InvalidInput("irradiance map must satisfy width = 2*height".into()));
    }
    let mut pixels = Vec::with_capacity(width * height);
    for v in 0..height {
        for u in 0..width {
            pixels.push(irr.eval(pixel_direction(u, v, width, height))?);
        }
    }
    Ok(IrradianceMap { width, height, pixels })
}

/// Direct O(T^2) hemispherical cosine integral, the slow reference the SH
/// pipeline approximates: pixel(n) = sum over env pixels of
/// radiance * max(0, n . omega) * solid_angle. Keep output resolutions small.
pub fn diffuse_convolution_oracle(env: &EnvironmentMap, width: usize, height: usize) -> Result<IrradianceMap> {
    if env.has_missing() {
        return Err(Error::MissingPixels);
    }
    if width != 2 * height || height == 0 {
        return Err(Error::InvalidInput("output must satisfy width = 2*height".into()));
    }
    let (ew, eh) = (env.width(), env.height());
    // Precompute source directions and weights once.
    let mut src = Vec::with_capacity(ew * eh);
    for v in 0..eh {
        let dw = pixel_solid_angle(v, ew, eh);
        for u in 0..ew {
            src.push((pixel_direction(u, v, ew, eh), env.pixel(u, v), dw));
        }
    }
    let mut pixels = Vec::with_capacity(width * height);
    for v in 0..height {
        for u in 0..width {
            let n = pixel_direction(u, v, width, height);
            let mut acc = [0.0f64; 3];
            for (dir, radiance, dw) in &src {
                let cos = n[0] * dir[0] + n[1] * dir[1] + n[2] * dir[2];
                if cos > 0.0 {
                    let w = cos * dw;
                    acc[0] += radiance[0] * w;
                    acc[1] += radiance[1] * w;
                    acc[2] += radiance[2] * w;
                }
            }
            pixels.push(acc);
        }
    }
    Ok(IrradianceMap { width, height, pixels })
}

/// RMS difference between two equal-size irradiance maps, over pixels and
/// channels.
pub fn irradiance_rms(a: &IrradianceMap, b: &IrradianceMap) -> f64 {
    assert_eq!((a.width, a.height), (b.width, b.height));
    let mut acc = 0.0;
    for (p, q) in a.pixels.iter().zip(&b.pixels) {
        for c in 0..3 {
            acc += (p[c] - q[c]).powi(2);
        }
    }
    (acc / (a.pixels.len() * 3) as f64).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sph::project_quadrature;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const SQRT_4PI: f64 = 3.5449077018110318;

    #[test]
    fn constant_sky_gives_pi_everywhere() {
        let mut light = ShCoefficients::zero();
        for c in 0..3 {
            light.coeffs[c][0] = SQRT_4PI;
        }
        let irr = irradiance_sh(&light);
        assert_abs_diff_eq!(irr.coeffs[0][0], PI * SQRT_4PI, epsilon = 1e-12);
        let map = reconstruct_irradiance_map(&irr, 32, 16).unwrap();
        for p in &map.pixels {
            for c in 0..3 {
                assert_abs_diff_eq!(p[c], PI, epsilon = 1e-5);
            }
        }
    }

    #[test]
    fn zero_in_zero_out() {
        let z = ShCoefficients::zero();
        assert_eq!(irradiance_sh(&z), z);
        let map = reconstruct_irradiance_map(&z, 16, 8).unwrap();
        assert!(map.pixels.iter().all(|p| *p == [0.0; 3]));
    }

    #[test]
    fn band_ratios_are_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut light = ShCoefficients::zero();
        for channel in &mut light.coeffs {
            for slot in channel.iter_mut() {
                *slot = rng.gen::<f64>() * 2.0 - 1.0;
            }
        }
        let irr = irradiance_sh(&light);
        for c in 0..3 {
            for i in 0..9 {
                let ratio = irr.coeffs[c][i] / light.coeffs[c][i];
                assert_abs_diff_eq!(ratio, BAND_SCALE[BAND_OF[i]], epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn cos_lobe_matches_brute_force_oracle() {
        // Y10-only light; the SH pipeline must match the direct integral.
        let mut light = ShCoefficients::zero();
        for c in 0..3 {
            light.coeffs[c][2] = 1.0;
        }
        let env = EnvironmentMap::from_sh(&light, 128, 64, false).unwrap();
        let via_sh = reconstruct_irradiance_map(&irradiance_sh(&project_quadrature(&env).unwrap()), 32, 16).unwrap();
        let direct = diffuse_convolution_oracle(&env, 32, 16).unwrap();
        for (p, q) in via_sh.pixels.iter().zip(&direct.pixels) {
            for c in 0..3 {
                assert_abs_diff_eq!(p[c], q[c], epsilon = 1e-3);
            }
        }
    }

    #[test]
    fn oracle_constant_sky_is_pi() {
        let env = EnvironmentMap::constant(64, 32, [1.0; 3]).unwrap();
        let irr = diffuse_convolution_oracle(&env, 16, 8).unwrap();
        for p in &irr.pixels {
            assert!(((p[0] - PI) / PI).abs() <= 0.005, "pixel {}", p[0]);
        }
    }

    #[test]
    fn oracle_delta_response_peaks_at_source_direction() {
        let (w, h) = (64, 32);
        let mut pixels = vec![[0.0; 3]; w * h];
        let (su, sv) = (20usize, 9usize);
        pixels[sv * w + su] = [100.0; 3];
        let env = EnvironmentMap::new(w, h, pixels).unwrap();
        let irr = diffuse_convolution_oracle(&env, 64, 32).unwrap();
        let mut best = (0usize, 0usize, f64::MIN);
        for v in 0..32 {
            for u in 0..64 {
                let val = irr.pixel(u, v)[0];
                if val > best.2 {
                    best = (u, v, val);
                }
            }
        }
        assert_eq!((best.0, best.1), (su, sv));
    }
}
