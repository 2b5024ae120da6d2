//! Evaluation metrics (SH l2, reconstructed-irradiance-map l2) and analytic
//! parameter/MAC accounting for the regressor.

use serde::{Deserialize, Serialize};

use crate::dataset::DatasetTuple;
use crate::error::Result;
use crate::learner::{sh_l2_loss, PointConvConfig};
use crate::pointcloud::PointCloud;
use crate::sph::{irradiance_sh, project_quadrature, reconstruct_irradiance_map, EnvironmentMap, ShCoefficients};

/// Default resolution for the irradiance-map metric; the metric is
/// resolution-stable for band-limited maps.
pub const IRRADIANCE_METRIC_DIMS: (usize, usize) = (64, 32);

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq, Eq)]
pub struct ComplexityReport {
    /// Parameter count; independent of the input point count.
    pub params: u64,
    /// Multiply-accumulates for one forward pass at the given point count.
    pub macs: u64,
    pub n_points: u64,
}

/// Mean pixel-wise squared difference between the irradiance map
/// reconstructed from `pred` and the one derived from the ground-truth
/// panorama, both at resolution `dims`.
pub fn irradiance_map_l2(pred: &ShCoefficients, truth_env: &EnvironmentMap, dims: (usize, usize)) -> Result<f64> {
    let truth_sh = project_quadrature(truth_env)?;
    let pred_map = reconstruct_irradiance_map(&irradiance_sh(pred), dims.0, dims.1)?;
    let truth_map = reconstruct_irradiance_map(&irradiance_sh(&truth_sh), dims.0, dims.1)?;
    let mut acc = 0.0;
    for (p, q) in pred_map.pixels.iter().zip(&truth_map.pixels) {
        for c in 0..3 {
            acc += (p[c] - q[c]).powi(2);
        }
    }
    Ok(acc / (pred_map.pixels.len() * 3) as f64)
}

/// Walks the layer graph: parameter totals are N-independent, MACs scale with
/// the per-block centroid counts, which shrink proportionally with the input
/// point budget.
pub fn count_complexity(cfg: &PointConvConfig, n_points: usize) -> ComplexityReport {
    let params: u64 = cfg.param_shapes().iter().map(|(r, c)| (r * c) as u64).sum();
    let mut macs: u64 = 0;
    let mut f = cfg.input_dim();
    let mut n = n_points;
    for b in &cfg.blocks {
        let m = (n / b.downsample_divisor).max(1);
        let (w1, w2) = b.mlp_widths;
        let h = cfg.weightnet_hidden;
        // Per neighbor: two feature layers, the weight MLP, and the scalar
        // weighting of the w2-wide feature vector.
        let per_neighbor = f * w1 + w1 * w2 + 3 * h + h + w2;
        macs += (m * b.k * per_neighbor) as u64;
        f = w2;
        n = m;
    }
    for &w in &cfg.head_widths {
        macs += (f * w) as u64;
        f = w;
    }
    macs += (f * crate::learner::OUTPUT_DIM) as u64;
    ComplexityReport { params, macs, n_points: n_points as u64 }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct TupleEval {
    pub scene_id: String,
    pub sh_l2: f64,
    pub irradiance_l2: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct EvalReport {
    pub sh_l2_mean: f64,
    pub sh_l2_stderr: f64,
    pub irradiance_l2_mean: f64,
    pub irradiance_l2_stderr: f64,
    pub per_tuple: Vec<TupleEval>,
}

fn mean_stderr(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

impl EvalReport {
    /// Table-style rendering, e.g. "0.433 (± 0.02)".
    pub fn format_row(&self) -> String {
        format!(
            "{:.3} (± {:.2}) / {:.3} (± {:.2})",
            self.sh_l2_mean, self.sh_l2_stderr, self.irradiance_l2_mean, self.irradiance_l2_stderr
        )
    }
}

/// Evaluates any predictor over a test set, aggregating both losses with mean
/// and standard error.
pub fn evaluate<F>(predict: F, tuples: &[DatasetTuple], dims: (usize, usize)) -> Result<EvalReport>
where
    F: Fn(&PointCloud) -> Result<ShCoefficients>,
{
    let mut per_tuple = Vec::with_capacity(tuples.len());
    for t in tuples {
        let pred = predict(&t.cloud)?;
        per_tuple.push(TupleEval {
            scene_id: t.scene_id.clone(),
            sh_l2: sh_l2_loss(&pred, &t.sh),
            irradiance_l2: irradiance_map_l2(&pred, &t.env, dims)?,
        });
    }
    let sh: Vec<f64> = per_tuple.iter().map(|t| t.sh_l2).collect();
    let irr: Vec<f64> = per_tuple.iter().map(|t| t.irradiance_l2).collect();
    let (sh_l2_mean, sh_l2_stderr) = mean_stderr(&sh);
    let (irradiance_l2_mean, irradiance_l2_stderr) = mean_stderr(&irr);
    Ok(EvalReport { sh_l2_mean, sh_l2_stderr, irradiance_l2_mean, irradiance_l2_stderr, per_tuple })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{generate_synthetic, SceneSpec};
    use std::f64::consts::PI;

    #[test]
    fn self_consistency_is_near_zero() {
        let env = EnvironmentMap::constant(64, 32, [0.8, 0.5, 0.3]).unwrap();
        let pred = project_quadrature(&env).unwrap();
        let l2 = irradiance_map_l2(&pred, &env, IRRADIANCE_METRIC_DIMS).unwrap();
        assert!(l2 <= 1e-6, "self-consistency l2 = {l2}");
    }

    #[test]
    fn zero_prediction_on_unit_sky_gives_pi_squared() {
        let env = EnvironmentMap::constant(256, 128, [1.0; 3]).unwrap();
        let l2 = irradiance_map_l2(&ShCoefficients::zero(), &env, IRRADIANCE_METRIC_DIMS).unwrap();
        assert!((l2 - PI * PI).abs() / (PI * PI) < 1e-3, "l2 = {l2}");
    }

    #[test]
    fn params_are_independent_of_point_count() {
        let cfg = PointConvConfig::default();
        let a = count_complexity(&cfg, 512);
        let b = count_complexity(&cfg, 1280);
        assert_eq!(a.params, b.params);
        assert!(a.macs < b.macs);
    }

    #[test]
    fn mac_ratios_track_the_point_budget() {
        let cfg = PointConvConfig::default();
        let base = count_complexity(&cfg, 1280).macs as f64;
        for (n, expect) in [(512usize, 0.400), (768, 0.600), (1024, 0.800)] {
            let ratio = count_complexity(&cfg, n).macs as f64 / base;
            assert!((ratio - expect).abs() <= 0.02, "macs({n})/macs(1280) = {ratio}");
        }
    }

    #[test]
    fn irradiance_metric_is_resolution_stable_on_band_limited_maps() {
        let mut truth = ShCoefficients::zero();
        for c in 0..3 {
            truth.coeffs[c][0] = 2.5;
            truth.coeffs[c][2] = 0.4;
            truth.coeffs[c][7] = -0.2;
        }
        let env = EnvironmentMap::from_sh(&truth, 128, 64, false).unwrap();
        let mut pred = truth;
        pred.coeffs[0][0] += 0.3;
        pred.coeffs[2][5] -= 0.2;
        let coarse = irradiance_map_l2(&pred, &env, (64, 32)).unwrap();
        let fine = irradiance_map_l2(&pred, &env, (128, 64)).unwrap();
        assert!((coarse - fine).abs() / fine <= 1e-2, "coarse {coarse} vs fine {fine}");
    }

    #[test]
    fn full_scale_preset_hits_its_advertised_budgets() {
        let r = count_complexity(&PointConvConfig::full_scale(), 1280);
        assert!((r.params as f64 - 1.42e6).abs() / 1.42e6 <= 0.25, "params {}", r.params);
        assert!((r.macs as f64 - 7.9e8).abs() / 7.9e8 <= 0.25, "macs {}", r.macs);
    }

    #[test]
    fn report_means_match_per_tuple_values() {
        let tuples: Vec<_> = (0..3u64)
            .map(|s| {
                let spec = SceneSpec::random(s, (16, 12));
                generate_synthetic(&spec, &format!("sc-{s}"), (16, 12), 16, 64, s).unwrap()
            })
            .collect();
        // Oracle predictor: look up the stored ground truth by cloud.
        let report = evaluate(
            |cloud| {
                let t = tuples.iter().find(|t| t.cloud == *cloud).unwrap();
                Ok(t.sh)
            },
            &tuples,
            IRRADIANCE_METRIC_DIMS,
        )
        .unwrap();
        assert!(report.sh_l2_mean <= 1e-6);
        assert!(report.irradiance_l2_mean <= 1e-6);
        let mean = report.per_tuple.iter().map(|t| t.sh_l2).sum::<f64>() / 3.0;
        assert!((report.sh_l2_mean - mean).abs() <= 1e-12);
        // Round-trips through JSON losslessly.
        let text = serde_json::to_string(&report).unwrap();
        let back: EvalReport = serde_json::from_str(&text).unwrap();
        assert_eq!(back, report);
    }
}
