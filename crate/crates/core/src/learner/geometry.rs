//! Neighborhood structure for PointConv blocks: farthest-point centroid
//! selection and k-nearest-neighbor gathers, precomputed per cloud so the
//! differentiable part is pure tensor algebra.
//!
//! Selection and neighbor ordering are keyed on coordinates (distance first,
//! then lexicographic position), so the structure is independent of input
//! point order.

use ndarray::Array2;
use std::rc::Rc;

use crate::error::{Error, Result};
use crate::pointcloud::PointCloud;

use super::{BlockConfig, PointConvConfig};

/// Per-block gather tables and relative coordinates.
pub struct BlockGeometry {
    /// Row indices into the block's input features, k consecutive entries per
    /// centroid.
    pub gather_idx: Rc<Vec<usize>>,
    /// (centroids * k) x 3 neighbor offsets from their centroid.
    pub rel: Array2<f64>,
    pub k: usize,
    pub centroids: usize,
}

/// Everything input-geometry-dependent about a forward pass.
pub struct CloudGraph {
    pub blocks: Vec<BlockGeometry>,
    /// N x input_dim initial per-point features.
    pub features: Array2<f64>,
}

fn lex_less(a: &[f64; 3], b: &[f64; 3]) -> bool {
    a.partial_cmp(b) == Some(std::cmp::Ordering::Less)
}

/// Farthest-point sampling with a coordinate-deterministic start (the
/// lexicographically smallest point) and coordinate tie-breaking.
fn farthest_point_indices(positions: &[[f64; 3]], m: usize) -> Vec<usize> {
    let n = positions.len();
    let mut start = 0;
    for i in 1..n {
        if lex_less(&positions[i], &positions[start]) {
            start = i;
        }
    }
    let mut selected = vec![start];
    let mut min_d2 = vec![f64::INFINITY; n];
    while selected.len() < m.min(n) {
        let last = positions[*selected.last().unwrap()];
        for (i, p) in positions.iter().enumerate() {
            let d2 = (p[0] - last[0]).powi(2) + (p[1] - last[1]).powi(2) + (p[2] - last[2]).powi(2);
            if d2 < min_d2[i] {
                min_d2[i] = d2;
            }
        }
        let mut best = usize::MAX;
        for i in 0..n {
            if min_d2[i] == 0.0 {
                continue;
            }
            if best == usize::MAX
                || min_d2[i] > min_d2[best]
                || (min_d2[i] == min_d2[best] && lex_less(&positions[i], &positions[best]))
            {
                best = i;
            }
        }
        if best == usize::MAX {
            break; // all remaining points coincide with selected ones
        }
        selected.push(best);
    }
    selected
}

fn knn_indices(positions: &[[f64; 3]], centroid: [f64; 3], k: usize) -> Vec<usize> {
    let mut ranked: Vec<(f64, [f64; 3], usize)> = positions
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let d2 = (p[0] - centroid[0]).powi(2)
                + (p[1] - centroid[1]).powi(2)
                + (p[2] - centroid[2]).powi(2);
            (d2, *p, i)
        })
        .collect();
    ranked.sort_by(|a, b| {
        a.0.partial_cmp(&b.0)
            .unwrap()
            .then_with(|| a.1.partial_cmp(&b.1).unwrap())
            .then_with(|| a.2.cmp(&b.2))
    });
    ranked.truncate(k);
    ranked.into_iter().map(|(_, _, i)| i).collect()
}

fn build_block(positions: &[[f64; 3]], cfg: &BlockConfig) -> Result<(BlockGeometry, Vec<[f64; 3]>)> {
    let n = positions.len();
    if n < cfg.k {
        return Err(Error::TooFewPoints { got: n, need: cfg.k });
    }
    let m = (n / cfg.downsample_divisor).max(1);
    let centroid_idx = farthest_point_indices(positions, m);
    let m = centroid_idx.len();
    let mut gather_idx = Vec::with_capacity(m * cfg.k);
    let mut rel = Array2::zeros((m * cfg.k, 3));
    let mut centroid_positions = Vec::with_capacity(m);
    for (ci, &c) in centroid_idx.iter().enumerate() {
        let cp = positions[c];
        centroid_positions.push(cp);
        for (ni, j) in knn_indices(positions, cp, cfg.k).into_iter().enumerate() {
            gather_idx.push(j);
            for a in 0..3 {
                rel[(ci * cfg.k + ni, a)] = positions[j][a] - cp[a];
            }
        }
    }
    Ok((
        BlockGeometry { gather_idx: Rc::new(gather_idx), rel, k: cfg.k, centroids: m },
        centroid_positions,
    ))
}

impl CloudGraph {
    /// Precomputes centroid/neighbor structure for every block of `cfg` and
    /// the initial feature matrix (RGB, optionally with absolute positions).
    pub fn build(cloud: &PointCloud, cfg: &PointConvConfig) -> Result<Self> {
        if cloud.is_empty() {
            return Err(Error::EmptyCloud);
        }
        let n = cloud.len();
        let mut features = Array2::zeros((n, cfg.input_dim()));
        for (i, p) in cloud.points().iter().enumerate() {
            for c in 0..3 {
                features[(i, c)] = p.color[c];
            }
            if cfg.feed_positions {
                for c in 0..3 {
                    features[(i, 3 + c)] = p.position[c];
                }
            }
        }
        let mut positions: Vec<[f64; 3]> = cloud.positions().collect();
        let mut blocks = Vec::with_capacity(cfg.blocks.len());
        for bcfg in &cfg.blocks {
            let (geom, next_positions) = build_block(&positions, bcfg)?;
            blocks.push(geom);
            positions = next_positions;
        }
        Ok(Self { blocks, features })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fps_is_permutation_invariant() {
        let pts = vec![
            [0.0, 0.0, 0.0],
            [1.0, 0.0, 0.0],
            [0.0, 1.0, 0.0],
            [1.0, 1.0, 0.0],
            [0.5, 0.5, 1.0],
            [0.2, 0.8, 0.3],
        ];
        let mut perm = pts.clone();
        perm.reverse();
        let a = farthest_point_indices(&pts, 3);
        let b = farthest_point_indices(&perm, 3);
        let pa: Vec<[f64; 3]> = a.iter().map(|&i| pts[i]).collect();
        let pb: Vec<[f64; 3]> = b.iter().map(|&i| perm[i]).collect();
        assert_eq!(pa, pb);
    }

    #[test]
    fn knn_returns_closest_points_in_stable_order() {
        let pts = vec![[0.0, 0.0, 3.0], [0.0, 0.0, 1.0], [0.0, 0.0, 2.0], [0.0, 0.0, 9.0]];
        let got = knn_indices(&pts, [0.0, 0.0, 0.0], 2);
        assert_eq!(got, vec![1, 2]);
    }
}
