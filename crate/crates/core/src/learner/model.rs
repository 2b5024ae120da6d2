//! The point-cloud regressor h(P_r) -> S_r: stacked PointConv blocks, global
//! mean pooling, and a dense head producing 27 SH coefficients.
//!
//! Each block gathers k neighbors per centroid, pushes neighbor features
//! through a bias-free MLP (tanh), weighs each neighbor by a scalar from a
//! small biased MLP on the relative coordinates, and averages. Keeping biases
//! out of the feature path makes the block multiplicative in its features:
//! zero features stay zero, and only relative coordinates enter the weight
//! path, so a global cloud translation cannot change the output.

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::path::Path;

use crate::error::{Error, Result};
use crate::io::{load_checkpoint, save_checkpoint};
use crate::pointcloud::PointCloud;
use crate::sph::ShCoefficients;

use super::autodiff::{Graph, TensorId};
use super::geometry::CloudGraph;

pub const OUTPUT_DIM: usize = 27;

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct BlockConfig {
    /// Output widths of the two feature-path layers.
    pub mlp_widths: (usize, usize),
    /// Neighborhood size.
    pub k: usize,
    /// Centroid count = block input count / divisor (floor, min 1).
    pub downsample_divisor: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct PointConvConfig {
    pub blocks: Vec<BlockConfig>,
    /// Hidden width of the per-block weight MLP on relative coordinates.
    pub weightnet_hidden: usize,
    /// Hidden widths of the dense head; a final linear layer to 27 follows.
    pub head_widths: Vec<usize>,
    /// Feed absolute point positions alongside RGB as input features.
    pub feed_positions: bool,
}

impl Default for PointConvConfig {
    fn default() -> Self {
        // 1280 points -> 256 -> 64 centroids.
        Self {
            blocks: vec![
                BlockConfig { mlp_widths: (64, 128), k: 16, downsample_divisor: 5 },
                BlockConfig { mlp_widths: (128, 256), k: 16, downsample_divisor: 4 },
            ],
            weightnet_hidden: 16,
            head_widths: vec![128],
            feed_positions: false,
        }
    }
}

impl PointConvConfig {
    /// A small configuration for fast tests and desk-scale training.
    pub fn toy() -> Self {
        Self {
            blocks: vec![
                BlockConfig { mlp_widths: (8, 16), k: 8, downsample_divisor: 4 },
                BlockConfig { mlp_widths: (16, 32), k: 8, downsample_divisor: 2 },
            ],
            weightnet_hidden: 8,
            head_widths: vec![16],
            feed_positions: false,
        }
    }

    /// Full-scale preset: roughly 1.4M parameters and 0.8G MACs for a
    /// 1280-point cloud. Totals are approximate by design.
    pub fn full_scale() -> Self {
        Self {
            blocks: vec![
                BlockConfig { mlp_widths: (64, 128), k: 32, downsample_divisor: 1 },
                BlockConfig { mlp_widths: (128, 256), k: 32, downsample_divisor: 5 },
            ],
            weightnet_hidden: 32,
            head_widths: vec![2048, 512],
            feed_positions: false,
        }
    }

    pub fn input_dim(&self) -> usize {
        if self.feed_positions {
            6
        } else {
            3
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.blocks.is_empty() {
            return Err(Error::InvalidInput("config needs at least one block".into()));
        }
        if self
            .blocks
            .iter()
            .any(|b| b.k == 0 || b.downsample_divisor == 0 || b.mlp_widths.0 == 0 || b.mlp_widths.1 == 0)
        {
            return Err(Error::InvalidInput("block sizes must be positive".into()));
        }
        Ok(())
    }

    /// Parameter tensor shapes in declaration order. Blocks hold the two
    /// bias-free feature layers plus the biased weight MLP; the head holds
    /// (weight, bias) pairs ending in the 27-wide output layer.
    pub fn param_shapes(&self) -> Vec<(usize, usize)> {
        let mut shapes = Vec::new();
        let mut f = self.input_dim();
        for b in &self.blocks {
            shapes.push((f, b.mlp_widths.0));
            shapes.push((b.mlp_widths.0, b.mlp_widths.1));
            shapes.push((3, self.weightnet_hidden));
            shapes.push((1, self.weightnet_hidden));
            shapes.push((self.weightnet_hidden, 1));
            shapes.push((1, 1));
            f = b.mlp_widths.1;
        }
        for &w in &self.head_widths {
            shapes.push((f, w));
            shapes.push((1, w));
            f = w;
        }
        shapes.push((f, OUTPUT_DIM));
        shapes.push((1, OUTPUT_DIM));
        shapes
    }

    /// Smallest cloud the first block accepts.
    pub fn min_points(&self) -> usize {
        self.blocks.first().map(|b| b.k).unwrap_or(1)
    }
}

/// Model = config + flat list of parameter tensors in declaration order.
pub struct Model {
    pub cfg: PointConvConfig,
    pub params: Vec<Array2<f64>>,
}

impl Model {
    /// Seeded uniform Kaiming-style initialization (bound sqrt(3/fan_in)).
    /// Each block's weight-net output bias starts at 1 so the block begins as
    /// a plain neighborhood mean; the multiplicative weighting is learned from
    /// there instead of from a near-zero scalar that would starve the feature
    /// path of gradient.
    pub fn init(cfg: PointConvConfig, seed: u64) -> Result<Self> {
        cfg.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let block_params = cfg.blocks.len() * 6;
        let params = cfg
            .param_shapes()
            .into_iter()
            .enumerate()
            .map(|(i, (rows, cols))| {
                if i < block_params && i % 6 == 5 {
                    return Array2::ones((rows, cols));
                }
                let bound = (3.0 / rows as f64).sqrt();
                Array2::from_shape_fn((rows, cols), |_| rng.gen_range(-bound..bound))
            })
            .collect();
        Ok(Self { cfg, params })
    }

    pub fn param_count(&self) -> usize {
        self.params.iter().map(|p| p.len()).sum()
    }

    /// Builds the differentiable forward graph over a precomputed cloud
    /// structure. Returns the graph, the parameter leaf ids (in declaration
    /// order), and the 1x27 output id.
    pub fn build_forward(&self, input: &CloudGraph) -> (Graph, Vec<TensorId>, TensorId) {
        let mut g = Graph::new();
        let param_ids: Vec<TensorId> = self.params.iter().map(|p| g.leaf(p.clone())).collect();
        let mut next = 0usize;
        let mut take = || {
            next += 1;
            param_ids[next - 1]
        };
        let mut feats = g.leaf(input.features.clone());
        for block in &input.blocks {
            let w1 = take();
            let w2 = take();
            let wn1 = take();
            let bn1 = take();
            let wn2 = take();
            let bn2 = take();
            let gathered = g.gather_rows(feats, block.gather_idx.clone());
            let h = g.matmul(gathered, w1);
            let h = g.tanh(h);
            let h = g.matmul(h, w2);
            let h = g.tanh(h);
            let rel = g.leaf(block.rel.clone());
            let s = g.matmul(rel, wn1);
            let s = g.add_row(s, bn1);
            let s = g.tanh(s);
            let s = g.matmul(s, wn2);
            let s = g.add_row(s, bn2);
            let weighted = g.mul_col(h, s);
            feats = g.segment_mean(weighted, block.k);
        }
        let mut x = g.mean_rows(feats);
        for _ in &self.cfg.head_widths {
            let w = take();
            let b = take();
            x = g.matmul(x, w);
            x = g.add_row(x, b);
            x = g.tanh(x);
        }
        let w = take();
        let b = take();
        x = g.matmul(x, w);
        x = g.add_row(x, b);
        (g, param_ids, x)
    }

    /// Runs inference on a raw point cloud.
    pub fn forward(&self, cloud: &PointCloud) -> Result<ShCoefficients> {
        let input = CloudGraph::build(cloud, &self.cfg)?;
        let (g, _, out) = self.build_forward(&input);
        let row = g.value(out);
        let mut flat = [0.0f64; OUTPUT_DIM];
        for i in 0..OUTPUT_DIM {
            flat[i] = row[(0, i)];
        }
        Ok(ShCoefficients::from_flat(&flat))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let config_json = serde_json::to_string(&self.cfg)?;
        let slices: Vec<&[f64]> = self.params.iter().map(|p| p.as_slice().unwrap()).collect();
        save_checkpoint(path, &config_json, &slices)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let (config_json, arrays) = load_checkpoint(path)?;
        let cfg: PointConvConfig = serde_json::from_str(&config_json)?;
        let shapes = cfg.param_shapes();
        if shapes.len() != arrays.len() {
            return Err(Error::Format("checkpoint parameter count mismatch".into()));
        }
        let mut params = Vec::with_capacity(arrays.len());
        for (shape, values) in shapes.into_iter().zip(arrays) {
            if shape.0 * shape.1 != values.len() {
                return Err(Error::Format("checkpoint parameter shape mismatch".into()));
            }
            params.push(
                Array2::from_shape_vec(shape, values)
                    .map_err(|e| Error::Format(format!("checkpoint tensor: {e}")))?,
            );
        }
        Ok(Self { cfg, params })
    }
}

/// The supervision loss: mean over the 9 basis slots of the summed squared
/// per-channel coefficient differences, i.e. (1/9) * sum over all 27 slots.
pub fn sh_l2_loss(pred: &ShCoefficients, truth: &ShCoefficients) -> f64 {
    let mut acc = 0.0;
    for c in 0..3 {
        for i in 0..9 {
            acc += (pred.coeffs[c][i] - truth.coeffs[c][i]).powi(2);
        }
    }
    acc / 9.0
}

/// Graph-level counterpart of `sh_l2_loss` for training.
pub fn sh_l2_loss_node(g: &mut Graph, pred: TensorId, truth: TensorId) -> TensorId {
    let d = g.sub(pred, truth);
    let sq = g.mul(d, d);
    let s = g.sum_all(sq);
    g.scale(s, 1.0 / 9.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pointcloud::Point;

    fn random_cloud(n: usize, seed: u64) -> PointCloud {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        PointCloud::new(
            (0..n)
                .map(|_| Point {
                    position: [rng.gen::<f64>() * 2.0, rng.gen::<f64>() * 2.0, rng.gen::<f64>() * 2.0 + 1.0],
                    color: [rng.gen(), rng.gen(), rng.gen()],
                })
                .collect(),
        )
    }

    #[test]
    fn loss_matches_direct_evaluation() {
        let a = ShCoefficients::from_flat(&[1.0; 27]);
        let b = ShCoefficients::zero();
        assert!((sh_l2_loss(&a, &b) - 3.0).abs() < 1e-12);
        let mut c = ShCoefficients::zero();
        c.coeffs[1][4] = 2.0;
        assert!((sh_l2_loss(&c, &ShCoefficients::zero()) - 4.0 / 9.0).abs() < 1e-12);
        assert_eq!(sh_l2_loss(&a, &a), 0.0);
    }

    #[test]
    fn loss_is_symmetric() {
        let a = ShCoefficients::from_flat(&std::array::from_fn(|i| i as f64 * 0.3));
        let b = ShCoefficients::from_flat(&std::array::from_fn(|i| -(i as f64) * 0.1));
        assert_eq!(sh_l2_loss(&a, &b), sh_l2_loss(&b, &a));
    }

    #[test]
    fn forward_is_deterministic() {
        let model = Model::init(PointConvConfig::toy(), 7).unwrap();
        let cloud = random_cloud(64, 3);
        let a = model.forward(&cloud).unwrap();
        let b = model.forward(&cloud).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn forward_outputs_are_finite() {
        let model = Model::init(PointConvConfig::toy(), 99).unwrap();
        let out = model.forward(&random_cloud(40, 5)).unwrap();
        assert!(out.flat().iter().all(|v| v.is_finite()));
    }

    #[test]
    fn forward_rejects_too_few_points() {
        let model = Model::init(PointConvConfig::toy(), 1).unwrap();
        let cloud = random_cloud(4, 2);
        assert!(matches!(model.forward(&cloud), Err(Error::TooFewPoints { .. })));
    }

    #[test]
    fn zero_features_propagate_to_zero_output_before_head_bias() {
        // With all-black colors the block outputs are exactly zero, so the
        // prediction reduces to the head applied to the zero vector.
        let model = Model::init(PointConvConfig::toy(), 11).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let cloud = PointCloud::new(
            (0..48)
                .map(|_| Point {
                    position: [rng.gen(), rng.gen(), rng.gen()],
                    color: [0.0; 3],
                })
                .collect(),
        );
        let pred = model.forward(&cloud).unwrap();
        // Head applied to the zero vector, computed with plain matrix math.
        let mut x = Array2::zeros((1, model.cfg.blocks.last().unwrap().mlp_widths.1));
        let mut idx = model.cfg.blocks.len() * 6;
        for _ in &model.cfg.head_widths {
            x = (x.dot(&model.params[idx]) + &model.params[idx + 1].row(0)).mapv(f64::tanh);
            idx += 2;
        }
        let head_of_zero = x.dot(&model.params[idx]) + &model.params[idx + 1].row(0);
        for i in 0..OUTPUT_DIM {
            assert!((pred.flat()[i] - head_of_zero[(0, i)]).abs() < 1e-12);
        }
    }

    #[test]
    fn loss_is_invariant_under_a_shared_slot_permutation() {
        let a = ShCoefficients::from_flat(&std::array::from_fn(|i| (i as f64).sin()));
        let b = ShCoefficients::from_flat(&std::array::from_fn(|i| (i as f64 * 1.7).cos()));
        // A fixed permutation applied to both operands must not change the loss.
        let perm: [usize; 27] = std::array::from_fn(|i| (i * 7 + 3) % 27);
        let pa = ShCoefficients::from_flat(&std::array::from_fn(|i| a.flat()[perm[i]]));
        let pb = ShCoefficients::from_flat(&std::array::from_fn(|i| b.flat()[perm[i]]));
        assert!((sh_l2_loss(&a, &b) - sh_l2_loss(&pa, &pb)).abs() <= 1e-15);
    }

    // Straightforward scalar re-implementation of the whole forward pass:
    // plain loops, no tensor library, no graph. The fast path must match it.
    fn naive_forward(model: &Model, input: &CloudGraph) -> Vec<f64> {
        let mut feats: Vec<Vec<f64>> = input
            .features
            .rows()
            .into_iter()
            .map(|r| r.to_vec())
            .collect();
        let mut pi = 0usize;
        for block in &input.blocks {
            let w1 = &model.params[pi];
            let w2 = &model.params[pi + 1];
            let wn1 = &model.params[pi + 2];
            let bn1 = &model.params[pi + 3];
            let wn2 = &model.params[pi + 4];
            let bn2 = &model.params[pi + 5];
            pi += 6;
            let mut out = vec![vec![0.0f64; w2.ncols()]; block.centroids];
            for ci in 0..block.centroids {
                for ni in 0..block.k {
                    let row = ci * block.k + ni;
                    let g = &feats[block.gather_idx[row]];
                    let mut h1 = vec![0.0f64; w1.ncols()];
                    for j in 0..w1.ncols() {
                        let mut acc = 0.0;
                        for f in 0..g.len() {
                            acc += g[f] * w1[(f, j)];
                        }
                        h1[j] = acc.tanh();
                    }
                    let mut h2 = vec![0.0f64; w2.ncols()];
                    for j in 0..w2.ncols() {
                        let mut acc = 0.0;
                        for f in 0..h1.len() {
                            acc += h1[f] * w2[(f, j)];
                        }
                        h2[j] = acc.tanh();
                    }
                    let mut s = 0.0;
                    for hidx in 0..wn1.ncols() {
                        let mut acc = bn1[(0, hidx)];
                        for a in 0..3 {
                            acc += block.rel[(row, a)] * wn1[(a, hidx)];
                        }
                        s += acc.tanh() * wn2[(hidx, 0)];
                    }
                    s += bn2[(0, 0)];
                    for j in 0..h2.len() {
                        out[ci][j] += h2[j] * s / block.k as f64;
                    }
                }
            }
            feats = out;
        }
        let width = feats[0].len();
        let mut x = vec![0.0f64; width];
        for row in &feats {
            for j in 0..width {
                x[j] += row[j] / feats.len() as f64;
            }
        }
        for _ in &model.cfg.head_widths {
            let w = &model.params[pi];
            let b = &model.params[pi + 1];
            pi += 2;
            let mut next = vec![0.0f64; w.ncols()];
            for j in 0..w.ncols() {
                let mut acc = b[(0, j)];
                for f in 0..x.len() {
                    acc += x[f] * w[(f, j)];
                }
                next[j] = acc.tanh();
            }
            x = next;
        }
        let w = &model.params[pi];
        let b = &model.params[pi + 1];
        (0..OUTPUT_DIM)
            .map(|j| b[(0, j)] + (0..x.len()).map(|f| x[f] * w[(f, j)]).sum::<f64>())
            .collect()
    }

    #[test]
    fn forward_matches_the_naive_loop_oracle() {
        let model = Model::init(PointConvConfig::toy(), 17).unwrap();
        let cloud = random_cloud(64, 29);
        let input = CloudGraph::build(&cloud, &model.cfg).unwrap();
        let fast = model.forward(&cloud).unwrap();
        let slow = naive_forward(&model, &input);
        for (a, b) in fast.flat().iter().zip(&slow) {
            assert!((a - b).abs() <= 1e-9, "{a} vs {b}");
        }
    }

    #[test]
    fn permutation_invariance() {
        let model = Model::init(PointConvConfig::toy(), 21).unwrap();
        let cloud = random_cloud(96, 13);
        let mut pts = cloud.points().to_vec();
        pts.reverse();
        pts.swap(0, 40);
        let permuted = PointCloud::new(pts);
        let a = model.forward(&cloud).unwrap();
        let b = model.forward(&permuted).unwrap();
        for (x, y) in a.flat().iter().zip(b.flat().iter()) {
            assert!((x - y).abs() <= 1e-9, "{x} vs {y}");
        }
    }

    #[test]
    fn translation_invariance() {
        let model = Model::init(PointConvConfig::toy(), 22).unwrap();
        let cloud = random_cloud(80, 14);
        let shifted = PointCloud::new(
            cloud
                .points()
                .iter()
                .map(|p| Point {
                    position: [p.position[0] + 10.0, p.position[1] - 3.0, p.position[2] + 7.0],
                    color: p.color,
                })
                .collect(),
        );
        let a = model.forward(&cloud).unwrap();
        let b = model.forward(&shifted).unwrap();
        for (x, y) in a.flat().iter().zip(b.flat().iter()) {
            assert!((x - y).abs() <= 1e-12, "{x} vs {y}");
        }
    }

    #[test]
    fn checkpoint_round_trip() {
        let model = Model::init(PointConvConfig::toy(), 5).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.lptm");
        model.save(&path).unwrap();
        let back = Model::load(&path).unwrap();
        assert_eq!(back.cfg, model.cfg);
        assert_eq!(back.params, model.params);
        let cloud = random_cloud(64, 1);
        assert_eq!(model.forward(&cloud).unwrap(), back.forward(&cloud).unwrap());
    }
}
