//! Implementations of the subcommands. Everything here is deterministic for
//! fixed seeds and inputs; no wall-clock or thread-order dependence.

use std::path::Path;

use anyhow::{Context, Result};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use lumenpoint_core::dataset::{
    generate_synthetic, load_tuple, save_tuple, DatasetTuple, Manifest, SceneSpec,
    TUPLE_FORMAT_VERSION,
};
use lumenpoint_core::imaging::{fill_depth, unproject, DepthFillConfig, RgbdImage};
use lumenpoint_core::io;
use lumenpoint_core::learner::{train, CloudGraph, Model, Optimizer, PointConvConfig, TrainConfig, TrainSample};
use lumenpoint_core::metrics::{count_complexity, evaluate, IRRADIANCE_METRIC_DIMS};
use lumenpoint_core::pointcloud::{
    downsample_uniform, project_equirect, recenter, rotate, RenderingRelation,
};
use lumenpoint_core::sph::{
    irradiance_sh, project_mc, project_quadrature, project_quadrature_masked,
    reconstruct_irradiance_map, uniform_sphere_dirs, EnvironmentMap, ShSample,
};
use lumenpoint_core::{CameraIntrinsics, PointCloud, ShCoefficients};

use crate::{Command, IntrinsicsArgs, RgbdInput};

impl IntrinsicsArgs {
    fn build(&self) -> CameraIntrinsics {
        CameraIntrinsics { fx: self.fx, fy: self.fy, cx: self.cx, cy: self.cy }
    }
}

fn load_rgbd(input: &RgbdInput) -> Result<RgbdImage> {
    let img = if let Some(rgbd) = &input.rgbd {
        io::read_rgbd(rgbd).with_context(|| format!("reading {}", rgbd.display()))?
    } else {
        let color = input.color.as_ref().expect("clap enforces --color with --depth");
        let depth = input.depth.as_ref().expect("clap enforces --depth with --color");
        io::read_rgbd_png(color, depth, input.srgb)
            .with_context(|| format!("reading {} / {}", color.display(), depth.display()))?
    };
    if input.fill {
        Ok(fill_depth(&img, &DepthFillConfig::default())?)
    } else {
        Ok(img)
    }
}

/// A rotation file is either a bare 3x3 JSON array or an object with a
/// "rotation" field (the r.json relation format).
fn load_rotation(path: &Path) -> Result<[[f64; 3]; 3]> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let value: serde_json::Value = serde_json::from_str(&text)?;
    let matrix = match &value {
        serde_json::Value::Object(obj) => obj
            .get("rotation")
            .with_context(|| format!("{}: object form needs a \"rotation\" field", path.display()))?,
        _ => &value,
    };
    let rot: [[f64; 3]; 3] = serde_json::from_value(matrix.clone())
        .with_context(|| format!("{}: expected a 3x3 matrix", path.display()))?;
    Ok(rot)
}

fn transform_cloud(
    cloud: &PointCloud,
    uv: [f64; 2],
    depth: f64,
    scale: f64,
    rot: &[[f64; 3]; 3],
    k: &CameraIntrinsics,
    points: Option<usize>,
    seed: u64,
) -> Result<PointCloud> {
    let relation = RenderingRelation { pixel_uv: uv, scale_factor: scale, rotation: *rot };
    let recentered = recenter(cloud, &relation, k, depth)?;
    let rotated = rotate(&recentered, rot)?;
    match points {
        Some(n) => Ok(downsample_uniform(&rotated, n, seed)?),
        None => Ok(rotated),
    }
}

/// Snaps every coordinate and color to f32, exactly what a .lpc write/read
/// round trip does. The pipeline command applies this at the same stage
/// boundaries as the staged invocation so both produce identical bytes.
fn quantize_like_lpc(pc: &PointCloud) -> PointCloud {
    let f = |v: f64| v as f32 as f64;
    PointCloud::new(
        pc.points()
            .iter()
            .map(|p| lumenpoint_core::Point {
                position: [f(p.position[0]), f(p.position[1]), f(p.position[2])],
                color: [f(p.color[0]), f(p.color[1]), f(p.color[2])],
            })
            .collect(),
    )
}

fn sh_from_env(env: &EnvironmentMap, mc: Option<usize>, seed: u64) -> Result<ShCoefficients> {
    if let Some(n) = mc {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let samples: Vec<ShSample> = uniform_sphere_dirs(n, &mut rng)
            .into_iter()
            .map(|dir| ShSample { dir, radiance: env.sample_dir(dir) })
            .collect();
        Ok(project_mc(&samples)?)
    } else if env.has_missing() {
        let (sh, covered) = project_quadrature_masked(env)?;
        let fraction = covered / (4.0 * std::f64::consts::PI);
        eprintln!("masked quadrature over {:.1}% solid-angle coverage", fraction * 100.0);
        Ok(sh)
    } else {
        Ok(project_quadrature(env)?)
    }
}

fn load_dataset(root: &Path) -> Result<Vec<DatasetTuple>> {
    let manifest = Manifest::load(root)?;
    manifest
        .tuples
        .iter()
        .map(|entry| Ok(load_tuple(&root.join(&entry.dir))?))
        .collect()
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Preset {
    Toy,
    Default,
    FullScale,
}

impl Preset {
    fn parse(name: &str) -> Result<Self> {
        match name {
            "toy" => Ok(Self::Toy),
            "default" => Ok(Self::Default),
            "full-scale" => Ok(Self::FullScale),
            other => anyhow::bail!("unknown model config {other:?} (expected toy, default, or full-scale)"),
        }
    }

    fn config(self) -> PointConvConfig {
        match self {
            Self::Toy => PointConvConfig::toy(),
            Self::Default => PointConvConfig::default(),
            Self::FullScale => PointConvConfig::full_scale(),
        }
    }
}

fn write_json_pretty<T: serde::Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

pub fn run(cmd: Command) -> Result<()> {
    match cmd {
        Command::Unproject { input, k, out } => {
            let img = load_rgbd(&input)?;
            let cloud = unproject(&img, &k.build())?;
            io::write_lpc(&out, &cloud)?;
            eprintln!("{} points -> {}", cloud.len(), out.display());
        }
        Command::Transform { cloud, u, v, depth, scale, rot, k, points, seed, out } => {
            let pc = io::read_lpc(&cloud)?;
            let rot = load_rotation(&rot)?;
            let result = transform_cloud(&pc, [u, v], depth, scale, &rot, &k.build(), points, seed)?;
            io::write_lpc(&out, &result)?;
            eprintln!("{} points -> {}", result.len(), out.display());
        }
        Command::Project { cloud, width, height, out } => {
            let pc = io::read_lpc(&cloud)?;
            let (env, skipped) = project_equirect(&pc, width, height)?;
            io::write_pfm(&out, env.width(), env.height(), env.pixels())?;
            eprintln!("{skipped} points skipped (behind another point in the same pixel)");
        }
        Command::ShProject { pano, mc, seed, out } => {
            let env = io::read_pfm_env(&pano)?;
            let sh = sh_from_env(&env, mc, seed)?;
            io::write_sh_json(&out, &sh)?;
        }
        Command::Reconstruct { sh, width, height, out } => {
            let light = io::read_sh_json(&sh)?;
            let irr = reconstruct_irradiance_map(&irradiance_sh(&light), width, height)?;
            io::write_pfm(&out, irr.width, irr.height, &irr.pixels)?;
        }
        Command::RenderProbe { sh, size, exposure, out } => {
            let light = io::read_sh_json(&sh)?;
            let irr = irradiance_sh(&light);
            let mut pixels = vec![[0.0; 3]; size * size];
            for v in 0..size {
                for u in 0..size {
                    let x = 2.0 * (u as f64 + 0.5) / size as f64 - 1.0;
                    let y = 2.0 * (v as f64 + 0.5) / size as f64 - 1.0;
                    let r2 = x * x + y * y;
                    if r2 > 1.0 {
                        continue;
                    }
                    // Front hemisphere normal of a unit sphere facing the
                    // viewer; Lambertian radiance is E(n) / pi with albedo 1.
                    let n = [x, -y, -(1.0 - r2).sqrt()];
                    let e = irr.eval(n)?;
                    let px = &mut pixels[v * size + u];
                    for c in 0..3 {
                        px[c] = e[c] / std::f64::consts::PI;
                    }
                }
            }
            io::write_preview_png(&out, size, size, &pixels, exposure)?;
        }
        Command::GenDataset {
            scenes,
            tuples_per_scene,
            points,
            image_width,
            image_height,
            env_height,
            seed,
            out,
        } => {
            std::fs::create_dir_all(&out)?;
            let mut entries = Vec::with_capacity(scenes * tuples_per_scene);
            for si in 0..scenes {
                let scene_seed = seed.wrapping_mul(1000).wrapping_add(si as u64);
                let spec = SceneSpec::random(scene_seed, (image_width, image_height));
                let scene_id = format!("scene-{si:04}");
                for ti in 0..tuples_per_scene {
                    let tuple_seed = scene_seed.wrapping_mul(100).wrapping_add(ti as u64);
                    let tuple = generate_synthetic(
                        &spec,
                        &scene_id,
                        (image_width, image_height),
                        env_height,
                        points,
                        tuple_seed,
                    )?;
                    let dir = out.join(format!("tuple-{si:04}-{ti:02}"));
                    entries.push(save_tuple(&dir, &tuple)?);
                }
            }
            Manifest { version: TUPLE_FORMAT_VERSION, tuples: entries }.save(&out)?;
            eprintln!("{} tuples -> {}", scenes * tuples_per_scene, out.display());
        }
        Command::Train { data, steps, lr, batch_size, optimizer, model_config, seed, out } => {
            let optimizer = match optimizer.as_str() {
                "adam" => Optimizer::Adam,
                "sgd" => Optimizer::Sgd,
                other => anyhow::bail!("unknown optimizer {other:?} (expected adam or sgd)"),
            };
            let cfg = Preset::parse(&model_config)?.config();
            let tuples = load_dataset(&data)?;
            let samples: Vec<TrainSample> = tuples
                .into_iter()
                .map(|t| {
                    Ok(TrainSample { input: CloudGraph::build(&t.cloud, &cfg)?, truth: t.sh })
                })
                .collect::<Result<_>>()?;
            let mut model = Model::init(cfg, seed)?;
            let train_cfg =
                TrainConfig { learning_rate: lr, steps, batch_size, seed, optimizer };
            let losses = train(&mut model, &samples, &train_cfg)?;
            model.save(&out)?;
            eprintln!(
                "loss {:.6} -> {:.6} over {} steps, checkpoint -> {}",
                losses.first().copied().unwrap_or(f64::NAN),
                losses.last().copied().unwrap_or(f64::NAN),
                losses.len(),
                out.display()
            );
        }
        Command::Infer { model, cloud, out } => {
            let model = Model::load(&model)?;
            let pc = io::read_lpc(&cloud)?;
            let sh = model.forward(&pc)?;
            io::write_sh_json(&out, &sh)?;
        }
        Command::Eval { model, data, out } => {
            let model = Model::load(&model)?;
            let tuples = load_dataset(&data)?;
            let report = evaluate(|pc| model.forward(pc), &tuples, IRRADIANCE_METRIC_DIMS)?;
            write_json_pretty(&out, &report)?;
            println!("sh l2 / irradiance l2: {}", report.format_row());
        }
        Command::CountMacs { points, full_scale, out } => {
            let cfg = if full_scale { PointConvConfig::full_scale() } else { PointConvConfig::default() };
            let reports: Vec<_> = points.iter().map(|&n| count_complexity(&cfg, n)).collect();
            write_json_pretty(&out, &reports)?;
            for r in &reports {
                println!("n={} params={} macs={}", r.n_points, r.params, r.macs);
            }
        }
        Command::Pipeline { input, k, u, v, scale, rot, points, seed, model, out } => {
            let img = load_rgbd(&input)?;
            let k = k.build();
            let cloud = quantize_like_lpc(&unproject(&img, &k)?);
            let rot = load_rotation(&rot)?;
            let depth = img.depth_at(u as usize, v as usize);
            let transformed =
                quantize_like_lpc(&transform_cloud(&cloud, [u, v], depth, scale, &rot, &k, points, seed)?);
            let model = Model::load(&model)?;
            let sh = model.forward(&transformed)?;
            io::write_sh_json(&out, &sh)?;
        }
    }
    Ok(())
}
