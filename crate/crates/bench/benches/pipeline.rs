//! Benchmarks for the hot paths: SH quadrature projection, RGB-D
//! unprojection, graph construction, and the network forward pass.

use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use lumenpoint_core::imaging::unproject;
use lumenpoint_core::learner::{CloudGraph, Model, PointConvConfig};
use lumenpoint_core::sph::project_quadrature;
use lumenpoint_core::{CameraIntrinsics, EnvironmentMap, Point, PointCloud, RgbdImage, ShCoefficients};

fn random_sh(rng: &mut impl Rng) -> ShCoefficients {
    let mut coeffs = [[0.0f64; 9]; 3];
    for channel in &mut coeffs {
        channel[0] = 2.0 + rng.gen::<f64>();
        for slot in channel.iter_mut().skip(1) {
            *slot = rng.gen::<f64>() - 0.5;
        }
    }
    ShCoefficients { coeffs }
}

fn random_cloud(n: usize, seed: u64) -> PointCloud {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    PointCloud::new(
        (0..n)
            .map(|_| Point {
                position: [
                    rng.gen::<f64>() * 4.0 - 2.0,
                    rng.gen::<f64>() * 4.0 - 2.0,
                    rng.gen::<f64>() * 4.0 - 2.0,
                ],
                color: [rng.gen(), rng.gen(), rng.gen()],
            })
            .collect(),
    )
}

fn bench_sh_projection(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let env = EnvironmentMap::from_sh(&random_sh(&mut rng), 128, 64, true).unwrap();
    c.bench_function("sh_project_quadrature_128x64", |b| {
        b.iter(|| project_quadrature(&env).unwrap())
    });
}

fn bench_unproject(c: &mut Criterion) {
    let (w, h) = (320, 240);
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let color: Vec<[f64; 3]> = (0..w * h).map(|_| [rng.gen(), rng.gen(), rng.gen()]).collect();
    let depth: Vec<f64> = (0..w * h).map(|_| 0.5 + 4.0 * rng.gen::<f64>()).collect();
    let img = RgbdImage::new(w, h, color, depth).unwrap();
    let k = CameraIntrinsics { fx: 240.0, fy: 240.0, cx: 159.5, cy: 119.5 };
    c.bench_function("unproject_320x240", |b| b.iter(|| unproject(&img, &k).unwrap()));
}

fn bench_graph_build(c: &mut Criterion) {
    let cfg = PointConvConfig::default();
    let cloud = random_cloud(1280, 3);
    c.bench_function("cloud_graph_build_1280", |b| {
        b.iter_batched(
            || cloud.clone(),
            |pc| CloudGraph::build(&pc, &cfg).unwrap(),
            BatchSize::SmallInput,
        )
    });
}

fn bench_forward(c: &mut Criterion) {
    let cfg = PointConvConfig::default();
    let model = Model::init(cfg, 0).unwrap();
    let cloud = random_cloud(1280, 4);
    c.bench_function("model_forward_default_1280", |b| {
        b.iter(|| model.forward(&cloud).unwrap())
    });
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(10);
    targets = bench_sh_projection, bench_unproject, bench_graph_build, bench_forward
}
criterion_main!(benches);
