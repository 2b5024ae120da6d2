//! `lumenpoint`: every pipeline stage as a subcommand.
//!
//! Exit codes: 0 success, 2 usage error (from the argument parser), 3 data
//! error (bad or inconsistent inputs), 4 internal error. Failures print a
//! single `code: message` line to stderr.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "lumenpoint", version, about = "Point-cloud lighting estimation pipeline")]
struct Cli {
    /// Worker-thread cap (or the LUMENPOINT_THREADS env var). All reductions
    /// are deterministic, so outputs never depend on this value.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Copy)]
struct IntrinsicsArgs {
    /// Horizontal focal length in pixels.
    #[arg(long)]
    fx: f64,
    /// Vertical focal length in pixels.
    #[arg(long)]
    fy: f64,
    /// Principal point x in pixels.
    #[arg(long)]
    cx: f64,
    /// Principal point y in pixels.
    #[arg(long)]
    cy: f64,
}

#[derive(Args)]
struct RgbdInput {
    /// 8-bit RGB PNG (used together with --depth).
    #[arg(long, requires = "depth", conflicts_with = "rgbd")]
    color: Option<PathBuf>,
    /// 16-bit grayscale depth PNG in millimeters.
    #[arg(long, requires = "color")]
    depth: Option<PathBuf>,
    /// Single-file binary RGB-D container.
    #[arg(long, required_unless_present = "color")]
    rgbd: Option<PathBuf>,
    /// Decode PNG color as sRGB into linear radiance.
    #[arg(long)]
    srgb: bool,
    /// Run the cross-bilateral depth fill before further processing.
    #[arg(long)]
    fill: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Unproject an RGB-D image into a point cloud (.lpc).
    Unproject {
        #[command(flatten)]
        input: RgbdInput,
        #[command(flatten)]
        k: IntrinsicsArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Recenter a cloud toward a target pixel, rotate it into the panorama
    /// frame, and optionally downsample it.
    Transform {
        #[arg(long)]
        cloud: PathBuf,
        /// Target pixel x of the rendering position.
        #[arg(long)]
        u: f64,
        /// Target pixel y of the rendering position.
        #[arg(long)]
        v: f64,
        /// Depth at the target pixel, meters.
        #[arg(long)]
        depth: f64,
        #[arg(long, default_value_t = 0.95)]
        scale: f64,
        /// JSON file holding a 3x3 rotation matrix (or an object with a
        /// "rotation" field).
        #[arg(long)]
        rot: PathBuf,
        #[command(flatten)]
        k: IntrinsicsArgs,
        /// Downsample to this many points after the transform.
        #[arg(long)]
        points: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Project a point cloud onto an equirectangular panorama (.pfm).
    Project {
        #[arg(long)]
        cloud: PathBuf,
        #[arg(long)]
        width: usize,
        #[arg(long)]
        height: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Project a panorama onto SH coefficients (quadrature by default,
    /// mask-aware when pixels are missing, Monte Carlo with --mc).
    ShProject {
        #[arg(long)]
        pano: PathBuf,
        /// Estimate by Monte Carlo over this many uniform sphere samples.
        #[arg(long)]
        mc: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Reconstruct an irradiance map from SH coefficients (.pfm).
    Reconstruct {
        #[arg(long)]
        sh: PathBuf,
        #[arg(long)]
        width: usize,
        #[arg(long)]
        height: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Render a Lambertian sphere lit by SH coefficients (PNG preview).
    RenderProbe {
        #[arg(long)]
        sh: PathBuf,
        #[arg(long, default_value_t = 256)]
        size: usize,
        #[arg(long, default_value_t = 0.25)]
        exposure: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Generate a synthetic dataset of training tuples.
    GenDataset {
        #[arg(long)]
        scenes: usize,
        #[arg(long, default_value_t = 4)]
        tuples_per_scene: usize,
        #[arg(long, default_value_t = 1280)]
        points: usize,
        #[arg(long, default_value_t = 24)]
        image_width: usize,
        #[arg(long, default_value_t = 18)]
        image_height: usize,
        #[arg(long, default_value_t = 32)]
        env_height: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Train the point-cloud regressor on a generated dataset.
    Train {
        #[arg(long)]
        data: PathBuf,
        #[arg(long, default_value_t = 1000)]
        steps: usize,
        #[arg(long, default_value_t = 1e-3)]
        lr: f64,
        #[arg(long, default_value_t = 8)]
        batch_size: usize,
        #[arg(long, default_value = "adam")]
        optimizer: String,
        /// Model preset: toy, default, or full-scale.
        #[arg(long, default_value = "default")]
        model_config: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run inference on a point cloud with a trained checkpoint.
    Infer {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        cloud: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Evaluate a checkpoint over a dataset (SH l2 and irradiance l2).
    Eval {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Report parameter and MAC counts at the given point budgets.
    CountMacs {
        #[arg(long, num_args = 1.., default_values_t = [512usize, 768, 1024, 1280])]
        points: Vec<usize>,
        /// Use the full-scale preset instead of the default configuration.
        #[arg(long)]
        full_scale: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// End-to-end: RGB-D image to SH coefficients in one invocation.
    Pipeline {
        #[command(flatten)]
        input: RgbdInput,
        #[command(flatten)]
        k: IntrinsicsArgs,
        #[arg(long)]
        u: f64,
        #[arg(long)]
        v: f64,
        #[arg(long, default_value_t = 0.95)]
        scale: f64,
        #[arg(long)]
        rot: PathBuf,
        #[arg(long)]
        points: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                // --help / --version always succeed.
                e.exit();
            }
            // One machine-parsable line; clap's message names the offending
            // flag or value.
            let message = e.render().to_string();
            let first = message.lines().next().unwrap_or("invalid arguments");
            eprintln!("usage: {}", first.trim_start_matches("error: "));
            return ExitCode::from(2);
        }
    };
    let threads = std::env::var("LUMENPOINT_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .or(cli.threads)
        .unwrap_or(1);
    if threads == 0 {
        eprintln!("usage: thread count must be at least 1");
        return ExitCode::from(2);
    }
    match commands::run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let internal = matches!(
                e.downcast_ref::<lumenpoint_core::Error>(),
                Some(lumenpoint_core::Error::GraphConsumed)
            );
            let code = if internal { "internal" } else { "data" };
            eprintln!("{code}: {e:#}");
            ExitCode::from(if internal { 4 } else { 3 })
        }
    }
}
