//! Synthetic Lambertian box scenes lit by an SH sky.
//!
//! The camera sits inside an axis-aligned box whose faces reflect an
//! order-2 SH illuminant. The observation image, the rendering-position
//! panorama, and the transformed point cloud are all rendered analytically
//! from the same scene, so the stored SH ground truth is consistent with the
//! stored panorama by construction.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::imaging::{fill_depth, unproject, CameraIntrinsics, DepthFillConfig, RgbdImage};
use crate::pointcloud::{downsample_uniform, recenter, rotate, RenderingRelation};
use crate::sph::{irradiance_sh, pixel_direction, project_quadrature, EnvironmentMap, ShCoefficients};

use super::DatasetTuple;

/// Parametric scene: SH illuminant, box geometry, camera pose, target pixel.
#[derive(Debug, Clone)]
pub struct SceneSpec {
    pub sh_truth: ShCoefficients,
    pub box_min: [f64; 3],
    pub box_max: [f64; 3],
    pub camera_pos: [f64; 3],
    /// Camera-to-world rotation.
    pub camera_rot: [[f64; 3]; 3],
    pub render_uv: [f64; 2],
    pub scale_factor: f64,
    /// Per-face linear albedo, indexed -x, +x, -y, +y, -z, +z.
    pub face_albedo: [[f64; 3]; 6],
}

fn yaw_rotation(angle: f64) -> [[f64; 3]; 3] {
    let (s, c) = angle.sin_cos();
    [[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]]
}

impl SceneSpec {
    /// Seeded random scene: an SH sky with a dominant positive DC term, a
    /// room-sized box, a camera well inside it with a random yaw, and a
    /// render target in the central image region.
    pub fn random(seed: u64, image_dims: (usize, usize)) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_mul(0x9e37_79b9).wrapping_add(seed));
        let mut coeffs = [[0.0f64; 9]; 3];
        for channel in &mut coeffs {
            channel[0] = 12.0 + 8.0 * rng.gen::<f64>();
            for slot in channel.iter_mut().skip(1) {
                *slot = rng.gen::<f64>() * 2.0 - 1.0;
            }
        }
        let half = [2.0 + rng.gen::<f64>(), 1.5 + rng.gen::<f64>(), 2.0 + rng.gen::<f64>()];
        let camera_pos = [
            (rng.gen::<f64>() - 0.5) * half[0],
            (rng.gen::<f64>() - 0.5) * half[1],
            (rng.gen::<f64>() - 0.5) * half[2],
        ];
        let mut face_albedo = [[0.0; 3]; 6];
        for face in &mut face_albedo {
            for c in face.iter_mut() {
                *c = 0.2 + 0.7 * rng.gen::<f64>();
            }
        }
        let (w, h) = image_dims;
        Self {
            sh_truth: ShCoefficients { coeffs },
            box_min: [-half[0], -half[1], -half[2]],
            box_max: half,
            camera_pos,
            camera_rot: yaw_rotation(rng.gen::<f64>() * 2.0 * PI),
            render_uv: [
                (0.25 + 0.5 * rng.gen::<f64>()) * w as f64,
                (0.25 + 0.5 * rng.gen::<f64>()) * h as f64,
            ],
            scale_factor: 0.95,
            face_albedo,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for a in 0..3 {
            if !(self.box_min[a] < self.box_max[a]) {
                return Err(Error::DegenerateScene("box has non-positive extent".into()));
            }
            if !(self.camera_pos[a] > self.box_min[a] && self.camera_pos[a] < self.box_max[a]) {
                return Err(Error::DegenerateScene("camera outside box".into()));
            }
        }
        crate::pointcloud::validate_rotation(&self.camera_rot)?;
        Ok(())
    }

    /// First hit of a ray from `origin` (inside the box) along `dir`:
    /// returns (t, face index). Face normals point inward.
    fn raycast(&self, origin: [f64; 3], dir: [f64; 3]) -> (f64, usize) {
        let mut best_t = f64::INFINITY;
        let mut face = 0;
        for a in 0..3 {
            if dir[a] > 1e-12 {
                let t = (self.box_max[a] - origin[a]) / dir[a];
                if t < best_t {
                    best_t = t;
                    face = 2 * a + 1;
                }
            } else if dir[a] < -1e-12 {
                let t = (self.box_min[a] - origin[a]) / dir[a];
                if t < best_t {
                    best_t = t;
                    face = 2 * a;
                }
            }
        }
        (best_t, face)
    }

    fn face_normal(face: usize) -> [f64; 3] {
        // Inward normals: face 2a is the min wall (+axis normal), 2a+1 the max
        // wall (-axis normal).
        let axis = face / 2;
        let sign = if face % 2 == 0 { 1.0 } else { -1.0 };
        let mut n = [0.0; 3];
        n[axis] = sign;
        n
    }

    /// Outgoing radiance of the wall hit along `dir` from `origin`, both in
    /// world coordinates.
    fn shade(&self, origin: [f64; 3], dir: [f64; 3], irr: &ShCoefficients) -> Result<[f64; 3]> {
        let (_, face) = self.raycast(origin, dir);
        let n = Self::face_normal(face);
        let e = irr.eval(n)?;
        let albedo = self.face_albedo[face];
        Ok([
            (albedo[0] / PI) * e[0].max(0.0),
            (albedo[1] / PI) * e[1].max(0.0),
            (albedo[2] / PI) * e[2].max(0.0),
        ])
    }
}

fn mat_vec(m: &[[f64; 3]; 3], v: [f64; 3]) -> [f64; 3] {
    [
        m[0][0] * v[0] + m[0][1] * v[1] + m[0][2] * v[2],
        m[1][0] * v[0] + m[1][1] * v[1] + m[1][2] * v[2],
        m[2][0] * v[0] + m[2][1] * v[1] + m[2][2] * v[2],
    ]
}

fn default_intrinsics(width: usize, height: usize) -> CameraIntrinsics {
    CameraIntrinsics {
        fx: height as f64,
        fy: height as f64,
        cx: (width as f64 - 1.0) / 2.0,
        cy: (height as f64 - 1.0) / 2.0,
    }
}

/// Renders one tuple from a scene: RGB-D observation (analytic ray-box depth,
/// Lambertian shading), the panorama at the rendering position, the
/// transformed and downsampled cloud, and quadrature SH ground truth.
/// Deterministic per (spec, dims, n_points, seed).
pub fn generate_synthetic(
    spec: &SceneSpec,
    scene_id: &str,
    image_dims: (usize, usize),
    env_height: usize,
    n_points: usize,
    seed: u64,
) -> Result<DatasetTuple> {
    spec.validate()?;
    let (w, h) = image_dims;
    let k = default_intrinsics(w, h);
    if spec.render_uv[0] < 0.0
        || spec.render_uv[0] >= w as f64
        || spec.render_uv[1] < 0.0
        || spec.render_uv[1] >= h as f64
    {
        return Err(Error::DegenerateScene("render_uv outside the observation image".into()));
    }
    let irr = irradiance_sh(&spec.sh_truth);

    // Observation RGB-D in the camera frame.
    let mut color = Vec::with_capacity(w * h);
    let mut depth = Vec::with_capacity(w * h);
    for v in 0..h {
        for u in 0..w {
            let dir_cam = [(u as f64 - k.cx) / k.fx, (v as f64 - k.cy) / k.fy, 1.0];
            let dir_world = mat_vec(&spec.camera_rot, dir_cam);
            let (t, _) = spec.raycast(spec.camera_pos, dir_world);
            color.push(spec.shade(spec.camera_pos, dir_world, &irr)?);
            depth.push(t); // dir_cam.z = 1, so t is camera-frame depth
        }
    }

    // Punch a few holes, then recover them with the cross-bilateral fill so
    // the generation path exercises the same preprocessing as real captures.
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let holes = (w * h / 50).min(32);
    for _ in 0..holes {
        let idx = rng.gen_range(0..w * h);
        depth[idx] = 0.0;
    }
    let observation = RgbdImage::new(w, h, color, depth)?;
    let observation = fill_depth(
        &observation,
        &DepthFillConfig { window_radius: 2.min(w.min(h) / 2).max(1), ..Default::default() },
    )?;

    let (ru, rv) = (spec.render_uv[0], spec.render_uv[1]);
    let depth_at_uv = observation.depth_at(ru as usize, rv as usize);
    if depth_at_uv <= 0.0 {
        return Err(Error::DegenerateScene("render target has no depth".into()));
    }
    let relation = RenderingRelation {
        pixel_uv: [ru, rv],
        scale_factor: spec.scale_factor,
        rotation: spec.camera_rot,
    };

    // Rendering position in world coordinates.
    let target_cam = k.unproject_pixel(ru, rv, depth_at_uv);
    let scaled = [
        spec.scale_factor * target_cam[0],
        spec.scale_factor * target_cam[1],
        spec.scale_factor * target_cam[2],
    ];
    let offset_world = mat_vec(&spec.camera_rot, scaled);
    let render_pos = [
        spec.camera_pos[0] + offset_world[0],
        spec.camera_pos[1] + offset_world[1],
        spec.camera_pos[2] + offset_world[2],
    ];

    // Ground-truth panorama at the rendering position.
    let (ew, eh) = (2 * env_height, env_height);
    let mut env_pixels = Vec::with_capacity(ew * eh);
    for v in 0..eh {
        for u in 0..ew {
            let dir = pixel_direction(u, v, ew, eh);
            env_pixels.push(spec.shade(render_pos, dir, &irr)?);
        }
    }
    let env = EnvironmentMap::new(ew, eh, env_pixels)?;
    let sh = project_quadrature(&env)?;

    // Observation cloud into the panorama frame.
    let cloud = unproject(&observation, &k)?;
    let cloud = recenter(&cloud, &relation, &k, depth_at_uv)?;
    let cloud = rotate(&cloud, &relation.rotation)?;
    let cloud = downsample_uniform(&cloud, n_points, seed)?;

    Ok(DatasetTuple {
        scene_id: scene_id.to_string(),
        seed,
        intrinsics: k,
        observation,
        env,
        relation,
        cloud,
        sh,
    })
}
