//! Simulated depth + semantic sensor.
//!
//! Rays are cast through the ground-truth voxel grid. A ray that stops on an
//! occupied voxel yields a hit (positive support) with a noisy depth; every
//! free voxel it crossed inside the valid range yields a miss (negative
//! support). Hit voxels that carry a ground-truth label also receive a noisy
//! categorical label distribution from [`semantic_oracle`], standing in for a
//! learned segmentation network.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::SensorError;
use crate::grid::GridSpec;
use crate::raycast::{direction, Traversal};
use crate::scene::{GroundTruth, Pose};

/// Depth camera geometry and noise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CameraModel {
    pub range_min: f64,
    pub range_max: f64,
    pub depth_noise_sigma: f64,
    /// Horizontal field of view in radians.
    pub h_fov: f64,
    /// Vertical field of view in radians.
    pub v_fov: f64,
    pub h_rays: usize,
    pub v_rays: usize,
    /// Optical center height above the floor plane, meters.
    #[serde(default = "default_height")]
    pub height: f64,
}

fn default_height() -> f64 {
    1.0
}

impl Default for CameraModel {
    /// Kinect-v1-like: 0.5–4.5 m range, 0.03 m depth noise, 57°×43° FOV.
    fn default() -> Self {
        Self {
            range_min: 0.5,
            range_max: 4.5,
            depth_noise_sigma: 0.03,
            h_fov: 57f64.to_radians(),
            v_fov: 43f64.to_radians(),
            h_rays: 80,
            v_rays: 60,
            height: default_height(),
        }
    }
}

impl CameraModel {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.range_min > 0.0 && self.range_min < self.range_max) {
            return Err("need 0 < range_min < range_max".into());
        }
        if !(self.depth_noise_sigma >= 0.0) {
            return Err("depth_noise_sigma must be non-negative".into());
        }
        let pi = std::f64::consts::PI;
        if !(self.h_fov > 0.0 && self.h_fov < pi && self.v_fov > 0.0 && self.v_fov < pi) {
            return Err("fields of view must lie in (0, π)".into());
        }
        if self.h_rays < 8 || self.v_rays < 8 {
            return Err("ray counts must be at least 8".into());
        }
        Ok(())
    }

    /// Same optics with a different ray budget.
    pub fn with_rays(&self, h_rays: usize, v_rays: usize) -> Self {
        Self {
            h_rays,
            v_rays,
            ..self.clone()
        }
    }

    /// Unit ray directions for a camera facing azimuth `theta`, pitch zero.
    /// Rays are spread uniformly in angle, row by row from the bottom.
    pub fn ray_directions(&self, theta: f64) -> Vec<[f64; 3]> {
        let mut out = Vec::with_capacity(self.h_rays * self.v_rays);
        for v in 0..self.v_rays {
            let el = self.v_fov * ((v as f64 + 0.5) / self.v_rays as f64 - 0.5);
            for h in 0..self.h_rays {
                let az = theta + self.h_fov * ((h as f64 + 0.5) / self.h_rays as f64 - 0.5);
                out.push(direction(az, el));
            }
        }
        out
    }

    pub fn origin(&self, pose: &Pose) -> [f64; 3] {
        [pose.x, pose.y, self.height]
    }
}

/// Parameters of the simulated segmentation output.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SemanticModel {
    /// Mass on the peak label at the worst viewing quality.
    pub q_min: f64,
    /// Mass on the peak label at the best viewing quality.
    pub q_max: f64,
    /// Label-swap probability at quality zero.
    pub swap_prob: f64,
}

impl Default for SemanticModel {
    fn default() -> Self {
        Self {
            q_min: 0.35,
            q_max: 0.95,
            swap_prob: 0.25,
        }
    }
}

/// Evidence from one captured frame.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SensorFrame {
    pub pose: Pose,
    /// Hit voxels with measured depth, sorted by voxel index.
    pub hits: Vec<(usize, f64)>,
    /// Voxels traversed as free, in first-visit order; disjoint from hits.
    pub misses: Vec<usize>,
    /// Label distributions for labeled hit voxels, sorted by voxel index.
    pub semantic_obs: Vec<(usize, Vec<f64>)>,
}

impl SensorFrame {
    pub fn empty(pose: Pose) -> Self {
        Self {
            pose,
            ..Default::default()
        }
    }
}

/// Outcome of one ray.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RayResult {
    /// Free voxels crossed within `[range_min, range_max]`, in ray order.
    pub misses: Vec<usize>,
    /// First occupied voxel and its measured (noisy, clamped) depth.
    pub hit: Option<(usize, f64)>,
}

/// Walks a ray through an occupancy predicate, pushing in-range free voxels
/// into `misses` and returning the first occupied voxel with its true depth.
///
/// An occupied voxel entered before `range_min` blocks the ray without a
/// return. Voxels whose ray segment ends before `range_min` are neither hit
/// nor miss.
pub(crate) fn trace_ray(
    grid: GridSpec,
    occupied: impl Fn(usize) -> bool,
    origin: [f64; 3],
    dir: [f64; 3],
    range_min: f64,
    range_max: f64,
    misses: &mut Vec<usize>,
) -> Option<(usize, f64)> {
    for step in Traversal::new(grid, origin, dir) {
        if step.t_enter >= range_max {
            break;
        }
        if occupied(step.index) {
            if step.t_enter < range_min {
                return None;
            }
            return Some((step.index, step.t_enter));
        }
        if step.t_exit > range_min {
            misses.push(step.index);
        }
    }
    None
}

fn noisy_depth<R: Rng>(depth: f64, camera: &CameraModel, rng: &mut R) -> f64 {
    let measured = if camera.depth_noise_sigma > 0.0 {
        let normal = Normal::new(0.0, camera.depth_noise_sigma).expect("finite sigma");
        depth + normal.sample(rng)
    } else {
        depth
    };
    measured.clamp(camera.range_min, camera.range_max)
}

/// Casts one ray through the ground truth.
///
/// `dir` must be a unit vector. Rays leaving the grid end at the boundary.
pub fn cast_ray<R: Rng>(
    gt: &GroundTruth,
    origin: [f64; 3],
    dir: [f64; 3],
    camera: &CameraModel,
    rng: &mut R,
) -> RayResult {
    let mut misses = Vec::new();
    let hit = trace_ray(
        gt.grid,
        |i| gt.occupancy[i],
        origin,
        dir,
        camera.range_min,
        camera.range_max,
        &mut misses,
    )
    .map(|(index, depth)| (index, noisy_depth(depth, camera, rng)));
    RayResult { misses, hit }
}

/// Viewing quality in `[0, 1]`: 1 at `range_min`, 0 at `range_max`.
pub fn observation_quality(depth: f64, camera: &CameraModel) -> f64 {
    (1.0 - (depth - camera.range_min) / (camera.range_max - camera.range_min)).clamp(0.0, 1.0)
}

/// Simulated per-voxel segmentation output.
///
/// Puts mass `q = q_min + (q_max − q_min)·quality` on the peak label and
/// spreads the rest evenly. With probability `swap_prob·(1 − quality)` the
/// peak lands on a uniformly chosen wrong label. `gt_label` is 1-based.
pub fn semantic_oracle<R: Rng>(
    gt_label: u16,
    quality: f64,
    label_count: usize,
    model: &SemanticModel,
    rng: &mut R,
) -> Vec<f64> {
    debug_assert!(gt_label >= 1 && gt_label as usize <= label_count);
    let quality = quality.clamp(0.0, 1.0);
    if label_count == 1 {
        return vec![1.0];
    }
    let truth = gt_label as usize - 1;
    let q = model.q_min + (model.q_max - model.q_min) * quality;
    let rest = (1.0 - q) / (label_count - 1) as f64;
    let mut peak = truth;
    if rng.gen_bool((model.swap_prob * (1.0 - quality)).clamp(0.0, 1.0)) {
        let r = rng.gen_range(0..label_count - 1);
        peak = if r >= truth { r + 1 } else { r };
    }
    let mut dist = vec![rest; label_count];
    dist[peak] = q;
    dist
}

/// Deterministic per-frame random stream derived from the master seed,
/// frame counter and pose, so frames can be evaluated in any order.
pub fn frame_rng(master_seed: u64, frame_index: u64, pose: &Pose) -> ChaCha8Rng {
    let mut h = splitmix(master_seed);
    for word in [
        frame_index,
        pose.x.to_bits(),
        pose.y.to_bits(),
        pose.theta.to_bits(),
    ] {
        h = splitmix(h ^ word);
    }
    ChaCha8Rng::seed_from_u64(h)
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Fails when the camera column at `pose` is blocked in the ground truth.
pub fn check_pose(gt: &GroundTruth, pose: &Pose, camera: &CameraModel) -> Result<(), SensorError> {
    let Some(column) = gt.grid.column_at(pose.x, pose.y) else {
        return Err(SensorError::PoseOutsideMap {
            x: pose.x,
            y: pose.y,
        });
    };
    let cols = gt.grid.dims.columns();
    let floor_clear = gt.grid.layer_range(0.1, camera.height);
    let camera_voxel = gt.grid.voxel_at(camera.origin(pose));
    if floor_clear.clone().any(|z| gt.occupancy[z * cols + column])
        || camera_voxel.is_some_and(|v| gt.occupancy[v])
    {
        return Err(SensorError::PoseInObstacle {
            x: pose.x,
            y: pose.y,
        });
    }
    Ok(())
}

/// Captures one frame at `pose`.
///
/// A voxel hit by any ray is a hit (first ray's depth is kept); misses
/// exclude hit voxels. Labeled hits get one semantic observation each.
pub fn capture<R: Rng>(
    gt: &GroundTruth,
    pose: &Pose,
    camera: &CameraModel,
    semantics: &SemanticModel,
    rng: &mut R,
) -> Result<SensorFrame, SensorError> {
    check_pose(gt, pose, camera)?;
    let origin = camera.origin(pose);
    const MISS: u8 = 1;
    const HIT: u8 = 2;
    let mut mark = vec![0u8; gt.grid.dims.len()];
    let mut hits: Vec<(usize, f64)> = Vec::new();
    let mut misses: Vec<usize> = Vec::new();
    let mut ray_misses = Vec::with_capacity(256);
    for dir in camera.ray_directions(pose.theta) {
        ray_misses.clear();
        let hit = trace_ray(
            gt.grid,
            |i| gt.occupancy[i],
            origin,
            dir,
            camera.range_min,
            camera.range_max,
            &mut ray_misses,
        );
        for &m in &ray_misses {
            if mark[m] == 0 {
                mark[m] = MISS;
                misses.push(m);
            }
        }
        if let Some((index, depth)) = hit {
            let measured = noisy_depth(depth, camera, rng);
            if mark[index] != HIT {
                mark[index] = HIT;
                hits.push((index, measured));
            }
        }
    }
    misses.retain(|&m| mark[m] == MISS);
    hits.sort_by_key(|h| h.0);
    let semantic_obs = hits
        .iter()
        .filter(|(i, _)| gt.label[*i] != 0)
        .map(|&(i, depth)| {
            let quality = observation_quality(depth, camera);
            (
                i,
                semantic_oracle(gt.label[i], quality, gt.label_count, semantics, rng),
            )
        })
        .collect();
    Ok(SensorFrame {
        pose: *pose,
        hits,
        misses,
        semantic_obs,
    })
}
