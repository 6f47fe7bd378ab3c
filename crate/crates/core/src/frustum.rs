//! Hypothetical views against the believed map.
//!
//! A view is evaluated by walking a reduced ray set through the robot's own
//! map rather than the ground truth. Two voxel sets come out of one walk:
//! voxels a new frame would inform (for expected gain) and frontier voxels in
//! line of sight (for frontier visibility).

use crate::fusion::{VoxelState, WorldMap};
use crate::raycast::Traversal;
use crate::scene::Pose;
use crate::sensor::CameraModel;

/// Free distance a ray must cover before an Unknown voxel stops it.
pub const UNKNOWN_BLOCK_AFTER_FREE: f64 = 0.5;

/// Voxels seen from one hypothetical view, each listed once.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Visibility {
    /// Voxels a frame from this view would update, in first-visit order.
    pub gain_voxels: Vec<usize>,
    /// Frontier voxels in line of sight, in first-visit order.
    pub frontier_voxels: Vec<usize>,
}

/// Reusable marks for deduplicating voxels across rays.
#[derive(Debug, Clone, Default)]
pub struct Scratch {
    gain_mark: Vec<u32>,
    frontier_mark: Vec<u32>,
    epoch: u32,
}

impl Scratch {
    pub fn new() -> Self {
        Self::default()
    }

    fn begin(&mut self, n: usize) -> u32 {
        if self.gain_mark.len() != n {
            self.gain_mark = vec![0; n];
            self.frontier_mark = vec![0; n];
            self.epoch = 0;
        }
        self.epoch = self.epoch.wrapping_add(1);
        if self.epoch == 0 {
            self.gain_mark.iter_mut().for_each(|m| *m = 0);
            self.frontier_mark.iter_mut().for_each(|m| *m = 0);
            self.epoch = 1;
        }
        self.epoch
    }
}

/// Walks `camera`'s ray set from `view` through the believed map.
///
/// Range rules match the simulated sensor: voxels leaving the ray before
/// `range_min` are skipped, and an Occupied voxel entered before `range_min`
/// blocks the ray outright. In range, an Occupied voxel is seen and ends the
/// ray. An Unknown voxel is seen and ends the gain part of the ray once at
/// least [`UNKNOWN_BLOCK_AFTER_FREE`] of Free has been crossed; frontier
/// counting continues until an Occupied voxel.
pub fn visible(
    map: &WorldMap,
    view: &Pose,
    camera: &CameraModel,
    scratch: &mut Scratch,
) -> Visibility {
    let grid = map.grid();
    let epoch = scratch.begin(grid.dims.len());
    let origin = camera.origin(view);
    let mut out = Visibility::default();
    for dir in camera.ray_directions(view.theta) {
        let mut free_run = 0.0;
        let mut gain_open = true;
        for step in Traversal::new(grid, origin, dir) {
            if step.t_enter >= camera.range_max {
                break;
            }
            let state = map.state(step.index);
            if step.t_exit <= camera.range_min || step.t_enter < camera.range_min {
                if state == VoxelState::Occupied {
                    break;
                }
                if step.t_exit <= camera.range_min {
                    continue;
                }
            }
            if gain_open && scratch.gain_mark[step.index] != epoch {
                scratch.gain_mark[step.index] = epoch;
                out.gain_voxels.push(step.index);
            }
            match state {
                VoxelState::Occupied => break,
                VoxelState::Unknown => {
                    if free_run >= UNKNOWN_BLOCK_AFTER_FREE {
                        gain_open = false;
                    }
                }
                VoxelState::Free => {
                    free_run += step.t_exit - step.t_enter;
                    if map.is_frontier(step.index) && scratch.frontier_mark[step.index] != epoch {
                        scratch.frontier_mark[step.index] = epoch;
                        out.frontier_voxels.push(step.index);
                    }
                }
            }
        }
    }
    out
}
