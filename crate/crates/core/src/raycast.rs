//! Voxel traversal along a ray (Amanatides–Woo grid walk).
//!
//! Visits every voxel the ray passes through in order of increasing ray
//! parameter, yielding the entry and exit distance of the ray inside each
//! voxel. Distances are in meters when the direction is a unit vector.

use crate::grid::GridSpec;

/// One voxel visited by a [`Traversal`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VoxelStep {
    pub index: usize,
    /// Ray parameter where the ray enters this voxel (0 for the origin voxel).
    pub t_enter: f64,
    /// Ray parameter where the ray leaves this voxel.
    pub t_exit: f64,
}

/// Iterator over the voxels pierced by a ray, stopping at the grid boundary.
#[derive(Debug, Clone)]
pub struct Traversal {
    grid: GridSpec,
    cell: [i64; 3],
    step: [i64; 3],
    t_max: [f64; 3],
    t_delta: [f64; 3],
    t: f64,
    done: bool,
}

impl Traversal {
    /// Starts a walk at `origin` along `dir`. The walk is empty when the
    /// origin lies outside the grid.
    pub fn new(grid: GridSpec, origin: [f64; 3], dir: [f64; 3]) -> Self {
        let res = grid.resolution;
        let cell = grid.voxel_coords(origin);
        let mut step = [0i64; 3];
        let mut t_max = [f64::INFINITY; 3];
        let mut t_delta = [f64::INFINITY; 3];
        for a in 0..3 {
            if dir[a] > 0.0 {
                step[a] = 1;
                t_max[a] = ((cell[a] + 1) as f64 * res - origin[a]) / dir[a];
                t_delta[a] = res / dir[a];
            } else if dir[a] < 0.0 {
                step[a] = -1;
                t_max[a] = (cell[a] as f64 * res - origin[a]) / dir[a];
                t_delta[a] = -res / dir[a];
            }
        }
        let done = grid.dims.checked_index(cell).is_none();
        Self {
            grid,
            cell,
            step,
            t_max,
            t_delta,
            t: 0.0,
            done,
        }
    }

    fn next_axis(&self) -> usize {
        let mut axis = 0;
        for a in 1..3 {
            if self.t_max[a] < self.t_max[axis] {
                axis = a;
            }
        }
        axis
    }
}

impl Iterator for Traversal {
    type Item = VoxelStep;

    fn next(&mut self) -> Option<VoxelStep> {
        if self.done {
            return None;
        }
        let index = self.grid.dims.checked_index(self.cell)?;
        let axis = self.next_axis();
        let t_exit = self.t_max[axis];
        let out = VoxelStep {
            index,
            t_enter: self.t,
            t_exit,
        };
        if t_exit.is_infinite() {
            // zero direction: only the origin voxel
            self.done = true;
            return Some(out);
        }
        self.t = t_exit;
        self.cell[axis] += self.step[axis];
        self.t_max[axis] += self.t_delta[axis];
        if self.grid.dims.checked_index(self.cell).is_none() {
            self.done = true;
        }
        Some(out)
    }
}

/// Unit vector for an azimuth/elevation pair.
#[inline]
pub fn direction(azimuth: f64, elevation: f64) -> [f64; 3] {
    let (sa, ca) = azimuth.sin_cos();
    let (se, ce) = elevation.sin_cos();
    [ce * ca, ce * sa, se]
}
