//! Dense voxel grid geometry shared by the ground truth, the belief map and
//! the entropy field.
//!
//! The grid origin sits at world `(0, 0, 0)`; voxel `(i, j, k)` spans
//! `[i·res, (i+1)·res) × [j·res, (j+1)·res) × [k·res, (k+1)·res)`. Linear
//! indices run x fastest, then y, then z.

use serde::{Deserialize, Serialize};

/// Voxel counts along each axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GridDims {
    pub nx: usize,
    pub ny: usize,
    pub nz: usize,
}

impl GridDims {
    pub fn new(nx: usize, ny: usize, nz: usize) -> Self {
        Self { nx, ny, nz }
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny * self.nz
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Number of (x, y) columns.
    pub fn columns(&self) -> usize {
        self.nx * self.ny
    }

    #[inline]
    pub fn index(&self, x: usize, y: usize, z: usize) -> usize {
        (z * self.ny + y) * self.nx + x
    }

    #[inline]
    pub fn coords(&self, index: usize) -> [usize; 3] {
        let x = index % self.nx;
        let rest = index / self.nx;
        [x, rest % self.ny, rest / self.ny]
    }

    /// Index of a signed coordinate, or `None` outside the grid.
    #[inline]
    pub fn checked_index(&self, c: [i64; 3]) -> Option<usize> {
        if c[0] < 0 || c[1] < 0 || c[2] < 0 {
            return None;
        }
        let (x, y, z) = (c[0] as usize, c[1] as usize, c[2] as usize);
        (x < self.nx && y < self.ny && z < self.nz).then(|| self.index(x, y, z))
    }

    /// Column index `y·nx + x` of a voxel.
    #[inline]
    pub fn column_of(&self, index: usize) -> usize {
        index % self.columns()
    }

    /// Face neighbours (6-connectivity) that lie inside the grid.
    pub fn neighbors6(&self, index: usize) -> impl Iterator<Item = usize> + '_ {
        let [x, y, z] = self.coords(index);
        let c = [x as i64, y as i64, z as i64];
        const OFFSETS: [[i64; 3]; 6] = [
            [-1, 0, 0],
            [1, 0, 0],
            [0, -1, 0],
            [0, 1, 0],
            [0, 0, -1],
            [0, 0, 1],
        ];
        OFFSETS
            .iter()
            .filter_map(move |o| self.checked_index([c[0] + o[0], c[1] + o[1], c[2] + o[2]]))
    }

    /// Neighbours sharing a face, edge or corner (26-connectivity).
    pub fn neighbors26(&self, index: usize) -> impl Iterator<Item = usize> + '_ {
        let [x, y, z] = self.coords(index);
        let c = [x as i64, y as i64, z as i64];
        (0..27).filter(|&n| n != 13).filter_map(move |n| {
            let o = [n % 3 - 1, (n / 3) % 3 - 1, n / 9 - 1];
            self.checked_index([c[0] + o[0], c[1] + o[1], c[2] + o[2]])
        })
    }
}

/// Neighbourhood used for frontier adjacency.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Connectivity {
    #[default]
    Six,
    TwentySix,
}

/// A voxel grid placed in the world: dimensions plus edge length.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub dims: GridDims,
    /// Voxel edge length in meters.
    pub resolution: f64,
}

impl GridSpec {
    pub fn new(dims: GridDims, resolution: f64) -> Self {
        Self { dims, resolution }
    }

    /// World-space size in meters.
    pub fn extent(&self) -> [f64; 3] {
        [
            self.dims.nx as f64 * self.resolution,
            self.dims.ny as f64 * self.resolution,
            self.dims.nz as f64 * self.resolution,
        ]
    }

    pub fn voxel_center(&self, index: usize) -> [f64; 3] {
        let [x, y, z] = self.dims.coords(index);
        let r = self.resolution;
        [
            (x as f64 + 0.5) * r,
            (y as f64 + 0.5) * r,
            (z as f64 + 0.5) * r,
        ]
    }

    /// Signed voxel coordinate containing a world point.
    #[inline]
    pub fn voxel_coords(&self, p: [f64; 3]) -> [i64; 3] {
        [
            (p[0] / self.resolution).floor() as i64,
            (p[1] / self.resolution).floor() as i64,
            (p[2] / self.resolution).floor() as i64,
        ]
    }

    pub fn voxel_at(&self, p: [f64; 3]) -> Option<usize> {
        self.dims.checked_index(self.voxel_coords(p))
    }

    /// Column index containing a world (x, y) point.
    pub fn column_at(&self, x: f64, y: f64) -> Option<usize> {
        let cx = (x / self.resolution).floor();
        let cy = (y / self.resolution).floor();
        if cx < 0.0 || cy < 0.0 || cx >= self.dims.nx as f64 || cy >= self.dims.ny as f64 {
            return None;
        }
        Some(cy as usize * self.dims.nx + cx as usize)
    }

    /// Inclusive range of z layers whose centers fall inside `[z_min, z_max]`.
    pub fn layer_range(&self, z_min: f64, z_max: f64) -> std::ops::Range<usize> {
        let lo = ((z_min / self.resolution) - 0.5).ceil().max(0.0) as usize;
        let hi = (((z_max / self.resolution) - 0.5).floor() + 1.0).max(0.0) as usize;
        lo.min(self.dims.nz)..hi.min(self.dims.nz)
    }

    pub fn contains_point(&self, p: [f64; 3]) -> bool {
        let e = self.extent();
        (0..3).all(|a| p[a] >= 0.0 && p[a] < e[a])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn index_round_trip() {
        let d = GridDims::new(5, 7, 3);
        for i in 0..d.len() {
            let [x, y, z] = d.coords(i);
            assert_eq!(d.index(x, y, z), i);
        }
    }

    #[test]
    fn neighbour_counts() {
        let d = GridDims::new(3, 3, 3);
        let center = d.index(1, 1, 1);
        assert_eq!(d.neighbors6(center).count(), 6);
        assert_eq!(d.neighbors26(center).count(), 26);
        assert_eq!(d.neighbors6(0).count(), 3);
        assert_eq!(d.neighbors26(0).count(), 7);
    }

    #[test]
    fn layer_range_selects_centers() {
        let g = GridSpec::new(GridDims::new(1, 1, 52), 0.05);
        // centers at 0.025, 0.075, ...; [0.1, 1.2] → first center 0.125 (k=2), last 1.175 (k=23)
        assert_eq!(g.layer_range(0.1, 1.2), 2..24);
    }
}
