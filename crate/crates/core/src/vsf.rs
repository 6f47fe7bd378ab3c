//! View scoring field over the (x, y, θ) lattice.
//!
//! Every safe lattice cell gets a numerator `alpha_frontier · V + G`, where
//! `V` counts frontier voxels in view and `G` is the predicted information
//! gain of a frame taken there. The numerator is combined with the movement
//! cost `L = e^{−d²/2σ²}` of reaching the cell from the robot. Unsafe cells
//! score `−∞`. The field also carries the 2D obstacle costmap used by the
//! planner.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::edt;
use crate::entropy::EntropyField;
use crate::error::FieldError;
use crate::frustum::{self, Scratch};
use crate::fusion::{ChangeSet, VoxelState, WorldMap};
use crate::grid::GridSpec;
use crate::scene::{Pose, RobotBody};
use crate::sensor::CameraModel;

/// How the numerator is combined with the movement cost.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MovementCostMode {
    /// `numerator · L`: nearer views score higher.
    #[default]
    Multiply,
    /// `numerator / L`.
    DivideAsPrinted,
}

/// What a view is scored on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScoringMode {
    /// Frontier visibility plus predicted gain, weighted by movement cost.
    #[default]
    Field,
    /// Predicted gain only.
    LegacyNbv,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct VsfParams {
    /// Lattice cell size in meters; must be a multiple of the voxel size.
    pub xy_resolution: f64,
    pub theta_bins: usize,
    pub alpha_frontier: f64,
    pub movement_sigma: f64,
    pub safety_clearance: f64,
    pub obstacle_sigma: f64,
    pub eta: f64,
    pub movement_cost_mode: MovementCostMode,
    pub scoring_mode: ScoringMode,
    /// Horizontal and vertical ray counts used when scoring a view.
    pub scoring_rays: [usize; 2],
}

impl Default for VsfParams {
    fn default() -> Self {
        Self {
            xy_resolution: 0.4,
            theta_bins: 16,
            alpha_frontier: 1.0,
            movement_sigma: 3.0,
            safety_clearance: 0.35,
            obstacle_sigma: 0.35,
            eta: 500.0,
            movement_cost_mode: MovementCostMode::Multiply,
            scoring_mode: ScoringMode::Field,
            scoring_rays: [16, 8],
        }
    }
}

impl VsfParams {
    pub fn validate(&self) -> Result<(), FieldError> {
        let bad = |field, reason: &str| {
            Err(FieldError::InvalidParams {
                field,
                reason: reason.to_string(),
            })
        };
        if !(self.xy_resolution > 0.0) {
            return bad("xy_resolution", "must be positive");
        }
        if self.theta_bins < 4 {
            return bad("theta_bins", "need at least 4 bins");
        }
        for (field, v) in [
            ("alpha_frontier", self.alpha_frontier),
            ("movement_sigma", self.movement_sigma),
            ("safety_clearance", self.safety_clearance),
            ("obstacle_sigma", self.obstacle_sigma),
            ("eta", self.eta),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return bad(field, "must be positive and finite");
            }
        }
        if self.scoring_rays[0] < 8 || self.scoring_rays[1] < 8 {
            return bad("scoring_rays", "ray counts must be at least 8");
        }
        Ok(())
    }
}

/// Discretized view space aligned with the voxel columns.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ViewLattice {
    pub xy_resolution: f64,
    pub theta_bins: usize,
    pub nx: usize,
    pub ny: usize,
    /// World offset of the lattice corner.
    pub origin: [f64; 2],
    /// Voxel columns per lattice cell edge.
    pub columns_per_cell: usize,
    voxel_resolution: f64,
    grid_nx: usize,
}

impl ViewLattice {
    /// Lattice covering the whole grid, with each cell center placed on a
    /// voxel column center.
    pub fn for_grid(
        grid: &GridSpec,
        xy_resolution: f64,
        theta_bins: usize,
    ) -> Result<Self, FieldError> {
        let ratio = xy_resolution / grid.resolution;
        let m = ratio.round();
        if m < 1.0 || (ratio - m).abs() > 1e-6 {
            return Err(FieldError::InvalidParams {
                field: "xy_resolution",
                reason: format!(
                    "{xy_resolution} is not a whole multiple of the voxel size {}",
                    grid.resolution
                ),
            });
        }
        let m = m as usize;
        let off = if m.is_multiple_of(2) {
            grid.resolution / 2.0
        } else {
            0.0
        };
        Ok(Self {
            xy_resolution,
            theta_bins,
            nx: grid.dims.nx / m,
            ny: grid.dims.ny / m,
            origin: [off, off],
            columns_per_cell: m,
            voxel_resolution: grid.resolution,
            grid_nx: grid.dims.nx,
        })
    }

    /// Free-standing lattice with square cells of `xy_resolution` starting
    /// at the world origin.
    pub fn new(nx: usize, ny: usize, theta_bins: usize, xy_resolution: f64) -> Self {
        Self {
            xy_resolution,
            theta_bins,
            nx,
            ny,
            origin: [0.0, 0.0],
            columns_per_cell: 1,
            voxel_resolution: xy_resolution,
            grid_nx: nx,
        }
    }

    /// Number of (x, y) cells.
    pub fn cells(&self) -> usize {
        self.nx * self.ny
    }

    /// Number of (x, y, θ) cells.
    pub fn len(&self) -> usize {
        self.cells() * self.theta_bins
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize, t: usize) -> usize {
        (j * self.nx + i) * self.theta_bins + t
    }

    /// `(i, j, t)` of a lattice index.
    #[inline]
    pub fn coords(&self, index: usize) -> (usize, usize, usize) {
        let t = index % self.theta_bins;
        let c = index / self.theta_bins;
        (c % self.nx, c / self.nx, t)
    }

    #[inline]
    pub fn cell_of_index(&self, index: usize) -> usize {
        index / self.theta_bins
    }

    pub fn cell_center(&self, i: usize, j: usize) -> (f64, f64) {
        (
            self.origin[0] + (i as f64 + 0.5) * self.xy_resolution,
            self.origin[1] + (j as f64 + 0.5) * self.xy_resolution,
        )
    }

    pub fn theta(&self, t: usize) -> f64 {
        t as f64 * std::f64::consts::TAU / self.theta_bins as f64
    }

    pub fn theta_step(&self) -> f64 {
        std::f64::consts::TAU / self.theta_bins as f64
    }

    /// Nearest θ bin to an angle.
    pub fn theta_bin(&self, theta: f64) -> usize {
        let b = (theta.rem_euclid(std::f64::consts::TAU) / self.theta_step()).round() as usize;
        b % self.theta_bins
    }

    pub fn pose(&self, index: usize) -> Pose {
        let (i, j, t) = self.coords(index);
        let (x, y) = self.cell_center(i, j);
        Pose::new(x, y, self.theta(t))
    }

    /// 2D cell containing a world point, if inside the lattice.
    pub fn cell_at(&self, x: f64, y: f64) -> Option<(usize, usize)> {
        let i = ((x - self.origin[0]) / self.xy_resolution).floor();
        let j = ((y - self.origin[1]) / self.xy_resolution).floor();
        if i < 0.0 || j < 0.0 || i >= self.nx as f64 || j >= self.ny as f64 {
            return None;
        }
        Some((i as usize, j as usize))
    }

    /// Lattice index nearest to a pose.
    pub fn index_of(&self, pose: &Pose) -> Option<usize> {
        let (i, j) = self.cell_at(pose.x, pose.y)?;
        Some(self.index(i, j, self.theta_bin(pose.theta)))
    }

    /// Voxel column under the center of a 2D cell.
    pub fn center_column(&self, cell: usize) -> usize {
        let (i, j) = (cell % self.nx, cell / self.nx);
        let m = self.columns_per_cell;
        (m * j + m / 2) * self.grid_nx + m * i + m / 2
    }

    pub fn voxel_resolution(&self) -> f64 {
        self.voxel_resolution
    }
}

/// Believed state of a voxel column at robot height.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ColumnState {
    Unknown,
    Free,
    Occupied,
}

/// Projects the belief map onto 2D columns over the robot's height band.
///
/// Occupied if any band voxel is Occupied; otherwise Free if any band voxel
/// is Free or the robot has driven over it; otherwise Unknown.
pub fn project_columns(map: &WorldMap, body: &RobotBody) -> Vec<ColumnState> {
    let grid = map.grid();
    let dims = grid.dims;
    let band = grid.layer_range(body.band_min, body.band_max);
    let states = map.states();
    let mut out = Vec::with_capacity(dims.columns());
    for c in 0..dims.columns() {
        let (x, y) = (c % dims.nx, c / dims.nx);
        let mut any_free = map.is_traversed(c);
        let mut occupied = false;
        for z in band.clone() {
            match states[dims.index(x, y, z)] {
                VoxelState::Occupied => {
                    occupied = true;
                    break;
                }
                VoxelState::Free => any_free = true,
                VoxelState::Unknown => {}
            }
        }
        out.push(if occupied {
            ColumnState::Occupied
        } else if any_free {
            ColumnState::Free
        } else {
            ColumnState::Unknown
        });
    }
    out
}

/// Per-2D-cell safety: the cell center keeps `clearance` from every Occupied
/// or Unknown column. `robot_cell`, if given, is always safe.
pub fn safety_mask(
    columns: &[ColumnState],
    grid: &GridSpec,
    lattice: &ViewLattice,
    clearance: f64,
    robot_cell: Option<usize>,
) -> Vec<bool> {
    let dims = grid.dims;
    let blocked: Vec<bool> = columns.iter().map(|&c| c != ColumnState::Free).collect();
    let d2 = edt::squared_distance(&blocked, dims.nx, dims.ny);
    let res2 = grid.resolution * grid.resolution;
    let need = clearance * clearance - 1e-9;
    (0..lattice.cells())
        .map(|cell| Some(cell) == robot_cell || d2[lattice.center_column(cell)] * res2 >= need)
        .collect()
}

/// Gaussian of the distance to the nearest Occupied column, per 2D cell.
/// Zero beyond six standard deviations.
pub fn obstacle_costmap(
    columns: &[ColumnState],
    grid: &GridSpec,
    lattice: &ViewLattice,
    sigma: f64,
) -> Vec<f64> {
    let dims = grid.dims;
    let occ: Vec<bool> = columns
        .iter()
        .map(|&c| c == ColumnState::Occupied)
        .collect();
    let d2 = edt::squared_distance(&occ, dims.nx, dims.ny);
    let res2 = grid.resolution * grid.resolution;
    (0..lattice.cells())
        .map(|cell| obstacle_cost(d2[lattice.center_column(cell)] * res2, sigma))
        .collect()
}

/// `e^{−d²/2σ²}` for a squared distance, truncated to 0 beyond 6σ.
pub fn obstacle_cost(dist2: f64, sigma: f64) -> f64 {
    if dist2 > 36.0 * sigma * sigma {
        0.0
    } else {
        (-dist2 / (2.0 * sigma * sigma)).exp()
    }
}

/// `L = e^{−d²/2σ²}` for Euclidean 2D distance `d`.
pub fn movement_cost(view_xy: (f64, f64), robot_xy: (f64, f64), sigma: f64) -> f64 {
    let dx = view_xy.0 - robot_xy.0;
    let dy = view_xy.1 - robot_xy.1;
    (-(dx * dx + dy * dy) / (2.0 * sigma * sigma)).exp()
}

/// Combines a numerator with the movement cost.
pub fn combine(numerator: f64, l: f64, mode: MovementCostMode) -> f64 {
    match mode {
        MovementCostMode::Multiply => numerator * l,
        MovementCostMode::DivideAsPrinted => numerator / l,
    }
}

/// Number of frontier voxels in line of sight from `view`.
pub fn frontier_visibility(
    map: &WorldMap,
    view: &Pose,
    camera: &CameraModel,
    scratch: &mut Scratch,
) -> usize {
    frustum::visible(map, view, camera, scratch)
        .frontier_voxels
        .len()
}

/// The scored view field plus the 2D maps it was built from.
#[derive(Debug, Clone)]
pub struct ViewScoreField {
    pub lattice: ViewLattice,
    pub params: VsfParams,
    camera: CameraModel,
    body: RobotBody,
    frontier: Vec<u32>,
    gain: Vec<f64>,
    safe: Vec<bool>,
    /// Cells whose stored view terms are current as of the last update.
    scored: Vec<bool>,
    f_o: Vec<f64>,
    columns: Vec<ColumnState>,
    blocked_cells: Vec<bool>,
    robot: Pose,
    robot_cell: Option<usize>,
    last_rescored: usize,
    eta_warned: bool,
    scratch: Scratch,
}

impl ViewScoreField {
    /// Scores every safe lattice cell from scratch.
    pub fn build(
        map: &WorldMap,
        entropy: &EntropyField,
        robot: Pose,
        camera: &CameraModel,
        body: &RobotBody,
        params: &VsfParams,
    ) -> Result<Self, FieldError> {
        params.validate()?;
        let grid = map.grid();
        let lattice = ViewLattice::for_grid(&grid, params.xy_resolution, params.theta_bins)?;
        let scoring_camera = camera.with_rays(params.scoring_rays[0], params.scoring_rays[1]);
        let mut field = Self {
            lattice,
            params: params.clone(),
            camera: scoring_camera,
            body: *body,
            frontier: vec![0; lattice.len()],
            gain: vec![0.0; lattice.len()],
            safe: vec![false; lattice.cells()],
            scored: vec![false; lattice.cells()],
            f_o: vec![0.0; lattice.cells()],
            columns: Vec::new(),
            blocked_cells: vec![false; lattice.cells()],
            robot,
            robot_cell: None,
            last_rescored: 0,
            eta_warned: false,
            scratch: Scratch::new(),
        };
        field.refresh_2d(map, robot);
        let mut count = 0;
        for cell in 0..lattice.cells() {
            if field.safe[cell] {
                field.score_cell(map, entropy, cell);
                field.scored[cell] = true;
                count += lattice.theta_bins;
            }
        }
        field.last_rescored = count;
        field.check_eta();
        Ok(field)
    }

    fn refresh_2d(&mut self, map: &WorldMap, robot: Pose) {
        let grid = map.grid();
        self.robot = robot;
        self.robot_cell = self
            .lattice
            .cell_at(robot.x, robot.y)
            .map(|(i, j)| j * self.lattice.nx + i);
        self.columns = project_columns(map, &self.body);
        let mut safe = safety_mask(
            &self.columns,
            &grid,
            &self.lattice,
            self.params.safety_clearance,
            self.robot_cell,
        );
        for (s, &b) in safe.iter_mut().zip(&self.blocked_cells) {
            if b {
                *s = false;
            }
        }
        self.safe = safe;
        self.f_o = obstacle_costmap(
            &self.columns,
            &grid,
            &self.lattice,
            self.params.obstacle_sigma,
        );
    }

    fn score_cell(&mut self, map: &WorldMap, entropy: &EntropyField, cell: usize) {
        let bins = self.lattice.theta_bins;
        for idx in cell * bins..(cell + 1) * bins {
            self.score_view(map, entropy, idx);
        }
    }

    fn score_view(&mut self, map: &WorldMap, entropy: &EntropyField, idx: usize) {
        let view = self.lattice.pose(idx);
        let vis = frustum::visible(map, &view, &self.camera, &mut self.scratch);
        self.frontier[idx] = vis.frontier_voxels.len() as u32;
        self.gain[idx] = entropy.gain_of(&vis.gain_voxels);
    }

    /// Marks every view whose horizontal field of view can reach a touched
    /// column. Touched columns are grouped into lattice-sized blocks and each
    /// block is treated as its bounding square.
    fn mark_dirty_views(&self, grid: &GridSpec, touched: &[usize], dirty: &mut [bool]) {
        let dims = grid.dims;
        let res = grid.resolution;
        let block = self.lattice.xy_resolution;
        let bx = ((dims.nx as f64 * res) / block).ceil() as usize + 1;
        let by = ((dims.ny as f64 * res) / block).ceil() as usize + 1;
        // per block: min x, min y, max x, max y of touched column squares
        let mut boxes = vec![
            [
                f64::INFINITY,
                f64::INFINITY,
                f64::NEG_INFINITY,
                f64::NEG_INFINITY
            ];
            bx * by
        ];
        for &v in touched {
            let col = dims.column_of(v);
            let (ci, cj) = (col % dims.nx, col / dims.nx);
            let (x0, y0) = (ci as f64 * res, cj as f64 * res);
            let k = ((y0 + 0.5 * res) / block) as usize * bx + ((x0 + 0.5 * res) / block) as usize;
            let b = &mut boxes[k];
            b[0] = b[0].min(x0);
            b[1] = b[1].min(y0);
            b[2] = b[2].max(x0 + res);
            b[3] = b[3].max(y0 + res);
        }
        let bins = self.lattice.theta_bins;
        let step = self.lattice.theta_step();
        let half_fov = 0.5 * self.camera.h_fov;
        let range = self.camera.range_max;
        for b in boxes.iter().filter(|b| b[0].is_finite()) {
            let (cx, cy) = (0.5 * (b[0] + b[2]), 0.5 * (b[1] + b[3]));
            let half_diag = 0.5 * (b[2] - b[0]).hypot(b[3] - b[1]);
            let reach = range + half_diag + 1e-9;
            let span = |c: f64, axis: usize, n: usize| {
                let cell = |v: f64| {
                    ((v - self.lattice.origin[axis]) / block)
                        .floor()
                        .clamp(0.0, n as f64 - 1.0) as usize
                };
                cell(c - reach)..=cell(c + reach)
            };
            for j in span(cy, 1, self.lattice.ny) {
                for i in span(cx, 0, self.lattice.nx) {
                    let (x, y) = self.lattice.cell_center(i, j);
                    let (dx, dy) = (cx - x, cy - y);
                    let d = dx.hypot(dy);
                    if d > reach {
                        continue;
                    }
                    let cell = j * self.lattice.nx + i;
                    let views = &mut dirty[cell * bins..(cell + 1) * bins];
                    let width = if d <= half_diag + 1e-9 {
                        std::f64::consts::PI
                    } else {
                        (half_diag / d).asin()
                    };
                    let half = half_fov + width + 1e-9;
                    if half >= std::f64::consts::PI {
                        views.iter_mut().for_each(|v| *v = true);
                        continue;
                    }
                    let phi = dy.atan2(dx);
                    let lo = ((phi - half) / step).ceil() as i64;
                    let hi = ((phi + half) / step).floor() as i64;
                    for t in lo..=hi {
                        views[t.rem_euclid(bins as i64) as usize] = true;
                    }
                }
            }
        }
    }

    fn clear_cell(&mut self, cell: usize) {
        let bins = self.lattice.theta_bins;
        for idx in cell * bins..(cell + 1) * bins {
            self.frontier[idx] = 0;
            self.gain[idx] = 0.0;
        }
    }

    /// Brings the field up to date after `changes` and a possible robot move.
    ///
    /// The 2D projection, safety mask and costmap are recomputed in full.
    /// Views are re-raycast only where a changed voxel falls inside their
    /// horizontal field of view and range, and for cells that just became
    /// safe.
    pub fn update(
        &mut self,
        map: &WorldMap,
        entropy: &EntropyField,
        changes: &ChangeSet,
        robot: Pose,
    ) {
        self.update_touched(map, entropy, &changes.touched_voxels(), robot);
    }

    /// [`update`](Self::update) given the changed voxels directly.
    pub fn update_touched(
        &mut self,
        map: &WorldMap,
        entropy: &EntropyField,
        touched: &[usize],
        robot: Pose,
    ) {
        let grid = map.grid();
        self.refresh_2d(map, robot);

        let bins = self.lattice.theta_bins;
        let mut dirty = vec![false; self.lattice.len()];
        if !touched.is_empty() {
            self.mark_dirty_views(&grid, touched, &mut dirty);
        }
        let mut count = 0;
        for cell in 0..self.lattice.cells() {
            if !self.safe[cell] {
                if self.scored[cell] {
                    self.clear_cell(cell);
                    self.scored[cell] = false;
                }
                continue;
            }
            if !self.scored[cell] {
                self.score_cell(map, entropy, cell);
                self.scored[cell] = true;
                count += bins;
                continue;
            }
            for idx in cell * bins..(cell + 1) * bins {
                if dirty[idx] {
                    self.score_view(map, entropy, idx);
                    count += 1;
                }
            }
        }
        self.last_rescored = count;
        self.check_eta();
    }

    /// Recomputes safety and the obstacle costmap for a new map state and
    /// robot pose without rescoring any view.
    pub fn refresh_safety(&mut self, map: &WorldMap, robot: Pose) {
        self.refresh_2d(map, robot);
    }

    /// Numerator of one view evaluated on the current map, without storing it.
    pub fn fresh_numerator(&mut self, map: &WorldMap, entropy: &EntropyField, index: usize) -> f64 {
        if !self.is_safe(index) {
            return 0.0;
        }
        let view = self.lattice.pose(index);
        let vis = frustum::visible(map, &view, &self.camera, &mut self.scratch);
        let gain = entropy.gain_of(&vis.gain_voxels);
        match self.params.scoring_mode {
            ScoringMode::Field => {
                self.params.alpha_frontier * vis.frontier_voxels.len() as f64 + gain
            }
            ScoringMode::LegacyNbv => gain,
        }
    }

    /// Permanently excludes a 2D cell, e.g. one the robot failed to enter.
    pub fn block_cell(&mut self, cell: usize) {
        self.blocked_cells[cell] = true;
        self.safe[cell] = false;
        self.scored[cell] = false;
        self.clear_cell(cell);
    }

    pub fn blocked_cells(&self) -> &[bool] {
        &self.blocked_cells
    }

    fn check_eta(&mut self) {
        let max = self.max_score();
        if max > self.params.eta {
            if self.eta_warned {
                log::debug!("view score {max:.1} exceeds eta {}", self.params.eta);
            } else {
                log::warn!(
                    "view score {max:.1} exceeds eta {}; step costs are clamped",
                    self.params.eta
                );
                self.eta_warned = true;
            }
        }
    }

    /// Lattice indices re-raycast by the last build or update.
    pub fn last_rescored(&self) -> usize {
        self.last_rescored
    }

    pub fn robot(&self) -> Pose {
        self.robot
    }

    pub fn robot_cell(&self) -> Option<usize> {
        self.robot_cell
    }

    #[inline]
    pub fn is_safe_cell(&self, cell: usize) -> bool {
        self.safe[cell]
    }

    #[inline]
    pub fn is_safe(&self, index: usize) -> bool {
        self.safe[self.lattice.cell_of_index(index)]
    }

    pub fn safety(&self) -> &[bool] {
        &self.safe
    }

    pub fn obstacle_costs(&self) -> &[f64] {
        &self.f_o
    }

    pub fn columns(&self) -> &[ColumnState] {
        &self.columns
    }

    /// Frontier voxels visible from a lattice view.
    pub fn frontier_count(&self, index: usize) -> u32 {
        self.frontier[index]
    }

    /// Predicted gain of a lattice view.
    pub fn gain(&self, index: usize) -> f64 {
        self.gain[index]
    }

    /// Score before the movement cost; 0 for unsafe cells.
    pub fn numerator(&self, index: usize) -> f64 {
        if !self.is_safe(index) {
            return 0.0;
        }
        match self.params.scoring_mode {
            ScoringMode::Field => {
                self.params.alpha_frontier * self.frontier[index] as f64 + self.gain[index]
            }
            ScoringMode::LegacyNbv => self.gain[index],
        }
    }

    /// Movement cost of a lattice view from the current robot pose.
    pub fn movement_cost(&self, index: usize) -> f64 {
        let (i, j, _) = self.lattice.coords(index);
        movement_cost(
            self.lattice.cell_center(i, j),
            (self.robot.x, self.robot.y),
            self.params.movement_sigma,
        )
    }

    /// View score `F`; `−∞` outside the safety mask.
    pub fn score(&self, index: usize) -> f64 {
        if !self.is_safe(index) {
            return f64::NEG_INFINITY;
        }
        match self.params.scoring_mode {
            ScoringMode::Field => combine(
                self.numerator(index),
                self.movement_cost(index),
                self.params.movement_cost_mode,
            ),
            ScoringMode::LegacyNbv => self.gain[index],
        }
    }

    /// Largest finite score, or `−∞` if nothing is safe.
    pub fn max_score(&self) -> f64 {
        (0..self.lattice.len())
            .map(|i| self.score(i))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Compares against another field cell by cell.
    pub fn diff(&self, other: &ViewScoreField) -> Result<(), String> {
        if self.lattice != other.lattice {
            return Err("lattice mismatch".into());
        }
        if self.safe != other.safe {
            return Err("safety masks differ".into());
        }
        for (c, (a, b)) in self.f_o.iter().zip(&other.f_o).enumerate() {
            if (a - b).abs() > 1e-9 {
                return Err(format!("f_o differs at cell {c}: {a} vs {b}"));
            }
        }
        for idx in 0..self.lattice.len() {
            if self.frontier[idx] != other.frontier[idx] {
                return Err(format!(
                    "frontier visibility differs at view {idx}: {} vs {}",
                    self.frontier[idx], other.frontier[idx]
                ));
            }
            let (a, b) = (self.score(idx), other.score(idx));
            if !(a == b || (a - b).abs() <= 1e-9) {
                return Err(format!("score differs at view {idx}: {a} vs {b}"));
            }
        }
        Ok(())
    }

    /// Writes one θ slice as a CSV grid: rows along y, columns along x.
    /// Unsafe cells are written as `-inf`.
    pub fn write_theta_slice_csv<W: Write>(&self, t: usize, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for j in 0..self.lattice.ny {
            let row: Vec<String> = (0..self.lattice.nx)
                .map(|i| {
                    let f = self.score(self.lattice.index(i, j, t));
                    if f.is_finite() {
                        format!("{f:.6}")
                    } else {
                        "-inf".to_string()
                    }
                })
                .collect();
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Writes every θ slice into `dir` as `field_theta_XX.csv`.
    pub fn export_slices(&self, dir: &Path) -> std::io::Result<()> {
        std::fs::create_dir_all(dir)?;
        for t in 0..self.lattice.theta_bins {
            let file = std::fs::File::create(dir.join(format!("field_theta_{t:02}.csv")))?;
            self.write_theta_slice_csv(t, file)
                .map_err(std::io::Error::other)?;
        }
        Ok(())
    }
}
