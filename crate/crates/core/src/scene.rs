//! Ground-truth scenes: authored or generated box layouts and their voxel
//! rasterization.
//!
//! A scene is a list of axis-aligned boxes in meters, each carrying a label
//! index into the scene's label table and a flag telling whether it is
//! building structure (wall, floor) or an object. The simulator only ever
//! reads the rasterized [`GroundTruth`]; the robot never sees it directly.

use std::collections::VecDeque;
use std::f64::consts::TAU;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::SceneError;
use crate::grid::{GridDims, GridSpec};

/// Robot position on the floor plane and camera azimuth.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Pose {
    pub x: f64,
    pub y: f64,
    /// Azimuth in radians, normalized to `[0, 2π)`.
    pub theta: f64,
}

impl Pose {
    pub fn new(x: f64, y: f64, theta: f64) -> Self {
        Self {
            x,
            y,
            theta: normalize_angle(theta),
        }
    }

    pub fn distance_xy(&self, other: &Pose) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// Wraps an angle into `[0, 2π)`.
pub fn normalize_angle(theta: f64) -> f64 {
    let t = theta.rem_euclid(TAU);
    // rem_euclid can round up to exactly TAU for tiny negative inputs
    if t >= TAU {
        0.0
    } else {
        t
    }
}

/// An axis-aligned box of the scene description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneBox {
    pub min: [f64; 3],
    pub max: [f64; 3],
    /// Index into [`SceneSpec::labels`].
    pub label: usize,
    #[serde(rename = "structure", default)]
    pub is_structure: bool,
}

impl SceneBox {
    fn contains(&self, p: [f64; 3]) -> bool {
        (0..3).all(|a| p[a] >= self.min[a] && p[a] < self.max[a])
    }
}

/// Height band and radius of the robot body, used for collision checks and
/// the 2D obstacle projection.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RobotBody {
    /// Lowest obstacle height that blocks the robot (above the floor slab).
    pub band_min: f64,
    /// Highest obstacle height that blocks the robot.
    pub band_max: f64,
    /// Footprint radius in meters.
    pub radius: f64,
}

impl Default for RobotBody {
    fn default() -> Self {
        Self {
            band_min: 0.1,
            band_max: 1.2,
            radius: 0.2,
        }
    }
}

/// Authored scene description; see the JSON schema in the README.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneSpec {
    /// Voxel edge length in meters.
    pub resolution: f64,
    /// Voxel counts `[nx, ny, nz]`.
    pub extents: [usize; 3],
    pub labels: Vec<String>,
    pub boxes: Vec<SceneBox>,
    #[serde(rename = "start")]
    pub start_pose: Pose,
}

impl SceneSpec {
    pub fn grid(&self) -> GridSpec {
        GridSpec::new(
            GridDims::new(self.extents[0], self.extents[1], self.extents[2]),
            self.resolution,
        )
    }

    /// Number of semantic classes `K`.
    pub fn label_count(&self) -> usize {
        self.labels.len()
    }

    pub fn object_box_count(&self) -> usize {
        self.boxes.iter().filter(|b| !b.is_structure).count()
    }

    pub fn from_json(text: &str) -> Result<Self, SceneError> {
        let mut spec: SceneSpec = serde_json::from_str(text)?;
        spec.start_pose.theta = normalize_angle(spec.start_pose.theta);
        spec.validate()?;
        Ok(spec)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scene serializes")
    }

    /// Checks every structural invariant, naming the offending field.
    pub fn validate(&self) -> Result<(), SceneError> {
        if !(self.resolution.is_finite() && self.resolution > 0.0) {
            return Err(SceneError::invalid(
                "resolution",
                "must be a positive number",
            ));
        }
        if self.extents.contains(&0) {
            return Err(SceneError::invalid(
                "extents",
                "every axis needs at least one voxel",
            ));
        }
        if self.labels.is_empty() {
            return Err(SceneError::invalid(
                "labels",
                "at least one label is required",
            ));
        }
        if self.labels.len() > u16::MAX as usize - 1 {
            return Err(SceneError::invalid("labels", "too many labels"));
        }
        let extent = self.grid().extent();
        let tol = 1e-9;
        for (i, b) in self.boxes.iter().enumerate() {
            for a in 0..3 {
                if !(b.min[a].is_finite() && b.max[a].is_finite()) || b.min[a] >= b.max[a] {
                    return Err(SceneError::invalid(
                        format!("boxes[{i}]"),
                        "min must be strictly below max on every axis",
                    ));
                }
                if b.min[a] < -tol || b.max[a] > extent[a] + tol {
                    return Err(SceneError::invalid(
                        format!("boxes[{i}]"),
                        format!(
                            "corner outside the scene extents ({:.3} x {:.3} x {:.3} m)",
                            extent[0], extent[1], extent[2]
                        ),
                    ));
                }
            }
            if b.label >= self.labels.len() {
                return Err(SceneError::invalid(
                    format!("boxes[{i}].label"),
                    format!("label {} has no entry in `labels`", b.label),
                ));
            }
        }
        let s = self.start_pose;
        if !(s.x.is_finite() && s.y.is_finite() && s.theta.is_finite()) {
            return Err(SceneError::invalid("start_pose", "non-finite coordinate"));
        }
        if s.x < 0.0 || s.y < 0.0 || s.x >= extent[0] || s.y >= extent[1] {
            return Err(SceneError::invalid(
                "start_pose",
                "outside the scene extents",
            ));
        }
        let gt = rasterize(self);
        if gt.footprint_blocked(s.x, s.y, &RobotBody::default()) {
            return Err(SceneError::invalid(
                "start_pose",
                "robot footprint overlaps an occupied voxel",
            ));
        }
        Ok(())
    }
}

/// Reads and validates a scene JSON file.
pub fn load_scene(path: impl AsRef<Path>) -> Result<SceneSpec, SceneError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| SceneError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    SceneSpec::from_json(&text)
}

/// Rasterized scene: the simulation oracle.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    pub grid: GridSpec,
    pub occupancy: Vec<bool>,
    /// Label id per voxel: 0 for none, otherwise `label index + 1`.
    pub label: Vec<u16>,
    /// True where the label came from a non-structure box.
    pub is_object: Vec<bool>,
    pub label_count: usize,
}

impl GroundTruth {
    pub fn is_occupied(&self, index: usize) -> bool {
        self.occupancy[index]
    }

    /// True when any voxel of the column in the body's height band is occupied.
    pub fn column_blocked(&self, column: usize, body: &RobotBody) -> bool {
        let cols = self.grid.dims.columns();
        self.grid
            .layer_range(body.band_min, body.band_max)
            .any(|z| self.occupancy[z * cols + column])
    }

    /// True when the robot footprint at `(x, y)` touches an occupied voxel
    /// or leaves the map.
    pub fn footprint_blocked(&self, x: f64, y: f64, body: &RobotBody) -> bool {
        let res = self.grid.resolution;
        let dims = self.grid.dims;
        let r = body.radius;
        let x0 = ((x - r) / res).floor() as i64;
        let x1 = ((x + r) / res).floor() as i64;
        let y0 = ((y - r) / res).floor() as i64;
        let y1 = ((y + r) / res).floor() as i64;
        for cy in y0..=y1 {
            for cx in x0..=x1 {
                let px = (cx as f64 + 0.5) * res;
                let py = (cy as f64 + 0.5) * res;
                if (px - x).hypot(py - y) > r + 0.5 * res {
                    continue;
                }
                if cx < 0 || cy < 0 || cx >= dims.nx as i64 || cy >= dims.ny as i64 {
                    return true;
                }
                if self.column_blocked(cy as usize * dims.nx + cx as usize, body) {
                    return true;
                }
            }
        }
        false
    }

    /// Object voxels exposed to free space through a face: the part of an
    /// object a sensor can ever observe.
    pub fn object_surface(&self) -> Vec<usize> {
        (0..self.grid.dims.len())
            .filter(|&i| self.is_object[i] && self.exposed(i))
            .collect()
    }

    fn exposed(&self, index: usize) -> bool {
        // grid boundary faces do not count: nothing looks in from outside
        self.grid.dims.neighbors6(index).any(|n| !self.occupancy[n])
    }

    /// Ground-truth objects: 6-connected components of object voxels sharing
    /// one label, each reduced to its exposed surface voxels.
    pub fn objects(&self) -> Vec<ObjectInstance> {
        let n = self.grid.dims.len();
        let mut seen = vec![false; n];
        let mut out = Vec::new();
        for seed in 0..n {
            if seen[seed] || !self.is_object[seed] {
                continue;
            }
            let label = self.label[seed];
            let mut queue = VecDeque::from([seed]);
            seen[seed] = true;
            let mut surface = Vec::new();
            let mut size = 0usize;
            while let Some(v) = queue.pop_front() {
                size += 1;
                if self.exposed(v) {
                    surface.push(v);
                }
                for nb in self.grid.dims.neighbors6(v) {
                    if !seen[nb] && self.is_object[nb] && self.label[nb] == label {
                        seen[nb] = true;
                        queue.push_back(nb);
                    }
                }
            }
            surface.sort_unstable();
            if !surface.is_empty() {
                out.push(ObjectInstance {
                    label,
                    voxel_count: size,
                    surface,
                });
            }
        }
        out
    }

    /// Free columns (body band unoccupied), row-major over `nx × ny`.
    pub fn free_columns(&self, body: &RobotBody) -> Vec<bool> {
        (0..self.grid.dims.columns())
            .map(|c| !self.column_blocked(c, body))
            .collect()
    }
}

/// One ground-truth object.
#[derive(Debug, Clone, PartialEq)]
pub struct ObjectInstance {
    pub label: u16,
    /// All voxels of the component, including hidden interior ones.
    pub voxel_count: usize,
    /// Exposed voxels, sorted.
    pub surface: Vec<usize>,
}

/// Rasterizes boxes by voxel-center containment.
///
/// Structure boxes are painted first and non-structure boxes second, each in
/// list order, so the last covering object box wins and objects beat walls.
pub fn rasterize(spec: &SceneSpec) -> GroundTruth {
    let grid = spec.grid();
    let dims = grid.dims;
    let n = dims.len();
    let mut occupancy = vec![false; n];
    let mut label = vec![0u16; n];
    let mut is_object = vec![false; n];
    let res = spec.resolution;
    let range = |lo: f64, hi: f64, count: usize| {
        let a = ((lo / res) - 0.5).ceil().max(0.0) as usize;
        let b = ((hi / res) - 0.5).ceil().max(0.0) as usize;
        a.min(count)..b.min(count)
    };
    for pass_structure in [true, false] {
        for b in spec
            .boxes
            .iter()
            .filter(|b| b.is_structure == pass_structure)
        {
            for z in range(b.min[2], b.max[2], dims.nz) {
                for y in range(b.min[1], b.max[1], dims.ny) {
                    for x in range(b.min[0], b.max[0], dims.nx) {
                        let i = dims.index(x, y, z);
                        debug_assert!(b.contains(grid.voxel_center(i)));
                        occupancy[i] = true;
                        label[i] = b.label as u16 + 1;
                        is_object[i] = !b.is_structure;
                    }
                }
            }
        }
    }
    GroundTruth {
        grid,
        occupancy,
        label,
        is_object,
        label_count: spec.labels.len(),
    }
}

/// Number of 4-connected components of free columns.
pub fn free_space_components(gt: &GroundTruth, body: &RobotBody) -> usize {
    let free = gt.free_columns(body);
    let (nx, ny) = (gt.grid.dims.nx, gt.grid.dims.ny);
    let mut seen = vec![false; free.len()];
    let mut components = 0;
    for start in 0..free.len() {
        if !free[start] || seen[start] {
            continue;
        }
        components += 1;
        seen[start] = true;
        let mut queue = VecDeque::from([start]);
        while let Some(c) = queue.pop_front() {
            let (x, y) = (c % nx, c / nx);
            let mut push = |n: usize| {
                if free[n] && !seen[n] {
                    seen[n] = true;
                    queue.push_back(n);
                }
            };
            if x > 0 {
                push(c - 1);
            }
            if x + 1 < nx {
                push(c + 1);
            }
            if y > 0 {
                push(c - nx);
            }
            if y + 1 < ny {
                push(c + nx);
            }
        }
    }
    components
}

/// Parameters of the procedural scene generator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenParams {
    pub rooms: usize,
    /// Fraction of each room's floor area covered by furniture.
    pub furniture_density: f64,
    /// Footprint `[width, depth]` in meters.
    pub size: [f64; 2],
    pub seed: u64,
    #[serde(default = "default_resolution")]
    pub resolution: f64,
    #[serde(default = "default_height")]
    pub height: f64,
}

fn default_resolution() -> f64 {
    0.05
}

fn default_height() -> f64 {
    2.6
}

impl GenParams {
    pub fn new(rooms: usize, furniture_density: f64, size: [f64; 2], seed: u64) -> Self {
        Self {
            rooms,
            furniture_density,
            size,
            seed,
            resolution: default_resolution(),
            height: default_height(),
        }
    }

    pub fn with_resolution(mut self, resolution: f64) -> Self {
        self.resolution = resolution;
        self
    }
}

/// Labels used by generated scenes; indices 0 and 1 are structure.
pub const GENERATED_LABELS: [&str; 8] = [
    "wall", "floor", "sofa", "table", "bed", "chair", "cabinet", "shelf",
];

const WALL: usize = 0;
const FLOOR: usize = 1;
const WALL_THICKNESS: f64 = 0.1;
const FLOOR_THICKNESS: f64 = 0.05;
const DOOR_WIDTH: f64 = 1.2;
const FURNITURE_GAP: f64 = 1.0;
const START_KEEPOUT: f64 = 1.0;
const MAX_ATTEMPTS: usize = 20;

/// Furniture footprint ranges `(min side, max side, min height, max height)`.
const FURNITURE: [(usize, f64, f64, f64, f64); 6] = [
    (2, 0.8, 1.8, 0.5, 0.8),
    (3, 0.6, 1.4, 0.6, 0.8),
    (4, 1.0, 2.0, 0.45, 0.6),
    (5, 0.45, 0.6, 0.5, 0.9),
    (6, 0.4, 1.0, 0.6, 0.9),
    (7, 0.3, 1.2, 0.7, 0.9),
];

#[derive(Debug, Clone, Copy)]
struct Rect {
    x0: f64,
    y0: f64,
    x1: f64,
    y1: f64,
}

impl Rect {
    fn gap_to(&self, o: &Rect) -> f64 {
        let dx = (o.x0 - self.x1).max(self.x0 - o.x1).max(0.0);
        let dy = (o.y0 - self.y1).max(self.y0 - o.y1).max(0.0);
        dx.hypot(dy)
    }

    fn area(&self) -> f64 {
        (self.x1 - self.x0) * (self.y1 - self.y0)
    }
}

/// Generates a single-floor multi-room scene.
///
/// Rooms are laid out as strips (up to three rooms) or two rows of strips,
/// separated by walls with 1.2 m doors. Furniture is placed flush against one
/// wall or free-standing, always at least 1 m from other furniture, doors and
/// the start pose, so free space stays connected. The result is fully
/// determined by `params`.
pub fn gen_scene(params: &GenParams) -> Result<SceneSpec, SceneError> {
    let [w, d] = params.size;
    if params.rooms == 0 {
        return Err(SceneError::invalid("rooms", "must be positive"));
    }
    if !(params.furniture_density >= 0.0 && params.furniture_density < 1.0) {
        return Err(SceneError::invalid(
            "furniture_density",
            "must lie in [0, 1)",
        ));
    }
    if !(w >= 4.0 && d >= 4.0) {
        return Err(SceneError::invalid(
            "size",
            "each side must be at least 4 m",
        ));
    }
    if !(params.resolution > 0.0) {
        return Err(SceneError::invalid("resolution", "must be positive"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    for _ in 0..MAX_ATTEMPTS {
        if let Some(spec) = try_generate(params, &mut rng) {
            return Ok(spec);
        }
    }
    Err(SceneError::GenerationInfeasible {
        seed: params.seed,
        attempts: MAX_ATTEMPTS,
        params: format!(
            "{} rooms, density {}, {}x{} m",
            params.rooms, params.furniture_density, w, d
        ),
    })
}

fn try_generate(params: &GenParams, rng: &mut ChaCha8Rng) -> Option<SceneSpec> {
    let res = params.resolution;
    let inv = (1.0 / res).round();
    let snap = |v: f64| (v * inv).round() / inv;
    let [w, d] = [snap(params.size[0]), snap(params.size[1])];
    let h = snap(params.height);
    let extents = [
        (w * inv).round() as usize,
        (d * inv).round() as usize,
        (h * inv).round() as usize,
    ];
    let t = WALL_THICKNESS;
    let wall = |min: [f64; 3], max: [f64; 3]| SceneBox {
        min,
        max,
        label: WALL,
        is_structure: true,
    };
    let mut boxes = vec![
        SceneBox {
            min: [0.0, 0.0, 0.0],
            max: [w, d, FLOOR_THICKNESS],
            label: FLOOR,
            is_structure: true,
        },
        wall([0.0, 0.0, 0.0], [t, d, h]),
        wall([w - t, 0.0, 0.0], [w, d, h]),
        wall([0.0, 0.0, 0.0], [w, t, h]),
        wall([0.0, d - t, 0.0], [w, d, h]),
    ];

    // room grid
    let (cols, rows) = if params.rooms <= 3 {
        (params.rooms, 1)
    } else {
        (params.rooms.div_ceil(2), 2)
    };
    let min_room = 2.0 * DOOR_WIDTH;
    if w / cols as f64 <= min_room || d / rows as f64 <= min_room {
        return None;
    }
    let jitter =
        |rng: &mut ChaCha8Rng, base: f64, span: f64| snap(base + rng.gen_range(-0.1..=0.1) * span);
    let xs: Vec<f64> = (0..=cols)
        .map(|k| match k {
            0 => 0.0,
            k if k == cols => w,
            k => jitter(rng, w * k as f64 / cols as f64, w / cols as f64),
        })
        .collect();
    let y_split = if rows == 2 {
        jitter(rng, d / 2.0, d / 2.0)
    } else {
        d
    };

    // rooms: (rect interior, index); the last column spans both rows when rooms is odd
    let mut rooms: Vec<Rect> = Vec::new();
    let mut doors: Vec<Rect> = Vec::new();
    let merged_last = rows == 2 && params.rooms % 2 == 1;
    for c in 0..cols {
        let full_height = rows == 1 || (merged_last && c == cols - 1);
        let bands: Vec<(f64, f64)> = if full_height {
            vec![(0.0, d)]
        } else {
            vec![(0.0, y_split), (y_split, d)]
        };
        for &(y0, y1) in &bands {
            rooms.push(Rect {
                x0: xs[c] + t,
                y0: y0 + t,
                x1: xs[c + 1] - t,
                y1: y1 - t,
            });
        }
        // horizontal wall between rows inside this column
        if !full_height {
            let xa = xs[c] + if c == 0 { t } else { t / 2.0 };
            let xb = xs[c + 1] - if c == cols - 1 { t } else { t / 2.0 };
            let door_lo = snap(rng.gen_range((xa + 0.3)..=(xb - 0.3 - DOOR_WIDTH)));
            let door_hi = door_lo + DOOR_WIDTH;
            boxes.push(wall(
                [xa, y_split - t / 2.0, 0.0],
                [door_lo, y_split + t / 2.0, h],
            ));
            boxes.push(wall(
                [door_hi, y_split - t / 2.0, 0.0],
                [xb, y_split + t / 2.0, h],
            ));
            doors.push(Rect {
                x0: door_lo,
                y0: y_split - DOOR_WIDTH,
                x1: door_hi,
                y1: y_split + DOOR_WIDTH,
            });
        }
    }
    // vertical walls between columns, one door per row band that the wall separates
    for c in 1..cols {
        let x = xs[c];
        let right_full = merged_last && c == cols - 1;
        let bands: Vec<(f64, f64)> = if rows == 1 {
            vec![(0.0, d)]
        } else {
            vec![(0.0, y_split), (y_split, d)]
        };
        let mut segments = Vec::new();
        let mut cursor = t;
        for (bi, &(y0, y1)) in bands.iter().enumerate() {
            let lo = y0 + if bi == 0 { t } else { t / 2.0 };
            let hi = y1 - if bi + 1 == bands.len() { t } else { t / 2.0 };
            // with a merged right room one door suffices
            if right_full && bi == 1 {
                continue;
            }
            let door_lo = snap(rng.gen_range((lo + 0.3)..=(hi - 0.3 - DOOR_WIDTH)));
            segments.push((cursor, door_lo));
            cursor = door_lo + DOOR_WIDTH;
            doors.push(Rect {
                x0: x - DOOR_WIDTH,
                y0: door_lo,
                x1: x + DOOR_WIDTH,
                y1: door_lo + DOOR_WIDTH,
            });
        }
        segments.push((cursor, d - t));
        for (a, b) in segments {
            if b > a {
                boxes.push(wall([x - t / 2.0, a, 0.0], [x + t / 2.0, b, h]));
            }
        }
    }

    // start at the center of the first room
    let r0 = rooms[0];
    let start = Pose::new(
        snap((r0.x0 + r0.x1) / 2.0),
        snap((r0.y0 + r0.y1) / 2.0),
        0.0,
    );

    let mut placed: Vec<Rect> = Vec::new();
    for room in &rooms {
        let target = params.furniture_density * room.area();
        let mut covered = 0.0;
        let mut tries = 0;
        while covered < target && tries < 200 {
            tries += 1;
            let (label, lo, hi, zlo, zhi) = FURNITURE[rng.gen_range(0..FURNITURE.len())];
            let mut sx = snap(rng.gen_range(lo..=hi)).max(res);
            let mut sy = snap(rng.gen_range(lo * 0.6..=hi * 0.6).max(0.4)).max(res);
            if rng.gen_bool(0.5) {
                std::mem::swap(&mut sx, &mut sy);
            }
            let sz = snap(rng.gen_range(zlo..=zhi));
            let flush = rng.gen_range(0..5); // 4 = free-standing
            let free_x = (room.x1 - room.x0) - sx;
            let free_y = (room.y1 - room.y0) - sy;
            if free_x <= 2.0 * FURNITURE_GAP || free_y <= 2.0 * FURNITURE_GAP {
                continue;
            }
            let mut x0 =
                snap(room.x0 + FURNITURE_GAP + rng.gen_range(0.0..=(free_x - 2.0 * FURNITURE_GAP)));
            let mut y0 =
                snap(room.y0 + FURNITURE_GAP + rng.gen_range(0.0..=(free_y - 2.0 * FURNITURE_GAP)));
            match flush {
                0 => x0 = room.x0,
                1 => x0 = room.x1 - sx,
                2 => y0 = room.y0,
                3 => y0 = room.y1 - sy,
                _ => {}
            }
            let rect = Rect {
                x0,
                y0,
                x1: x0 + sx,
                y1: y0 + sy,
            };
            let start_rect = Rect {
                x0: start.x,
                y0: start.y,
                x1: start.x,
                y1: start.y,
            };
            if rect.gap_to(&start_rect) < START_KEEPOUT
                || placed.iter().any(|p| p.gap_to(&rect) < FURNITURE_GAP)
                || doors.iter().any(|dr| dr.gap_to(&rect) < 0.2)
            {
                continue;
            }
            placed.push(rect);
            covered += rect.area();
            boxes.push(SceneBox {
                min: [rect.x0, rect.y0, FLOOR_THICKNESS],
                max: [rect.x1, rect.y1, snap(FLOOR_THICKNESS + sz)],
                label,
                is_structure: false,
            });
        }
    }

    let spec = SceneSpec {
        resolution: res,
        extents,
        labels: GENERATED_LABELS.iter().map(|s| s.to_string()).collect(),
        boxes,
        start_pose: start,
    };
    if spec.validate().is_err() {
        return None;
    }
    let gt = rasterize(&spec);
    (free_space_components(&gt, &RobotBody::default()) == 1).then_some(spec)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one_room_json() -> String {
        r#"{
            "resolution": 0.05,
            "extents": [80, 80, 52],
            "labels": ["wall", "sofa"],
            "boxes": [
                {"min": [0.0, 0.0, 0.0], "max": [0.1, 4.0, 2.6], "label": 0, "structure": true},
                {"min": [3.9, 0.0, 0.0], "max": [4.0, 4.0, 2.6], "label": 0, "structure": true},
                {"min": [0.0, 0.0, 0.0], "max": [4.0, 0.1, 2.6], "label": 0, "structure": true},
                {"min": [0.0, 3.9, 0.0], "max": [4.0, 4.0, 2.6], "label": 0, "structure": true},
                {"min": [2.8, 1.0, 0.0], "max": [3.7, 3.0, 0.8], "label": 1, "structure": false}
            ],
            "start": {"x": 2.0, "y": 2.0, "theta": 0.0}
        }"#
        .to_string()
    }

    #[test]
    fn loads_minimal_room() {
        let spec = SceneSpec::from_json(&one_room_json()).unwrap();
        assert_eq!(spec.boxes.len(), 5);
        assert!(spec.label_count() >= 1);
        let again = SceneSpec::from_json(&spec.to_json()).unwrap();
        assert_eq!(again, spec);
    }

    #[test]
    fn start_inside_wall_is_rejected() {
        let text = one_room_json().replace(
            r#""start": {"x": 2.0, "y": 2.0, "theta": 0.0}"#,
            r#""start": {"x": 0.05, "y": 2.0, "theta": 0.0}"#,
        );
        match SceneSpec::from_json(&text) {
            Err(SceneError::Invalid { field, .. }) => assert_eq!(field, "start_pose"),
            other => panic!("expected start_pose error, got {other:?}"),
        }
    }

    #[test]
    fn box_outside_extents_is_rejected() {
        let text = one_room_json().replace("[3.7, 3.0, 0.8]", "[4.5, 3.0, 0.8]");
        match SceneSpec::from_json(&text) {
            Err(SceneError::Invalid { field, .. }) => assert_eq!(field, "boxes[4]"),
            other => panic!("expected boxes[4] error, got {other:?}"),
        }
    }

    #[test]
    fn malformed_json_is_a_parse_error() {
        assert!(matches!(
            SceneSpec::from_json("{\"resolution\": 0.05"),
            Err(SceneError::Parse(_))
        ));
    }

    fn spec_with(boxes: Vec<SceneBox>, extents: [usize; 3]) -> SceneSpec {
        SceneSpec {
            resolution: 0.05,
            extents,
            labels: vec!["wall".into(), "sofa".into(), "table".into()],
            boxes,
            start_pose: Pose::new(0.0, 0.0, 0.0),
        }
    }

    #[test]
    fn empty_scene_rasterizes_free() {
        let gt = rasterize(&spec_with(vec![], [10, 10, 10]));
        assert!(gt.occupancy.iter().all(|&o| !o));
        assert!(gt.label.iter().all(|&l| l == 0));
    }

    #[test]
    fn unit_cube_has_8000_voxels() {
        // centers at 0.025 + 0.05k; those inside [0.5, 1.5) are k = 10..30 on each axis
        let b = SceneBox {
            min: [0.5, 0.5, 0.5],
            max: [1.5, 1.5, 1.5],
            label: 1,
            is_structure: false,
        };
        let gt = rasterize(&spec_with(vec![b], [40, 40, 40]));
        let analytic = (0..40)
            .filter(|k| {
                let c = 0.025 + 0.05 * *k as f64;
                (0.5..1.5).contains(&c)
            })
            .count();
        assert_eq!(analytic, 20);
        assert_eq!(gt.occupancy.iter().filter(|&&o| o).count(), analytic.pow(3));
    }

    #[test]
    fn last_object_box_wins_overlap() {
        let sofa = SceneBox {
            min: [0.0, 0.0, 0.0],
            max: [0.5, 0.5, 0.5],
            label: 1,
            is_structure: false,
        };
        let table = SceneBox {
            min: [0.25, 0.25, 0.25],
            max: [0.5, 0.5, 0.5],
            label: 2,
            is_structure: false,
        };
        let wall = SceneBox {
            min: [0.0, 0.0, 0.0],
            max: [0.5, 0.5, 0.5],
            label: 0,
            is_structure: true,
        };
        // wall listed last still loses to objects
        let gt = rasterize(&spec_with(vec![sofa, table, wall], [10, 10, 10]));
        let g = gt.grid;
        let overlap = g.voxel_at([0.4, 0.4, 0.4]).unwrap();
        let sofa_only = g.voxel_at([0.1, 0.1, 0.1]).unwrap();
        assert_eq!(gt.label[overlap], 3);
        assert_eq!(gt.label[sofa_only], 2);
        assert!(gt.is_object[overlap]);
    }

    #[test]
    fn labeled_voxels_are_occupied() {
        let spec = gen_scene(&GenParams::new(2, 0.15, [8.0, 5.0], 3)).unwrap();
        let gt = rasterize(&spec);
        assert!(gt
            .label
            .iter()
            .zip(&gt.occupancy)
            .all(|(&l, &o)| l == 0 || o));
        assert_eq!(rasterize(&spec), gt);
    }

    #[test]
    fn single_empty_room_is_walls_and_floor() {
        let spec = gen_scene(&GenParams::new(1, 0.0, [6.0, 6.0], 7)).unwrap();
        let walls = spec
            .boxes
            .iter()
            .filter(|b| b.is_structure && b.label == WALL)
            .count();
        let floors = spec.boxes.iter().filter(|b| b.label == FLOOR).count();
        assert_eq!((walls, floors), (4, 1));
        assert_eq!(spec.object_box_count(), 0);
    }

    #[test]
    fn generation_is_deterministic() {
        let p = GenParams::new(1, 0.0, [6.0, 6.0], 7);
        assert_eq!(
            gen_scene(&p).unwrap().to_json(),
            gen_scene(&p).unwrap().to_json()
        );
        let q = GenParams::new(3, 0.1, [12.0, 10.0], 1);
        assert_eq!(
            gen_scene(&q).unwrap().to_json(),
            gen_scene(&q).unwrap().to_json()
        );
    }

    #[test]
    fn generated_free_space_is_connected() {
        let spec = gen_scene(&GenParams::new(3, 0.1, [12.0, 10.0], 1)).unwrap();
        assert!(spec.object_box_count() > 0);
        let gt = rasterize(&spec);
        assert_eq!(free_space_components(&gt, &RobotBody::default()), 1);
    }

    #[test]
    fn generator_rejects_bad_params() {
        assert!(gen_scene(&GenParams::new(0, 0.1, [6.0, 6.0], 1)).is_err());
        assert!(gen_scene(&GenParams::new(1, 0.1, [3.0, 6.0], 1)).is_err());
        assert!(matches!(
            gen_scene(&GenParams::new(9, 0.1, [4.0, 4.0], 1)),
            Err(SceneError::GenerationInfeasible { .. })
        ));
    }

    #[test]
    fn pose_normalization() {
        assert!((Pose::new(0.0, 0.0, -0.5).theta - (TAU - 0.5)).abs() < 1e-12);
        assert_eq!(Pose::new(0.0, 0.0, TAU).theta, 0.0);
    }
}
