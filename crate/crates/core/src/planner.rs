//! Next-best-view selection and joint path/camera planning on the view lattice.
//!
//! Paths move through (x, y, θ) lattice cells. An xy step may also turn the
//! camera by up to the rotation limit; a pure rotation turns one θ bin. Each
//! move into cell `d` costs
//! `max(ε, η − F(d))·len + η·f_o(d)·len`, so high-scoring cells are cheap to
//! cross and cells near obstacles are expensive.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, VecDeque};
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::PlanError;
use crate::vsf::{ViewLattice, ViewScoreField};

/// Floor on `η − F`, keeping every edge cost positive.
pub const MIN_STEP_COST: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PlannerConfig {
    /// Meters per second.
    pub linear_speed: f64,
    /// Radians per second.
    pub angular_speed: f64,
    /// Views scoring below this end exploration.
    pub min_view_score: f64,
}

impl Default for PlannerConfig {
    fn default() -> Self {
        Self {
            linear_speed: 0.3,
            angular_speed: 40f64.to_radians(),
            min_view_score: 0.5,
        }
    }
}

impl PlannerConfig {
    /// Largest camera turn allowed during one xy move, in radians.
    pub fn rotation_limit(&self, lattice: &ViewLattice) -> f64 {
        self.angular_speed * lattice.xy_resolution / self.linear_speed
    }

    /// Rotation limit in whole θ bins.
    pub fn rotation_bins(&self, lattice: &ViewLattice) -> usize {
        (self.rotation_limit(lattice) / lattice.theta_step() + 1e-9).floor() as usize
    }

    pub fn validate(&self, lattice: &ViewLattice) -> Result<(), String> {
        if !(self.linear_speed > 0.0 && self.angular_speed > 0.0) {
            return Err("speeds must be positive".into());
        }
        if self.rotation_bins(lattice) < 1 {
            return Err("rotation limit is below one θ bin".into());
        }
        Ok(())
    }

    /// Seconds to drive `distance` meters and turn `rotation` radians.
    pub fn sim_time(&self, distance: f64, rotation: f64) -> f64 {
        distance / self.linear_speed + rotation / self.angular_speed
    }
}

/// What the planner needs from a scored field.
pub trait CostField {
    fn lattice(&self) -> &ViewLattice;
    /// View score of a lattice index, `−∞` where unsafe.
    fn view_score(&self, index: usize) -> f64;
    /// Obstacle cost of a 2D cell.
    fn obstacle(&self, cell: usize) -> f64;
    fn safe_cell(&self, cell: usize) -> bool;
    fn eta(&self) -> f64;
}

impl CostField for ViewScoreField {
    fn lattice(&self) -> &ViewLattice {
        &self.lattice
    }

    fn view_score(&self, index: usize) -> f64 {
        self.score(index)
    }

    fn obstacle(&self, cell: usize) -> f64 {
        self.obstacle_costs()[cell]
    }

    fn safe_cell(&self, cell: usize) -> bool {
        self.is_safe_cell(cell)
    }

    fn eta(&self) -> f64 {
        self.params.eta
    }
}

/// Explicit field given as arrays, for constructed planning problems.
#[derive(Debug, Clone, PartialEq)]
pub struct TableField {
    pub lattice: ViewLattice,
    /// Per lattice index.
    pub scores: Vec<f64>,
    /// Per 2D cell.
    pub obstacle: Vec<f64>,
    /// Per 2D cell.
    pub safe: Vec<bool>,
    pub eta: f64,
}

impl CostField for TableField {
    fn lattice(&self) -> &ViewLattice {
        &self.lattice
    }

    fn view_score(&self, index: usize) -> f64 {
        if self.safe[self.lattice.cell_of_index(index)] {
            self.scores[index]
        } else {
            f64::NEG_INFINITY
        }
    }

    fn obstacle(&self, cell: usize) -> f64 {
        self.obstacle[cell]
    }

    fn safe_cell(&self, cell: usize) -> bool {
        self.safe[cell]
    }

    fn eta(&self) -> f64 {
        self.eta
    }
}

/// Cost of moving into `dest` over a step of `len` meters.
pub fn edge_cost<F: CostField + ?Sized>(field: &F, dest: usize, len: f64) -> f64 {
    let eta = field.eta();
    let f = field.view_score(dest);
    let cell = field.lattice().cell_of_index(dest);
    let raw = eta - f;
    if raw < MIN_STEP_COST {
        log::debug!("view score {f} at {dest} exceeds eta {eta}; step cost clamped");
    }
    raw.max(MIN_STEP_COST) * len + eta * field.obstacle(cell) * len
}

/// Step length of a move between adjacent lattice indices.
pub fn step_length(lattice: &ViewLattice, from: usize, to: usize) -> f64 {
    if lattice.cell_of_index(from) == lattice.cell_of_index(to) {
        lattice.xy_resolution / 2.0
    } else {
        lattice.xy_resolution
    }
}

/// Safe successors of a lattice index under the rotation limit.
pub fn neighbors<F: CostField + ?Sized>(
    field: &F,
    index: usize,
    rotation_bins: usize,
    out: &mut Vec<usize>,
) {
    out.clear();
    let l = field.lattice();
    let (i, j, t) = l.coords(index);
    let bins = l.theta_bins as i64;
    let turn = |dt: i64| ((t as i64 + dt).rem_euclid(bins)) as usize;
    for dt in [-1i64, 1] {
        let n = l.index(i, j, turn(dt));
        if n != index && !out.contains(&n) {
            out.push(n);
        }
    }
    let k = rotation_bins as i64;
    for (di, dj) in [(1i64, 0i64), (-1, 0), (0, 1), (0, -1)] {
        let (ni, nj) = (i as i64 + di, j as i64 + dj);
        if ni < 0 || nj < 0 || ni >= l.nx as i64 || nj >= l.ny as i64 {
            continue;
        }
        let (ni, nj) = (ni as usize, nj as usize);
        if !field.safe_cell(nj * l.nx + ni) {
            continue;
        }
        for dt in -k..=k {
            let n = l.index(ni, nj, turn(dt));
            if !out.contains(&n) {
                out.push(n);
            }
        }
    }
}

fn heuristic(l: &ViewLattice, a: usize, goal: usize) -> f64 {
    let (ai, aj, _) = l.coords(a);
    let (gi, gj, _) = l.coords(goal);
    let cells = ai.abs_diff(gi) + aj.abs_diff(gj);
    MIN_STEP_COST * l.xy_resolution * cells as f64
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Entry {
    key: f64,
    index: usize,
}

impl Eq for Entry {}

impl Ord for Entry {
    // min-heap on (key, index)
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .key
            .total_cmp(&self.key)
            .then_with(|| other.index.cmp(&self.index))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// A planned lattice path with its projections and costs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathPlan {
    pub lattice_path: Vec<usize>,
    /// Cell-center xy per lattice path entry, meters.
    pub robot_waypoints: Vec<[f64; 2]>,
    /// Unwrapped camera azimuth per lattice path entry, radians.
    pub camera_schedule: Vec<f64>,
    /// Cost of each move; one shorter than the path.
    pub edge_costs: Vec<f64>,
    pub total_cost: f64,
    pub total_length: f64,
    pub total_rotation: f64,
}

impl PathPlan {
    /// Builds a plan from a lattice index sequence, pricing it on `field`.
    pub fn from_path<F: CostField + ?Sized>(field: &F, path: Vec<usize>) -> Self {
        let l = *field.lattice();
        let mut robot_waypoints = Vec::with_capacity(path.len());
        let mut camera_schedule: Vec<f64> = Vec::with_capacity(path.len());
        let mut edge_costs = Vec::with_capacity(path.len().saturating_sub(1));
        let mut total_length = 0.0;
        let mut total_rotation = 0.0;
        for (k, &idx) in path.iter().enumerate() {
            let (i, j, t) = l.coords(idx);
            let (x, y) = l.cell_center(i, j);
            robot_waypoints.push([x, y]);
            let raw = l.theta(t);
            let theta = match camera_schedule.last() {
                None => raw,
                Some(&prev) => prev + wrap_angle(raw - prev),
            };
            if k > 0 {
                let from = path[k - 1];
                let len = step_length(&l, from, idx);
                edge_costs.push(edge_cost(field, idx, len));
                if l.cell_of_index(from) != l.cell_of_index(idx) {
                    total_length += len;
                }
                total_rotation += (theta - camera_schedule[k - 1]).abs();
            }
            camera_schedule.push(theta);
        }
        let total_cost = edge_costs.iter().sum();
        Self {
            lattice_path: path,
            robot_waypoints,
            camera_schedule,
            edge_costs,
            total_cost,
            total_length,
            total_rotation,
        }
    }

    pub fn start(&self) -> usize {
        self.lattice_path[0]
    }

    pub fn goal(&self) -> usize {
        *self.lattice_path.last().expect("plans are never empty")
    }

    /// Checks the move model, rotation bound and safety mask.
    pub fn validate<F: CostField + ?Sized>(
        &self,
        field: &F,
        cfg: &PlannerConfig,
    ) -> Result<(), String> {
        let l = field.lattice();
        let k = cfg.rotation_bins(l);
        let limit = k as f64 * l.theta_step() + 1e-9;
        let mut nb = Vec::new();
        for (n, w) in self.lattice_path.windows(2).enumerate() {
            neighbors(field, w[0], k, &mut nb);
            if !nb.contains(&w[1]) {
                return Err(format!("move {n} is not a lattice move"));
            }
            let dtheta = (self.camera_schedule[n + 1] - self.camera_schedule[n]).abs();
            if dtheta > limit {
                return Err(format!("move {n} turns {dtheta} rad, over the limit"));
            }
        }
        for &idx in &self.lattice_path {
            if !field.safe_cell(l.cell_of_index(idx)) {
                return Err(format!("path cell {idx} is unsafe"));
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plans serialize")
    }
}

/// Wraps an angle difference into `(−π, π]`.
pub fn wrap_angle(a: f64) -> f64 {
    let w = a.rem_euclid(2.0 * PI);
    if w > PI {
        w - 2.0 * PI
    } else {
        w
    }
}

/// A camera orientation held at a robot waypoint.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CameraEntry {
    pub waypoint: usize,
    pub theta: f64,
}

/// Robot waypoints with repeated positions collapsed, and the camera
/// schedule keyed by waypoint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Projection {
    pub waypoints: Vec<[f64; 2]>,
    pub camera: Vec<CameraEntry>,
}

pub fn project(plan: &PathPlan) -> Projection {
    let mut waypoints: Vec<[f64; 2]> = Vec::new();
    let mut camera = Vec::with_capacity(plan.camera_schedule.len());
    for (wp, &theta) in plan.robot_waypoints.iter().zip(&plan.camera_schedule) {
        if waypoints.last() != Some(wp) {
            waypoints.push(*wp);
        }
        camera.push(CameraEntry {
            waypoint: waypoints.len() - 1,
            theta,
        });
    }
    Projection { waypoints, camera }
}

/// Highest-scoring view; ties go to the view nearer `robot_xy`, then to the
/// lowest lattice index.
pub fn select_nbv<F: CostField + ?Sized>(
    field: &F,
    robot_xy: (f64, f64),
    threshold: f64,
) -> Result<usize, PlanError> {
    let l = field.lattice();
    let mut best: Option<(f64, f64, usize)> = None;
    for idx in 0..l.len() {
        let f = field.view_score(idx);
        if !f.is_finite() {
            continue;
        }
        let (i, j, _) = l.coords(idx);
        let (x, y) = l.cell_center(i, j);
        let d = (x - robot_xy.0).hypot(y - robot_xy.1);
        let better = match best {
            None => true,
            Some((bf, bd, _)) => f > bf || (f == bf && d < bd),
        };
        if better {
            best = Some((f, d, idx));
        }
    }
    match best {
        Some((f, _, idx)) if f >= threshold => Ok(idx),
        Some((f, _, _)) => Err(PlanError::ExplorationComplete { best: f, threshold }),
        None => Err(PlanError::ExplorationComplete {
            best: f64::NEG_INFINITY,
            threshold,
        }),
    }
}

fn check_endpoints<F: CostField + ?Sized>(
    field: &F,
    start: usize,
    goal: usize,
) -> Result<(), PlanError> {
    let l = field.lattice();
    for cell in [start, goal] {
        if cell >= l.len() || !field.safe_cell(l.cell_of_index(cell)) {
            return Err(PlanError::UnsafeEndpoint { cell });
        }
    }
    Ok(())
}

/// Minimum-cost lattice path from `start` to `goal` by A*.
pub fn plan_path<F: CostField + ?Sized>(
    field: &F,
    start: usize,
    goal: usize,
    cfg: &PlannerConfig,
) -> Result<PathPlan, PlanError> {
    check_endpoints(field, start, goal)?;
    let l = *field.lattice();
    let k = cfg.rotation_bins(&l).max(1);
    let n = l.len();
    let mut g = vec![f64::INFINITY; n];
    let mut parent = vec![usize::MAX; n];
    let mut closed = vec![false; n];
    let mut heap = BinaryHeap::new();
    g[start] = 0.0;
    heap.push(Entry {
        key: heuristic(&l, start, goal),
        index: start,
    });
    let mut nb = Vec::new();
    while let Some(Entry { index, .. }) = heap.pop() {
        if closed[index] {
            continue;
        }
        closed[index] = true;
        if index == goal {
            break;
        }
        neighbors(field, index, k, &mut nb);
        for &m in &nb {
            if closed[m] {
                continue;
            }
            let cand = g[index] + edge_cost(field, m, step_length(&l, index, m));
            if cand < g[m] {
                g[m] = cand;
                parent[m] = index;
                heap.push(Entry {
                    key: cand + heuristic(&l, m, goal),
                    index: m,
                });
            }
        }
    }
    if !closed[goal] {
        return Err(PlanError::NoPath { start, goal });
    }
    let mut path = vec![goal];
    while *path.last().unwrap() != start {
        path.push(parent[*path.last().unwrap()]);
    }
    path.reverse();
    Ok(PathPlan::from_path(field, path))
}

/// Shortest collision-free xy route, ignoring view scores.
///
/// The camera turns toward the direction of travel by at most the rotation
/// limit per move, and turns in place to the goal orientation on arrival.
pub fn dijkstra_baseline<F: CostField + ?Sized>(
    field: &F,
    start: usize,
    goal: usize,
    cfg: &PlannerConfig,
) -> Result<PathPlan, PlanError> {
    check_endpoints(field, start, goal)?;
    let l = *field.lattice();
    let s = l.cell_of_index(start);
    let gcell = l.cell_of_index(goal);
    let mut prev = vec![usize::MAX; l.cells()];
    let mut seen = vec![false; l.cells()];
    let mut queue = VecDeque::from([s]);
    seen[s] = true;
    while let Some(c) = queue.pop_front() {
        if c == gcell {
            break;
        }
        let (i, j) = (c % l.nx, c / l.nx);
        for (di, dj) in [(1i64, 0i64), (-1, 0), (0, 1), (0, -1)] {
            let (ni, nj) = (i as i64 + di, j as i64 + dj);
            if ni < 0 || nj < 0 || ni >= l.nx as i64 || nj >= l.ny as i64 {
                continue;
            }
            let nc = nj as usize * l.nx + ni as usize;
            if !seen[nc] && field.safe_cell(nc) {
                seen[nc] = true;
                prev[nc] = c;
                queue.push_back(nc);
            }
        }
    }
    if !seen[gcell] {
        return Err(PlanError::NoPath { start, goal });
    }
    let mut cells = vec![gcell];
    while *cells.last().unwrap() != s {
        cells.push(prev[*cells.last().unwrap()]);
    }
    cells.reverse();

    let bins = l.theta_bins;
    let k = cfg.rotation_bins(&l);
    // signed shortest turn from `from` toward `to`, in bins
    let toward = |from: usize, to: usize| -> i64 {
        let fwd = ((to + bins - from) % bins) as i64;
        if fwd <= bins as i64 - fwd {
            fwd
        } else {
            fwd - bins as i64
        }
    };
    let rotate = |t: usize, d: i64| ((t as i64 + d).rem_euclid(bins as i64)) as usize;
    let mut t = start % bins;
    let mut path = vec![start];
    for w in cells.windows(2) {
        let (a, b) = (w[0], w[1]);
        let heading = if b == a + 1 {
            0.0
        } else if b + 1 == a {
            PI
        } else if b > a {
            PI / 2.0
        } else {
            1.5 * PI
        };
        let want = toward(t, l.theta_bin(heading));
        if k == 0 {
            for _ in 0..want.unsigned_abs() {
                t = rotate(t, want.signum());
                path.push(a * bins + t);
            }
        } else {
            t = rotate(t, want.clamp(-(k as i64), k as i64));
        }
        path.push(b * bins + t);
    }
    let want = toward(t, goal % bins);
    for _ in 0..want.unsigned_abs() {
        t = rotate(t, want.signum());
        path.push(gcell * bins + t);
    }
    Ok(PathPlan::from_path(field, path))
}

/// Total integrated cost of an arbitrary lattice path on `field`.
pub fn path_cost<F: CostField + ?Sized>(field: &F, path: &[usize]) -> f64 {
    let l = field.lattice();
    path.windows(2)
        .map(|w| edge_cost(field, w[1], step_length(l, w[0], w[1])))
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn uniform(nx: usize, ny: usize, bins: usize, f: f64) -> TableField {
        let lattice = ViewLattice::new(nx, ny, bins, 0.4);
        TableField {
            lattice,
            scores: vec![f; lattice.len()],
            obstacle: vec![0.0; lattice.cells()],
            safe: vec![true; lattice.cells()],
            eta: 500.0,
        }
    }

    #[test]
    fn rotation_limit_is_two_bins_by_default() {
        let l = ViewLattice::new(4, 4, 16, 0.4);
        let cfg = PlannerConfig::default();
        assert!((cfg.rotation_limit(&l) - 0.9308).abs() < 1e-3);
        assert_eq!(cfg.rotation_bins(&l), 2);
    }

    #[test]
    fn start_equals_goal() {
        let f = uniform(5, 5, 8, 1.0);
        let p = plan_path(&f, 17, 17, &PlannerConfig::default()).unwrap();
        assert_eq!(p.lattice_path, vec![17]);
        assert_eq!(p.total_cost, 0.0);
    }

    #[test]
    fn straight_corridor() {
        let mut f = uniform(8, 3, 8, 100.0);
        for c in 0..f.lattice.cells() {
            f.safe[c] = c / 8 == 1;
        }
        let l = f.lattice;
        let (s, g) = (l.index(0, 1, 0), l.index(7, 1, 0));
        let p = plan_path(&f, s, g, &PlannerConfig::default()).unwrap();
        assert_eq!(p.lattice_path.len(), 8);
        assert!((p.total_cost - 400.0 * 7.0 * 0.4).abs() < 1e-9);
        assert!((p.total_length - 2.8).abs() < 1e-12);
        let d = dijkstra_baseline(&f, s, g, &PlannerConfig::default()).unwrap();
        assert_eq!(d.robot_waypoints, p.robot_waypoints);
    }

    #[test]
    fn prefers_high_score_route() {
        // two equal-length detours around a blocked center; the top one scores high
        let mut f = uniform(5, 5, 8, 10.0);
        let l = f.lattice;
        f.safe[2 * 5 + 2] = false;
        for i in 0..5 {
            for t in 0..8 {
                f.scores[l.index(i, 4, t)] = 400.0;
            }
        }
        let p = plan_path(
            &f,
            l.index(0, 2, 0),
            l.index(4, 2, 0),
            &PlannerConfig::default(),
        )
        .unwrap();
        assert!(p.lattice_path.iter().any(|&i| l.coords(i).1 == 4));
        p.validate(&f, &PlannerConfig::default()).unwrap();
    }

    #[test]
    fn disconnected_endpoints() {
        let mut f = uniform(5, 1, 8, 1.0);
        f.safe[2] = false;
        let err = plan_path(&f, 0, 4 * 8, &PlannerConfig::default()).unwrap_err();
        assert!(matches!(err, PlanError::NoPath { .. }));
        assert!(matches!(
            dijkstra_baseline(&f, 0, 32, &PlannerConfig::default()),
            Err(PlanError::NoPath { .. })
        ));
        assert!(matches!(
            plan_path(&f, 16, 0, &PlannerConfig::default()),
            Err(PlanError::UnsafeEndpoint { .. })
        ));
    }

    #[test]
    fn nbv_tie_breaks() {
        let mut f = uniform(5, 5, 4, 1.0);
        let l = f.lattice;
        f.scores[l.index(4, 4, 1)] = 9.0;
        f.scores[l.index(1, 1, 2)] = 9.0;
        assert_eq!(select_nbv(&f, (0.2, 0.2), 0.5).unwrap(), l.index(1, 1, 2));
        f.scores[l.index(4, 4, 0)] = 9.5;
        assert_eq!(select_nbv(&f, (0.2, 0.2), 0.5).unwrap(), l.index(4, 4, 0));
        f.safe = vec![false; 25];
        assert!(matches!(
            select_nbv(&f, (0.2, 0.2), 0.5),
            Err(PlanError::ExplorationComplete { .. })
        ));
        let low = uniform(3, 3, 4, 0.1);
        assert!(select_nbv(&low, (0.0, 0.0), 0.5).is_err());
    }

    #[test]
    fn projection_rules() {
        let f = uniform(5, 5, 16, 1.0);
        let l = f.lattice;
        let p = PathPlan::from_path(
            &f,
            vec![l.index(1, 1, 0), l.index(1, 1, 1), l.index(1, 1, 2)],
        );
        let pr = project(&p);
        assert_eq!(pr.waypoints.len(), 1);
        assert_eq!(pr.camera.len(), 3);

        let p = PathPlan::from_path(
            &f,
            vec![
                l.index(0, 0, 0),
                l.index(1, 0, 0),
                l.index(2, 0, 0),
                l.index(2, 1, 0),
                l.index(2, 2, 0),
            ],
        );
        let pr = project(&p);
        assert_eq!(pr.waypoints.len(), 5);
        assert_eq!(pr.waypoints[2], [1.0, 0.2]);
        assert!(pr.camera.iter().all(|c| c.theta == 0.0));

        // 337.5° → 0° → 22.5°: unwrapped upward, not back through 180°
        let p = PathPlan::from_path(
            &f,
            vec![l.index(0, 0, 15), l.index(0, 0, 0), l.index(0, 0, 1)],
        );
        assert!(p.camera_schedule[1] > p.camera_schedule[0]);
        assert!((p.camera_schedule[2] - p.camera_schedule[0] - 2.0 * l.theta_step()).abs() < 1e-12);
        assert!((p.total_rotation - 2.0 * l.theta_step()).abs() < 1e-12);
    }

    #[test]
    fn dijkstra_faces_motion() {
        let f = uniform(4, 4, 16, 1.0);
        let l = f.lattice;
        let p = dijkstra_baseline(
            &f,
            l.index(0, 0, 0),
            l.index(0, 3, 8),
            &PlannerConfig::default(),
        )
        .unwrap();
        p.validate(&f, &PlannerConfig::default()).unwrap();
        assert!((p.total_length - 1.2).abs() < 1e-12);
        // the camera swings toward +y two bins per move, then turns in place
        let move_bins: Vec<usize> = p
            .lattice_path
            .windows(2)
            .filter(|w| l.cell_of_index(w[0]) != l.cell_of_index(w[1]))
            .map(|w| l.coords(w[1]).2)
            .collect();
        assert_eq!(move_bins, vec![2, 4, 4]);
        assert_eq!(p.lattice_path.len(), 1 + 3 + 4);
        assert_eq!(*p.lattice_path.last().unwrap(), l.index(0, 3, 8));
        let astar = plan_path(
            &f,
            l.index(0, 0, 0),
            l.index(0, 3, 8),
            &PlannerConfig::default(),
        )
        .unwrap();
        assert!(p.total_cost >= astar.total_cost);
    }

    #[test]
    fn plan_json_round_trip() {
        let f = uniform(4, 4, 8, 1.0);
        let p = plan_path(&f, 0, f.lattice.index(3, 2, 4), &PlannerConfig::default()).unwrap();
        let back: PathPlan = serde_json::from_str(&p.to_json()).unwrap();
        assert_eq!(back, p);
    }
}
