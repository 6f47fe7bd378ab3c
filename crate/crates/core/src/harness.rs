//! End-to-end exploration episodes, metrics and comparison sweeps.
//!
//! An episode starts with three captures fanned around the start pose, then
//! repeats: pick the best view from the field, plan a lattice path to it,
//! drive the path one cell at a time capturing a frame per move, and update
//! the field. It ends when the remaining entropy of the active region falls
//! below a fraction of its initial value, when no view is worth visiting, or
//! when the move budget runs out.

use std::collections::HashMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::entropy::{EntropyField, EntropyMode, GainModel};
use crate::error::{EpisodeError, PlanError, SceneError};
use crate::fusion::WorldMap;
use crate::grid::Connectivity;
use crate::planner::{self, CostField, PathPlan, PlannerConfig};
use crate::scene::{self, GenParams, GroundTruth, Pose, RobotBody, SceneSpec};
use crate::sensor::{self, CameraModel, SemanticModel};
use crate::vsf::{ViewLattice, ViewScoreField, VsfParams};

/// Where an episode's scene comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SceneSource {
    /// A scene JSON file.
    Path(PathBuf),
    /// An inline scene.
    Spec(SceneSpec),
    /// A procedurally generated scene.
    Generate(GenParams),
}

impl SceneSource {
    pub fn load(&self) -> Result<SceneSpec, SceneError> {
        match self {
            SceneSource::Path(p) => scene::load_scene(p),
            SceneSource::Spec(s) => {
                s.validate()?;
                Ok(s.clone())
            }
            SceneSource::Generate(g) => scene::gen_scene(g),
        }
    }

    /// Short human-readable name.
    pub fn describe(&self) -> String {
        match self {
            SceneSource::Path(p) => p.display().to_string(),
            SceneSource::Spec(_) => "inline".to_string(),
            SceneSource::Generate(g) => format!(
                "gen(rooms={},density={},size={}x{},seed={})",
                g.rooms, g.furniture_density, g.size[0], g.size[1], g.seed
            ),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PlannerMode {
    #[default]
    Field,
    Dijkstra,
}

/// Full description of one episode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeConfig {
    pub scene: SceneSource,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub planner: PlannerMode,
    #[serde(default)]
    pub entropy: EntropyMode,
    #[serde(default)]
    pub gain: GainModel,
    #[serde(default)]
    pub vsf: VsfParams,
    #[serde(default)]
    pub planner_config: PlannerConfig,
    #[serde(default)]
    pub camera: CameraModel,
    #[serde(default)]
    pub semantics: SemanticModel,
    #[serde(default)]
    pub body: RobotBody,
    #[serde(default)]
    pub connectivity: Connectivity,
    /// Stop once active entropy falls below this fraction of its initial value.
    #[serde(default = "default_termination_ratio")]
    pub termination_ratio: f64,
    /// Maximum number of lattice moves.
    #[serde(default = "default_step_budget")]
    pub step_budget: usize,
    /// Frames captured per lattice move.
    #[serde(default = "default_cadence")]
    pub scan_cadence: usize,
    /// Replan when the goal's score drops below this fraction of its value
    /// at planning time.
    #[serde(default = "default_replan_drop")]
    pub replan_drop: f64,
    /// Standard deviation of xy noise added to capture poses, meters.
    #[serde(default)]
    pub pose_jitter: f64,
    /// Captures from one view after which it is no longer selected as a goal.
    #[serde(default = "default_max_view_captures")]
    pub max_view_captures: usize,
    /// Stop as soon as this many object voxels are correctly labeled.
    #[serde(default)]
    pub stop_at_correct: Option<usize>,
    /// Stop as soon as this fraction of the scene's object voxels is
    /// correctly labeled.
    #[serde(default)]
    pub stop_at_fraction: Option<f64>,
    /// Treat columns inside the sensor's minimum range around every pose the
    /// robot has stood on as free. Without it the blind disc around the
    /// robot stays Unknown forever and blocks every move.
    #[serde(default = "default_true")]
    pub blind_zone_free: bool,
    /// Cross-check incremental state against full rebuilds every cycle.
    #[serde(default)]
    pub audit: bool,
}

fn default_max_view_captures() -> usize {
    3
}

fn default_true() -> bool {
    true
}

fn default_termination_ratio() -> f64 {
    0.05
}

fn default_step_budget() -> usize {
    400
}

fn default_cadence() -> usize {
    1
}

fn default_replan_drop() -> f64 {
    0.5
}

impl EpisodeConfig {
    pub fn new(scene: SceneSource, seed: u64) -> Self {
        Self {
            scene,
            seed,
            planner: PlannerMode::Field,
            entropy: EntropyMode::Combined,
            gain: GainModel::default(),
            vsf: VsfParams::default(),
            planner_config: PlannerConfig::default(),
            camera: CameraModel::default(),
            semantics: SemanticModel::default(),
            body: RobotBody::default(),
            connectivity: Connectivity::Six,
            termination_ratio: default_termination_ratio(),
            step_budget: default_step_budget(),
            scan_cadence: default_cadence(),
            replan_drop: default_replan_drop(),
            pose_jitter: 0.0,
            max_view_captures: default_max_view_captures(),
            stop_at_correct: None,
            stop_at_fraction: None,
            blind_zone_free: true,
            audit: false,
        }
    }

    pub fn validate(&self) -> Result<(), EpisodeError> {
        let cfg = |m: String| EpisodeError::Config(m);
        if self.step_budget < 1 {
            return Err(cfg("step_budget must be at least 1".into()));
        }
        if self.scan_cadence < 1 {
            return Err(cfg("scan_cadence must be at least 1".into()));
        }
        if self.max_view_captures < 1 {
            return Err(cfg("max_view_captures must be at least 1".into()));
        }
        if !(self.termination_ratio >= 0.0 && self.termination_ratio < 1.0) {
            return Err(cfg("termination_ratio must lie in [0, 1)".into()));
        }
        if !(0.0..=1.0).contains(&self.replan_drop) {
            return Err(cfg("replan_drop must lie in [0, 1]".into()));
        }
        if self
            .stop_at_fraction
            .is_some_and(|f| !(f > 0.0 && f <= 1.0))
        {
            return Err(cfg("stop_at_fraction must lie in (0, 1]".into()));
        }
        if !(self.pose_jitter >= 0.0) {
            return Err(cfg("pose_jitter must be non-negative".into()));
        }
        self.camera
            .validate()
            .map_err(|e| cfg(format!("camera: {e}")))?;
        self.gain
            .validate()
            .map_err(|e| cfg(format!("gain: {e}")))?;
        self.entropy
            .apply(self.gain.weights)
            .validate()
            .map_err(|e| cfg(format!("gain: {e}")))?;
        self.vsf.validate().map_err(|e| cfg(e.to_string()))?;
        let lattice = ViewLattice::new(1, 1, self.vsf.theta_bins, self.vsf.xy_resolution);
        self.planner_config
            .validate(&lattice)
            .map_err(|e| cfg(format!("planner: {e}")))?;
        let s = &self.semantics;
        if !(0.0 < s.q_min
            && s.q_min <= s.q_max
            && s.q_max <= 1.0
            && (0.0..=1.0).contains(&s.swap_prob))
        {
            return Err(cfg(
                "semantics: need 0 < q_min ≤ q_max ≤ 1 and swap_prob in [0, 1]".into(),
            ));
        }
        Ok(())
    }

    /// Gain model with the entropy mode's weights applied.
    pub fn effective_gain(&self) -> GainModel {
        GainModel {
            weights: self.entropy.apply(self.gain.weights),
            ..self.gain
        }
    }
}

/// One row of the metrics timeline, written after every lattice move.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsRow {
    pub step: usize,
    pub cycle: usize,
    pub sim_time: f64,
    pub distance: f64,
    pub rotation: f64,
    pub correctly_labeled_voxels: usize,
    pub observed_voxels: usize,
    pub labeled_accuracy: f64,
    pub identified_objects: usize,
    pub entropy_total: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct MetricsTimeline {
    pub rows: Vec<MetricsRow>,
}

impl MetricsTimeline {
    pub fn last(&self) -> Option<&MetricsRow> {
        self.rows.last()
    }

    /// First row reaching `target` correctly labeled voxels.
    pub fn first_reaching(&self, target: usize) -> Option<&MetricsRow> {
        self.rows
            .iter()
            .find(|r| r.correctly_labeled_voxels >= target)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for r in &self.rows {
            w.serialize(r)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("csv is utf-8")
    }
}

/// Why an episode stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Termination {
    EntropyThreshold,
    ExplorationComplete,
    NoReachableView,
    StepBudget,
    TargetReached,
}

/// Object-voxel labeling score of a map against the ground truth.
#[derive(Debug, Clone)]
pub struct LabelScorer {
    surface: Vec<usize>,
    truth: Vec<u16>,
    objects: Vec<Vec<usize>>,
}

impl LabelScorer {
    pub fn new(gt: &GroundTruth) -> Self {
        let surface = gt.object_surface();
        let truth = surface.iter().map(|&v| gt.label[v]).collect();
        let objects = gt.objects().into_iter().map(|o| o.surface).collect();
        Self {
            surface,
            truth,
            objects,
        }
    }

    /// Observable object voxels.
    pub fn object_voxels(&self) -> usize {
        self.surface.len()
    }

    pub fn object_count(&self) -> usize {
        self.objects.len()
    }

    fn correct(map: &WorldMap, v: usize, truth: u16) -> bool {
        map.belief(v)
            .is_some_and(|b| b.sem.is_some() && b.label + 1 == truth)
    }

    /// `(correct, labeled)` over observable object voxels.
    pub fn score(&self, map: &WorldMap) -> (usize, usize) {
        let mut correct = 0;
        let mut labeled = 0;
        for (&v, &t) in self.surface.iter().zip(&self.truth) {
            if let Some(b) = map.belief(v) {
                if b.sem.is_some() {
                    labeled += 1;
                    if b.label + 1 == t {
                        correct += 1;
                    }
                }
            }
        }
        (correct, labeled)
    }

    /// Objects with at least half their observable voxels correctly labeled.
    pub fn identified(&self, map: &WorldMap, gt: &GroundTruth) -> usize {
        self.objects
            .iter()
            .filter(|surface| {
                let truth = gt.label[surface[0]];
                let ok = surface
                    .iter()
                    .filter(|&&v| Self::correct(map, v, gt.label[v]) && gt.label[v] == truth)
                    .count();
                2 * ok >= surface.len()
            })
            .count()
    }
}

/// Ground-truth objects counted as identified in `map`.
pub fn identified_objects(map: &WorldMap, gt: &GroundTruth) -> usize {
    LabelScorer::new(gt).identified(map, gt)
}

/// Everything an episode produces.
#[derive(Debug, Clone)]
pub struct EpisodeResult {
    pub timeline: MetricsTimeline,
    /// Plans in the order they were made.
    pub plans: Vec<PathPlan>,
    pub termination: Termination,
    pub map: WorldMap,
    pub entropy: EntropyField,
    pub field: ViewScoreField,
    pub object_voxels: usize,
    pub object_count: usize,
}

struct Episode<'a> {
    cfg: &'a EpisodeConfig,
    gt: GroundTruth,
    scorer: LabelScorer,
    map: WorldMap,
    entropy: EntropyField,
    robot: Pose,
    heading: f64,
    frames: u64,
    distance: f64,
    rotation: f64,
    step: usize,
    cycle: usize,
    touched: Vec<usize>,
    touched_mark: Vec<bool>,
    rows: Vec<MetricsRow>,
}

impl Episode<'_> {
    /// Captures the configured number of frames; false when none returned
    /// any data.
    fn capture(&mut self, pose: Pose) -> Result<bool, EpisodeError> {
        let mut any = false;
        for _ in 0..self.cfg.scan_cadence {
            let mut rng = sensor::frame_rng(self.cfg.seed, self.frames, &pose);
            let mut at = pose;
            if self.cfg.pose_jitter > 0.0 {
                let n = Normal::new(0.0, self.cfg.pose_jitter).expect("finite jitter");
                let mut jr =
                    ChaCha8Rng::seed_from_u64(self.cfg.seed ^ 0x6a09_e667_f3bc_c908 ^ self.frames);
                let cand = Pose::new(
                    pose.x + n.sample(&mut jr),
                    pose.y + n.sample(&mut jr),
                    pose.theta,
                );
                if sensor::check_pose(&self.gt, &cand, &self.cfg.camera).is_ok() {
                    at = cand;
                }
            }
            self.frames += 1;
            let frame = sensor::capture(
                &self.gt,
                &at,
                &self.cfg.camera,
                &self.cfg.semantics,
                &mut rng,
            )?;
            any |= !frame.hits.is_empty() || !frame.misses.is_empty();
            let cs = self.map.integrate_frame(&frame);
            self.entropy.apply(&self.map, &cs);
            for v in cs.touched_voxels() {
                if !self.touched_mark[v] {
                    self.touched_mark[v] = true;
                    self.touched.push(v);
                }
            }
        }
        Ok(any)
    }

    fn take_touched(&mut self) -> Vec<usize> {
        let t = std::mem::take(&mut self.touched);
        for &v in &t {
            self.touched_mark[v] = false;
        }
        t
    }

    fn turn_to(&mut self, theta: f64) {
        self.rotation += planner::wrap_angle(theta - self.heading).abs();
        self.heading = theta;
    }

    fn record(&mut self) {
        let (correct, labeled) = self.scorer.score(&self.map);
        self.rows.push(MetricsRow {
            step: self.step,
            cycle: self.cycle,
            sim_time: self
                .cfg
                .planner_config
                .sim_time(self.distance, self.rotation),
            distance: self.distance,
            rotation: self.rotation,
            correctly_labeled_voxels: correct,
            observed_voxels: self.map.observed_count(),
            labeled_accuracy: if labeled == 0 {
                0.0
            } else {
                correct as f64 / labeled as f64
            },
            identified_objects: self.scorer.identified(&self.map, &self.gt),
            entropy_total: self.entropy.total(),
        });
    }

    fn occupy(&mut self, pose: Pose) {
        let mut r = self.cfg.body.radius;
        if self.cfg.blind_zone_free {
            r = r.max(self.cfg.camera.range_min);
        }
        self.map.mark_traversed(pose.x, pose.y, r);
    }

    fn target_reached(&self) -> bool {
        let Some(row) = self.rows.last() else {
            return false;
        };
        let by_count = self
            .cfg
            .stop_at_correct
            .is_some_and(|t| row.correctly_labeled_voxels >= t);
        let by_fraction = self.cfg.stop_at_fraction.is_some_and(|f| {
            row.correctly_labeled_voxels >= (f * self.scorer.object_voxels() as f64).ceil() as usize
        });
        by_count || by_fraction
    }
}

/// Lattice cell nearest `start` whose footprint is clear in the ground truth.
fn snap_start(
    gt: &GroundTruth,
    lattice: &ViewLattice,
    start: &Pose,
    body: &RobotBody,
    camera: &CameraModel,
) -> Option<Pose> {
    let mut best: Option<(f64, usize)> = None;
    for cell in 0..lattice.cells() {
        let (x, y) = lattice.cell_center(cell % lattice.nx, cell / lattice.nx);
        let probe = Pose::new(x, y, start.theta);
        if gt.footprint_blocked(x, y, body) || sensor::check_pose(gt, &probe, camera).is_err() {
            continue;
        }
        let d = (x - start.x).hypot(y - start.y);
        if best.is_none_or(|(bd, _)| d < bd) {
            best = Some((d, cell));
        }
    }
    best.map(|(_, cell)| {
        let (x, y) = lattice.cell_center(cell % lattice.nx, cell / lattice.nx);
        Pose::new(x, y, start.theta)
    })
}

/// A field with some cells and views hidden from NBV selection.
struct Excluding<'a> {
    field: &'a ViewScoreField,
    excluded: &'a [bool],
    exhausted: &'a [bool],
}

impl CostField for Excluding<'_> {
    fn lattice(&self) -> &ViewLattice {
        &self.field.lattice
    }

    fn view_score(&self, index: usize) -> f64 {
        if self.excluded[self.field.lattice.cell_of_index(index)] || self.exhausted[index] {
            f64::NEG_INFINITY
        } else {
            self.field.score(index)
        }
    }

    fn obstacle(&self, cell: usize) -> f64 {
        self.field.obstacle(cell)
    }

    fn safe_cell(&self, cell: usize) -> bool {
        self.field.safe_cell(cell)
    }

    fn eta(&self) -> f64 {
        self.field.params.eta
    }
}

/// Runs one episode to termination.
pub fn run_episode(cfg: &EpisodeConfig) -> Result<EpisodeResult, EpisodeError> {
    cfg.validate()?;
    let spec = cfg.scene.load()?;
    let gt = scene::rasterize(&spec);
    run_on_ground_truth(cfg, gt, spec.start_pose)
}

/// Runs one episode on an already rasterized scene.
pub fn run_on_ground_truth(
    cfg: &EpisodeConfig,
    gt: GroundTruth,
    start: Pose,
) -> Result<EpisodeResult, EpisodeError> {
    cfg.validate()?;
    let grid = gt.grid;
    let lattice = ViewLattice::for_grid(&grid, cfg.vsf.xy_resolution, cfg.vsf.theta_bins)?;
    let model = cfg.effective_gain();
    let map = WorldMap::with_connectivity(grid, gt.label_count, cfg.connectivity);
    let entropy = EntropyField::build(&map, model);
    let start = snap_start(&gt, &lattice, &start, &cfg.body, &cfg.camera).ok_or_else(|| {
        SceneError::Invalid {
            field: "start_pose".into(),
            reason: "no lattice cell with a clear footprint".into(),
        }
    })?;
    let scorer = LabelScorer::new(&gt);
    let n = grid.dims.len();
    let mut ep = Episode {
        cfg,
        scorer,
        map,
        entropy,
        robot: start,
        heading: 0.0,
        frames: 0,
        distance: 0.0,
        rotation: 0.0,
        step: 0,
        cycle: 0,
        touched: Vec::new(),
        touched_mark: vec![false; n],
        rows: Vec::new(),
        gt,
    };

    // initial fan of captures
    for deg in [0.0f64, 120.0, 240.0] {
        let theta = deg.to_radians();
        ep.turn_to(theta);
        ep.capture(Pose::new(start.x, start.y, theta))?;
    }
    ep.occupy(start);
    let bin_theta = lattice.theta(lattice.theta_bin(ep.heading));
    ep.turn_to(bin_theta);
    ep.robot = Pose::new(start.x, start.y, bin_theta);
    ep.record();
    ep.take_touched();

    let mut field = ViewScoreField::build(
        &ep.map,
        &ep.entropy,
        ep.robot,
        &cfg.camera,
        &cfg.body,
        &cfg.vsf,
    )?;
    let initial_active = ep.entropy.active_total(&ep.map);
    let mut plans = Vec::new();
    // views not worth selecting again: an empty capture, or captured too often
    let mut exhausted = vec![false; field.lattice.len()];
    let mut captures = vec![0usize; field.lattice.len()];

    let termination = 'episode: loop {
        if ep.target_reached() {
            break Termination::TargetReached;
        }
        if ep.step >= cfg.step_budget {
            break Termination::StepBudget;
        }
        if ep.entropy.active_total(&ep.map) < cfg.termination_ratio * initial_active {
            break Termination::EntropyThreshold;
        }
        ep.cycle += 1;
        let here = field
            .lattice
            .index_of(&ep.robot)
            .expect("robot stays on the lattice");

        // best reachable view
        let mut excluded = vec![false; field.lattice.cells()];
        let plan = loop {
            let view = Excluding {
                field: &field,
                excluded: &excluded,
                exhausted: &exhausted,
            };
            let goal = match planner::select_nbv(
                &view,
                (ep.robot.x, ep.robot.y),
                cfg.planner_config.min_view_score,
            ) {
                Ok(g) => g,
                Err(PlanError::ExplorationComplete { .. }) => {
                    if excluded.iter().any(|&e| e) {
                        break 'episode Termination::NoReachableView;
                    }
                    break 'episode Termination::ExplorationComplete;
                }
                Err(e) => return Err(e.into()),
            };
            let planned = match cfg.planner {
                PlannerMode::Field => planner::plan_path(&field, here, goal, &cfg.planner_config),
                PlannerMode::Dijkstra => {
                    planner::dijkstra_baseline(&field, here, goal, &cfg.planner_config)
                }
            };
            match planned {
                Ok(p) => break p,
                Err(PlanError::NoPath { .. }) => excluded[field.lattice.cell_of_index(goal)] = true,
                Err(e) => return Err(e.into()),
            }
        };
        debug_assert!(plan.validate(&field, &cfg.planner_config).is_ok());
        let goal = plan.goal();
        let goal_numerator = field.numerator(goal);
        plans.push(plan.clone());

        if plan.lattice_path.len() == 1 {
            // already at the best view: look again
            ep.step += 1;
            captures[here] += 1;
            if !ep.capture(ep.robot)? || captures[here] >= cfg.max_view_captures {
                exhausted[here] = true;
            }
            field.refresh_safety(&ep.map, ep.robot);
            ep.record();
        }
        for k in 1..plan.lattice_path.len() {
            let idx = plan.lattice_path[k];
            let cell = field.lattice.cell_of_index(idx);
            if !field.is_safe_cell(cell) {
                log::debug!(
                    "cycle {}: planned cell {cell} became unsafe, replanning",
                    ep.cycle
                );
                break;
            }
            let next = field.lattice.pose(idx);
            if ep.gt.footprint_blocked(next.x, next.y, &cfg.body)
                || sensor::check_pose(&ep.gt, &next, &cfg.camera).is_err()
            {
                log::debug!("cycle {}: cell {cell} is physically blocked", ep.cycle);
                field.block_cell(cell);
                break;
            }
            if field.lattice.cell_of_index(plan.lattice_path[k - 1]) != cell {
                ep.distance += field.lattice.xy_resolution;
            }
            ep.turn_to(next.theta);
            ep.robot = next;
            ep.step += 1;
            ep.occupy(next);
            captures[idx] += 1;
            if !ep.capture(next)? || captures[idx] >= cfg.max_view_captures {
                exhausted[idx] = true;
            }
            field.refresh_safety(&ep.map, ep.robot);
            ep.record();
            if ep.step >= cfg.step_budget || ep.target_reached() {
                break;
            }
            if k + 1 < plan.lattice_path.len() {
                let now = field.fresh_numerator(&ep.map, &ep.entropy, goal);
                if now < cfg.replan_drop * goal_numerator {
                    log::debug!("cycle {}: goal score collapsed, replanning", ep.cycle);
                    break;
                }
            }
        }
        let touched = ep.take_touched();
        field.update_touched(&ep.map, &ep.entropy, &touched, ep.robot);
        if cfg.audit {
            audit_state(&ep.map, &ep.entropy, &field, ep.robot, cfg)?;
        }
    };
    let touched = ep.take_touched();
    if !touched.is_empty() {
        field.update_touched(&ep.map, &ep.entropy, &touched, ep.robot);
    }
    log::info!(
        "episode finished after {} moves in {} cycles: {:?}",
        ep.step,
        ep.cycle,
        termination
    );
    Ok(EpisodeResult {
        timeline: MetricsTimeline { rows: ep.rows },
        plans,
        termination,
        object_voxels: ep.scorer.object_voxels(),
        object_count: ep.scorer.object_count(),
        map: ep.map,
        entropy: ep.entropy,
        field,
    })
}

fn audit_state(
    map: &WorldMap,
    entropy: &EntropyField,
    field: &ViewScoreField,
    robot: Pose,
    cfg: &EpisodeConfig,
) -> Result<(), EpisodeError> {
    let fail = |what: &str, e: String| EpisodeError::Config(format!("audit failed ({what}): {e}"));
    map.audit_sample(0.01, map.observed_count() as u64)
        .map_err(|e| fail("map", e))?;
    entropy.audit(map).map_err(|e| fail("entropy", e))?;
    let mut rebuilt = ViewScoreField::build(map, entropy, robot, &cfg.camera, &cfg.body, &cfg.vsf)?;
    for (cell, &b) in field.blocked_cells().iter().enumerate() {
        if b {
            rebuilt.block_cell(cell);
        }
    }
    field.diff(&rebuilt).map_err(|e| fail("field", e))
}

/// One axis of a comparison: a named override of planner and entropy mode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Variant {
    pub name: String,
    #[serde(default)]
    pub planner: Option<PlannerMode>,
    #[serde(default)]
    pub entropy: Option<EntropyMode>,
}

/// Cross product of variants, scenes and seeds over a shared base config.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonMatrix {
    pub base: EpisodeConfig,
    pub scenes: Vec<SceneSource>,
    pub seeds: Vec<u64>,
    pub variants: Vec<Variant>,
    /// Fraction of observable object voxels used as the labeling target.
    #[serde(default = "default_target_fraction")]
    pub target_fraction: f64,
    /// End each run once it reaches the target instead of running to its
    /// own termination.
    #[serde(default)]
    pub stop_at_target: bool,
}

fn default_target_fraction() -> f64 {
    0.8
}

impl ComparisonMatrix {
    pub fn config_for(&self, variant: &Variant, scene: &SceneSource, seed: u64) -> EpisodeConfig {
        let mut cfg = self.base.clone();
        cfg.scene = scene.clone();
        cfg.seed = seed;
        if let Some(p) = variant.planner {
            cfg.planner = p;
        }
        if let Some(e) = variant.entropy {
            cfg.entropy = e;
        }
        if self.stop_at_target {
            cfg.stop_at_fraction = Some(self.target_fraction);
        }
        cfg
    }
}

/// Outcome of one cell of a comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub variant: String,
    pub scene: usize,
    pub seed: u64,
    pub status: String,
    pub termination: Option<Termination>,
    pub steps: usize,
    pub time_s: f64,
    pub distance_m: f64,
    pub correct: usize,
    pub accuracy: f64,
    pub identified: usize,
    pub object_voxels: usize,
    pub target: usize,
    pub reached_target: bool,
    /// Time and distance when the target was reached, or the final values
    /// when it never was.
    pub time_to_target_s: f64,
    pub distance_to_target_m: f64,
}

/// Comparison results: one record per run plus every run's timeline.
#[derive(Debug, Clone, Default)]
pub struct Comparison {
    pub records: Vec<RunRecord>,
    pub curves: Vec<(usize, MetricsTimeline)>,
}

/// Summarizes a finished episode against a labeling target fraction.
pub fn run_record(
    variant: &str,
    scene: usize,
    seed: u64,
    result: &EpisodeResult,
    target_fraction: f64,
) -> RunRecord {
    let last = result
        .timeline
        .last()
        .expect("episodes record an initial row");
    let target = (target_fraction * result.object_voxels as f64).ceil() as usize;
    let hit = result.timeline.first_reaching(target);
    RunRecord {
        variant: variant.to_string(),
        scene,
        seed,
        status: "ok".into(),
        termination: Some(result.termination),
        steps: last.step,
        time_s: last.sim_time,
        distance_m: last.distance,
        correct: last.correctly_labeled_voxels,
        accuracy: last.labeled_accuracy,
        identified: last.identified_objects,
        object_voxels: result.object_voxels,
        target,
        reached_target: hit.is_some(),
        time_to_target_s: hit.unwrap_or(last).sim_time,
        distance_to_target_m: hit.unwrap_or(last).distance,
    }
}

/// Runs every (variant, scene, seed) combination. Failed runs are recorded
/// with their error and do not stop the sweep.
pub fn compare(matrix: &ComparisonMatrix) -> Comparison {
    let mut out = Comparison::default();
    for variant in &matrix.variants {
        for (si, scene) in matrix.scenes.iter().enumerate() {
            for &seed in &matrix.seeds {
                let cfg = matrix.config_for(variant, scene, seed);
                match run_episode(&cfg) {
                    Ok(result) => {
                        out.records.push(run_record(
                            &variant.name,
                            si,
                            seed,
                            &result,
                            matrix.target_fraction,
                        ));
                        out.curves.push((out.records.len() - 1, result.timeline));
                    }
                    Err(e) => {
                        log::warn!("run {} scene {si} seed {seed} failed: {e}", variant.name);
                        out.records.push(RunRecord {
                            variant: variant.name.clone(),
                            scene: si,
                            seed,
                            status: format!("failed: {e}"),
                            termination: None,
                            steps: 0,
                            time_s: f64::NAN,
                            distance_m: f64::NAN,
                            correct: 0,
                            accuracy: f64::NAN,
                            identified: 0,
                            object_voxels: 0,
                            target: 0,
                            reached_target: false,
                            time_to_target_s: f64::NAN,
                            distance_to_target_m: f64::NAN,
                        });
                    }
                }
            }
        }
    }
    out
}

/// Averages over successful runs of one variant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub variant: String,
    /// Scene index, or `None` for the average over scenes.
    pub scene: Option<usize>,
    pub runs: usize,
    pub time_s: f64,
    pub distance_m: f64,
    pub time_to_target_s: f64,
    pub distance_to_target_m: f64,
    pub accuracy: f64,
    pub identified: f64,
    pub reached_target: usize,
}

impl Comparison {
    /// Per-scene means for each variant, then each variant's mean of those.
    pub fn summary(&self) -> Vec<SummaryRow> {
        let mut variants: Vec<&str> = Vec::new();
        for r in &self.records {
            if !variants.contains(&r.variant.as_str()) {
                variants.push(&r.variant);
            }
        }
        let mut out = Vec::new();
        for v in variants {
            let mut per_scene: Vec<(usize, Vec<&RunRecord>)> = Vec::new();
            let mut by_scene: HashMap<usize, usize> = HashMap::new();
            for r in self
                .records
                .iter()
                .filter(|r| r.variant == v && r.status == "ok")
            {
                let slot = *by_scene.entry(r.scene).or_insert_with(|| {
                    per_scene.push((r.scene, Vec::new()));
                    per_scene.len() - 1
                });
                per_scene[slot].1.push(r);
            }
            let rows: Vec<SummaryRow> = per_scene
                .iter()
                .map(|(scene, rs)| {
                    let mean = |f: fn(&RunRecord) -> f64| {
                        rs.iter().map(|r| f(r)).sum::<f64>() / rs.len() as f64
                    };
                    SummaryRow {
                        variant: v.to_string(),
                        scene: Some(*scene),
                        runs: rs.len(),
                        time_s: mean(|r| r.time_s),
                        distance_m: mean(|r| r.distance_m),
                        time_to_target_s: mean(|r| r.time_to_target_s),
                        distance_to_target_m: mean(|r| r.distance_to_target_m),
                        accuracy: mean(|r| r.accuracy),
                        identified: mean(|r| r.identified as f64),
                        reached_target: rs.iter().filter(|r| r.reached_target).count(),
                    }
                })
                .collect();
            if !rows.is_empty() {
                let k = rows.len() as f64;
                let avg = |f: fn(&SummaryRow) -> f64| rows.iter().map(f).sum::<f64>() / k;
                let overall = SummaryRow {
                    variant: v.to_string(),
                    scene: None,
                    runs: rows.iter().map(|r| r.runs).sum(),
                    time_s: avg(|r| r.time_s),
                    distance_m: avg(|r| r.distance_m),
                    time_to_target_s: avg(|r| r.time_to_target_s),
                    distance_to_target_m: avg(|r| r.distance_to_target_m),
                    accuracy: avg(|r| r.accuracy),
                    identified: avg(|r| r.identified),
                    reached_target: rows.iter().map(|r| r.reached_target).sum(),
                };
                out.extend(rows);
                out.push(overall);
            }
        }
        out
    }

    /// Writes `runs.csv`, `summary.csv` and `curves.csv` into `dir`.
    pub fn write(&self, dir: &Path) -> Result<(), EpisodeError> {
        std::fs::create_dir_all(dir)?;
        let mut w = csv::Writer::from_path(dir.join("runs.csv"))?;
        for r in &self.records {
            w.serialize(r)?;
        }
        w.flush()?;
        let mut w = csv::Writer::from_path(dir.join("summary.csv"))?;
        for r in self.summary() {
            w.serialize(r)?;
        }
        w.flush()?;
        let mut w = csv::Writer::from_path(dir.join("curves.csv"))?;
        w.write_record([
            "variant",
            "scene",
            "seed",
            "step",
            "sim_time",
            "distance",
            "correctly_labeled_voxels",
            "labeled_accuracy",
            "identified_objects",
            "entropy_total",
        ])?;
        for (i, timeline) in &self.curves {
            let r = &self.records[*i];
            for row in &timeline.rows {
                w.write_record([
                    r.variant.clone(),
                    r.scene.to_string(),
                    r.seed.to_string(),
                    row.step.to_string(),
                    row.sim_time.to_string(),
                    row.distance.to_string(),
                    row.correctly_labeled_voxels.to_string(),
                    row.labeled_accuracy.to_string(),
                    row.identified_objects.to_string(),
                    row.entropy_total.to_string(),
                ])?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

/// Poses of a scripted scan: lattice cells visited in a square spiral out
/// from the start, skipping cells whose footprint is blocked, with the
/// heading advancing by `turn_bins` θ bins per pose.
pub fn spiral_poses(
    gt: &GroundTruth,
    lattice: &ViewLattice,
    start: &Pose,
    body: &RobotBody,
    camera: &CameraModel,
    turn_bins: usize,
) -> Vec<Pose> {
    let Some((ci, cj)) = lattice.cell_at(start.x, start.y) else {
        return Vec::new();
    };
    let (ci, cj) = (ci as i64, cj as i64);
    let reach = lattice.nx.max(lattice.ny) as i64;
    let mut cells = vec![(ci, cj)];
    let (mut x, mut y) = (ci, cj);
    let mut leg = 1;
    let dirs = [(1i64, 0i64), (0, 1), (-1, 0), (0, -1)];
    let mut d = 0;
    while leg <= 2 * reach + 1 {
        for _ in 0..2 {
            for _ in 0..leg {
                x += dirs[d].0;
                y += dirs[d].1;
                cells.push((x, y));
            }
            d = (d + 1) % 4;
        }
        leg += 1;
    }
    let mut poses = Vec::new();
    let mut t = lattice.theta_bin(start.theta);
    for (i, j) in cells {
        if i < 0 || j < 0 || i >= lattice.nx as i64 || j >= lattice.ny as i64 {
            continue;
        }
        let (px, py) = lattice.cell_center(i as usize, j as usize);
        let pose = Pose::new(px, py, lattice.theta(t));
        if gt.footprint_blocked(px, py, body) || sensor::check_pose(gt, &pose, camera).is_err() {
            continue;
        }
        poses.push(pose);
        t = (t + turn_bins) % lattice.theta_bins;
    }
    poses
}

/// Captures a frame at each pose and returns global entropy before the
/// first frame and after each one.
pub fn scripted_scan(
    gt: &GroundTruth,
    poses: &[Pose],
    cfg: &EpisodeConfig,
) -> Result<Vec<f64>, EpisodeError> {
    let mut map = WorldMap::with_connectivity(gt.grid, gt.label_count, cfg.connectivity);
    let mut entropy = EntropyField::build(&map, cfg.effective_gain());
    let mut totals = vec![entropy.total()];
    for (k, pose) in poses.iter().enumerate() {
        let mut rng = sensor::frame_rng(cfg.seed, k as u64, pose);
        let frame = sensor::capture(gt, pose, &cfg.camera, &cfg.semantics, &mut rng)?;
        let cs = map.integrate_frame(&frame);
        entropy.apply(&map, &cs);
        totals.push(entropy.total());
    }
    Ok(totals)
}
