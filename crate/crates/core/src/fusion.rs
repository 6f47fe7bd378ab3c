//! The robot's belief map.
//!
//! Each observed voxel accumulates occupancy support: +0.85 per frame that
//! hits it and −0.4 per frame whose ray passes through it. Support is kept as
//! integer counts so the sum is exact and independent of frame order. Label
//! distributions from the segmentation output are fused multiplicatively.
//! Every update reports an exact [`ChangeSet`] so downstream fields can be
//! maintained incrementally.

use serde::{Deserialize, Serialize};

use crate::grid::{Connectivity, GridSpec};
use crate::sensor::SensorFrame;

/// Support added by a frame whose ray ends on the voxel.
pub const POSITIVE_SUPPORT: f64 = 0.85;
/// Support added by a frame whose ray passes through the voxel.
pub const NEGATIVE_SUPPORT: f64 = -0.4;
/// `sigma ≥` this marks a voxel occupied (one unanswered hit).
pub const OCCUPIED_THRESHOLD: f64 = 0.85;
/// `sigma ≤` this marks an observed voxel free (one unanswered miss).
pub const FREE_THRESHOLD: f64 = -0.4;
/// Observation counts saturate here.
pub const COUNT_CAP: u32 = 1_000_000;

// support constants in hundredths, for exact accumulation
const POSITIVE_CENTI: i64 = 85;
const NEGATIVE_CENTI: i64 = -40;

/// Belief state of a voxel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VoxelState {
    Unknown,
    Free,
    Occupied,
}

/// Classifies accumulated support. Monotone in `sigma`.
pub fn classify(sigma: f64, observed: bool) -> VoxelState {
    if !observed {
        VoxelState::Unknown
    } else if sigma >= OCCUPIED_THRESHOLD {
        VoxelState::Occupied
    } else if sigma <= FREE_THRESHOLD {
        VoxelState::Free
    } else {
        VoxelState::Unknown
    }
}

/// Exact support sum for the given counts.
pub fn support(pos_count: u32, neg_count: u32) -> f64 {
    (POSITIVE_CENTI * pos_count as i64 + NEGATIVE_CENTI * neg_count as i64) as f64 / 100.0
}

/// Fuses a label observation into a prior by normalized product.
///
/// An absent prior returns the observation. If every product underflows the
/// two distributions are averaged instead.
pub fn fuse_semantic(prior: Option<&[f64]>, obs: &[f64]) -> Vec<f64> {
    let Some(prior) = prior else {
        return obs.to_vec();
    };
    debug_assert_eq!(prior.len(), obs.len());
    let mut out: Vec<f64> = prior.iter().zip(obs).map(|(p, o)| p * o).collect();
    let total: f64 = out.iter().sum();
    if total < 1e-300 {
        log::warn!("semantic fusion underflow; averaging prior and observation");
        out = prior.iter().zip(obs).map(|(p, o)| 0.5 * (p + o)).collect();
        let total: f64 = out.iter().sum();
        out.iter_mut().for_each(|x| *x /= total);
        return out;
    }
    out.iter_mut().for_each(|x| *x /= total);
    out
}

/// Argmax with lowest-index tie-break, and the max value.
pub fn argmax(dist: &[f64]) -> (u16, f64) {
    let mut best = 0;
    for (i, &p) in dist.iter().enumerate() {
        if p > dist[best] {
            best = i;
        }
    }
    (best as u16, dist[best])
}

/// Accumulated evidence for one observed voxel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VoxelBelief {
    pub sigma: f64,
    pub pos_count: u32,
    pub neg_count: u32,
    /// Label distribution over the `K` classes; absent until first labeled hit.
    pub sem: Option<Vec<f64>>,
    /// Zero-based class index of the argmax of `sem`.
    pub label: u16,
    pub confidence: f64,
}

impl VoxelBelief {
    fn new() -> Self {
        Self {
            sigma: 0.0,
            pos_count: 0,
            neg_count: 0,
            sem: None,
            label: 0,
            confidence: 0.0,
        }
    }

    fn set_sem(&mut self, dist: Vec<f64>) {
        let (label, confidence) = argmax(&dist);
        self.label = label;
        self.confidence = confidence;
        self.sem = Some(dist);
    }
}

/// Compact view of a voxel's belief, used in change sets.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BeliefSummary {
    pub observed: bool,
    pub sigma: f64,
    pub state: VoxelState,
    /// Zero-based class index when a label distribution exists.
    pub label: Option<u16>,
    pub confidence: f64,
}

impl BeliefSummary {
    pub const UNOBSERVED: BeliefSummary = BeliefSummary {
        observed: false,
        sigma: 0.0,
        state: VoxelState::Unknown,
        label: None,
        confidence: 0.0,
    };
}

/// One changed voxel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VoxelChange {
    pub index: usize,
    pub old: BeliefSummary,
    pub new: BeliefSummary,
}

/// Exact record of what an update changed.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ChangeSet {
    /// Voxels whose belief changed, in first-touch order.
    pub changes: Vec<VoxelChange>,
    pub frontier_added: Vec<usize>,
    pub frontier_removed: Vec<usize>,
}

impl ChangeSet {
    pub fn is_empty(&self) -> bool {
        self.changes.is_empty()
            && self.frontier_added.is_empty()
            && self.frontier_removed.is_empty()
    }

    /// Every voxel whose belief or frontier flag changed, sorted, deduplicated.
    pub fn touched_voxels(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self
            .changes
            .iter()
            .map(|c| c.index)
            .chain(self.frontier_added.iter().copied())
            .chain(self.frontier_removed.iter().copied())
            .collect();
        v.sort_unstable();
        v.dedup();
        v
    }

    /// Appends a later change set, keeping the earliest `old` and latest `new`
    /// for voxels changed twice and cancelling frontier flips.
    pub fn merge(&mut self, later: ChangeSet) {
        use std::collections::HashMap;
        let mut pos: HashMap<usize, usize> = self
            .changes
            .iter()
            .enumerate()
            .map(|(i, c)| (c.index, i))
            .collect();
        for c in later.changes {
            match pos.get(&c.index) {
                Some(&i) => self.changes[i].new = c.new,
                None => {
                    pos.insert(c.index, self.changes.len());
                    self.changes.push(c);
                }
            }
        }
        let mut net: HashMap<usize, i32> = HashMap::new();
        let mut order = Vec::new();
        let flips = std::mem::take(&mut self.frontier_added)
            .into_iter()
            .chain(later.frontier_added)
            .map(|v| (v, 1))
            .chain(
                std::mem::take(&mut self.frontier_removed)
                    .into_iter()
                    .chain(later.frontier_removed)
                    .map(|v| (v, -1)),
            );
        for (v, d) in flips {
            let e = net.entry(v).or_insert_with(|| {
                order.push(v);
                0
            });
            *e += d;
        }
        self.frontier_added = order.iter().copied().filter(|v| net[v] > 0).collect();
        self.frontier_removed = order.iter().copied().filter(|v| net[v] < 0).collect();
    }
}

/// Sparse belief map over a dense grid index.
#[derive(Debug, Clone)]
pub struct WorldMap {
    grid: GridSpec,
    label_count: usize,
    connectivity: Connectivity,
    /// 0 = unobserved, otherwise 1 + position in `beliefs`.
    slots: Vec<u32>,
    beliefs: Vec<VoxelBelief>,
    belief_voxel: Vec<usize>,
    state: Vec<VoxelState>,
    frontier: Vec<bool>,
    frontier_count: usize,
    /// Columns swept by the robot body: known free at robot height.
    traversed: Vec<bool>,
    stamp: Vec<u32>,
    epoch: u32,
}

impl WorldMap {
    pub fn new(grid: GridSpec, label_count: usize) -> Self {
        Self::with_connectivity(grid, label_count, Connectivity::Six)
    }

    pub fn with_connectivity(
        grid: GridSpec,
        label_count: usize,
        connectivity: Connectivity,
    ) -> Self {
        let n = grid.dims.len();
        Self {
            grid,
            label_count,
            connectivity,
            slots: vec![0; n],
            beliefs: Vec::new(),
            belief_voxel: Vec::new(),
            state: vec![VoxelState::Unknown; n],
            frontier: vec![false; n],
            frontier_count: 0,
            traversed: vec![false; grid.dims.columns()],
            stamp: vec![0; n],
            epoch: 0,
        }
    }

    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    pub fn resolution(&self) -> f64 {
        self.grid.resolution
    }

    pub fn label_count(&self) -> usize {
        self.label_count
    }

    pub fn connectivity(&self) -> Connectivity {
        self.connectivity
    }

    #[inline]
    pub fn state(&self, index: usize) -> VoxelState {
        self.state[index]
    }

    pub fn states(&self) -> &[VoxelState] {
        &self.state
    }

    #[inline]
    pub fn is_frontier(&self, index: usize) -> bool {
        self.frontier[index]
    }

    #[inline]
    pub fn belief(&self, index: usize) -> Option<&VoxelBelief> {
        match self.slots[index] {
            0 => None,
            s => Some(&self.beliefs[s as usize - 1]),
        }
    }

    pub fn summary(&self, index: usize) -> BeliefSummary {
        match self.belief(index) {
            None => BeliefSummary::UNOBSERVED,
            Some(b) => BeliefSummary {
                observed: true,
                sigma: b.sigma,
                state: self.state[index],
                label: b.sem.as_ref().map(|_| b.label),
                confidence: b.confidence,
            },
        }
    }

    /// Number of voxels with at least one observation.
    pub fn observed_count(&self) -> usize {
        self.beliefs.len()
    }

    /// Observed voxels with their beliefs, in first-observation order.
    pub fn observed(&self) -> impl Iterator<Item = (usize, &VoxelBelief)> {
        self.belief_voxel.iter().copied().zip(self.beliefs.iter())
    }

    pub fn frontier_count(&self) -> usize {
        self.frontier_count
    }

    /// Frontier voxels from the maintained flags, sorted.
    pub fn frontiers(&self) -> Vec<usize> {
        (0..self.frontier.len())
            .filter(|&i| self.frontier[i])
            .collect()
    }

    /// Frontier voxels recomputed from their definition, sorted.
    pub fn recompute_frontiers(&self) -> Vec<usize> {
        (0..self.state.len())
            .filter(|&i| self.frontier_by_definition(i))
            .collect()
    }

    fn frontier_by_definition(&self, index: usize) -> bool {
        if self.state[index] != VoxelState::Free {
            return false;
        }
        let dims = self.grid.dims;
        match self.connectivity {
            Connectivity::Six => dims
                .neighbors6(index)
                .any(|n| self.state[n] == VoxelState::Unknown),
            Connectivity::TwentySix => dims
                .neighbors26(index)
                .any(|n| self.state[n] == VoxelState::Unknown),
        }
    }

    #[inline]
    pub fn is_traversed(&self, column: usize) -> bool {
        self.traversed[column]
    }

    /// Marks columns under a robot footprint of `radius` at `(x, y)` as swept.
    /// Returns how many columns were newly marked.
    pub fn mark_traversed(&mut self, x: f64, y: f64, radius: f64) -> usize {
        let res = self.grid.resolution;
        let dims = self.grid.dims;
        let mut marked = 0;
        let x0 = ((x - radius) / res).floor().max(0.0) as usize;
        let y0 = ((y - radius) / res).floor().max(0.0) as usize;
        let x1 = (((x + radius) / res).floor() as usize).min(dims.nx.saturating_sub(1));
        let y1 = (((y + radius) / res).floor() as usize).min(dims.ny.saturating_sub(1));
        for cy in y0..=y1 {
            for cx in x0..=x1 {
                let px = (cx as f64 + 0.5) * res;
                let py = (cy as f64 + 0.5) * res;
                if (px - x).hypot(py - y) <= radius {
                    let c = cy * dims.nx + cx;
                    if !self.traversed[c] {
                        self.traversed[c] = true;
                        marked += 1;
                    }
                }
            }
        }
        marked
    }

    fn next_epoch(&mut self) -> u32 {
        self.epoch = self.epoch.wrapping_add(1);
        if self.epoch == 0 {
            self.stamp.iter_mut().for_each(|s| *s = 0);
            self.epoch = 1;
        }
        self.epoch
    }

    fn belief_mut(&mut self, index: usize) -> &mut VoxelBelief {
        if self.slots[index] == 0 {
            self.beliefs.push(VoxelBelief::new());
            self.belief_voxel.push(index);
            self.slots[index] = self.beliefs.len() as u32;
        }
        let s = self.slots[index] as usize - 1;
        &mut self.beliefs[s]
    }

    /// Fuses one frame and returns exactly what changed.
    ///
    /// Each hit adds positive support, each miss negative support; labeled
    /// observations are fused by product. States are reclassified for touched
    /// voxels and frontier flags refreshed around voxels whose state changed.
    pub fn integrate_frame(&mut self, frame: &SensorFrame) -> ChangeSet {
        let epoch = self.next_epoch();
        let mut touched: Vec<(usize, BeliefSummary)> = Vec::new();
        let mut touch = |map: &mut WorldMap, v: usize| {
            if map.stamp[v] != epoch {
                map.stamp[v] = epoch;
                touched.push((v, map.summary(v)));
            }
        };
        for &(v, _) in &frame.hits {
            touch(self, v);
            let b = self.belief_mut(v);
            b.pos_count = (b.pos_count + 1).min(COUNT_CAP);
        }
        for &v in &frame.misses {
            touch(self, v);
            let b = self.belief_mut(v);
            b.neg_count = (b.neg_count + 1).min(COUNT_CAP);
        }
        for (v, obs) in &frame.semantic_obs {
            touch(self, *v);
            let b = self.belief_mut(*v);
            let fused = fuse_semantic(b.sem.as_deref(), obs);
            b.set_sem(fused);
        }

        let mut changes = Vec::with_capacity(touched.len());
        let mut state_changed = Vec::new();
        for (v, old) in touched {
            let b = self.belief_mut(v);
            b.sigma = support(b.pos_count, b.neg_count);
            let sigma = b.sigma;
            let new_state = classify(sigma, true);
            if self.state[v] != new_state {
                state_changed.push(v);
            }
            self.state[v] = new_state;
            let new = self.summary(v);
            if new != old || !old.observed {
                changes.push(VoxelChange { index: v, old, new });
            }
        }

        let (frontier_added, frontier_removed) = self.refresh_frontiers(&state_changed);
        ChangeSet {
            changes,
            frontier_added,
            frontier_removed,
        }
    }

    fn refresh_frontiers(&mut self, state_changed: &[usize]) -> (Vec<usize>, Vec<usize>) {
        let epoch = self.next_epoch();
        let dims = self.grid.dims;
        let mut candidates = Vec::new();
        for &v in state_changed {
            let mut push = |n: usize, stamp: &mut Vec<u32>| {
                if stamp[n] != epoch {
                    stamp[n] = epoch;
                    candidates.push(n);
                }
            };
            push(v, &mut self.stamp);
            match self.connectivity {
                Connectivity::Six => dims.neighbors6(v).for_each(|n| push(n, &mut self.stamp)),
                Connectivity::TwentySix => {
                    dims.neighbors26(v).for_each(|n| push(n, &mut self.stamp))
                }
            }
        }
        let mut added = Vec::new();
        let mut removed = Vec::new();
        for v in candidates {
            let now = self.frontier_by_definition(v);
            if now != self.frontier[v] {
                self.frontier[v] = now;
                if now {
                    self.frontier_count += 1;
                    added.push(v);
                } else {
                    self.frontier_count -= 1;
                    removed.push(v);
                }
            }
        }
        (added, removed)
    }

    /// Builds a map from scratch: sums all counts first, fuses labels in frame
    /// order, then classifies and scans frontiers over the whole grid.
    pub fn from_frames<'a>(
        grid: GridSpec,
        label_count: usize,
        connectivity: Connectivity,
        frames: impl IntoIterator<Item = &'a SensorFrame>,
    ) -> Self {
        let n = grid.dims.len();
        let mut pos = vec![0u32; n];
        let mut neg = vec![0u32; n];
        let mut sem: Vec<Option<Vec<f64>>> = vec![None; n];
        let mut order = Vec::new();
        let mut seen = vec![false; n];
        let mut first = |v: usize, order: &mut Vec<usize>| {
            if !seen[v] {
                seen[v] = true;
                order.push(v);
            }
        };
        for f in frames {
            let mut frame_order = Vec::new();
            for &(v, _) in &f.hits {
                pos[v] = (pos[v] + 1).min(COUNT_CAP);
                frame_order.push(v);
            }
            for &v in &f.misses {
                neg[v] = (neg[v] + 1).min(COUNT_CAP);
                frame_order.push(v);
            }
            for (v, obs) in &f.semantic_obs {
                sem[*v] = Some(fuse_semantic(sem[*v].as_deref(), obs));
                frame_order.push(*v);
            }
            for v in frame_order {
                first(v, &mut order);
            }
        }
        let mut map = WorldMap::with_connectivity(grid, label_count, connectivity);
        for v in order {
            let b = map.belief_mut(v);
            b.pos_count = pos[v];
            b.neg_count = neg[v];
            b.sigma = support(pos[v], neg[v]);
            if let Some(d) = sem[v].take() {
                b.set_sem(d);
            }
            let sigma = b.sigma;
            map.state[v] = classify(sigma, true);
        }
        for v in 0..n {
            map.frontier[v] = map.frontier_by_definition(v);
        }
        map.frontier_count = map.frontier.iter().filter(|&&f| f).count();
        map
    }

    /// Voxel-by-voxel comparison with another map of the same grid.
    pub fn diff(&self, other: &WorldMap) -> Result<(), String> {
        if self.grid != other.grid {
            return Err("grid mismatch".into());
        }
        for v in 0..self.state.len() {
            if self.belief(v) != other.belief(v) {
                return Err(format!("belief differs at voxel {v}"));
            }
            if self.state[v] != other.state[v] {
                return Err(format!("state differs at voxel {v}"));
            }
            if self.frontier[v] != other.frontier[v] {
                return Err(format!("frontier flag differs at voxel {v}"));
            }
        }
        if self.traversed != other.traversed {
            return Err("traversed columns differ".into());
        }
        Ok(())
    }

    /// Full consistency audit: support accounting, label normalization,
    /// classification and frontier flags.
    pub fn audit(&self) -> Result<(), String> {
        for (v, b) in self.observed() {
            self.audit_voxel(v, b)?;
        }
        for v in 0..self.state.len() {
            if self.slots[v] == 0 && self.state[v] != VoxelState::Unknown {
                return Err(format!("unobserved voxel {v} is not unknown"));
            }
            if self.frontier[v] != self.frontier_by_definition(v) {
                return Err(format!("frontier flag wrong at voxel {v}"));
            }
        }
        let count = self.frontier.iter().filter(|&&f| f).count();
        if count != self.frontier_count {
            return Err(format!(
                "frontier count {} but {} flags set",
                self.frontier_count, count
            ));
        }
        Ok(())
    }

    /// Audits a deterministic sample of roughly `fraction` of all voxels.
    pub fn audit_sample(&self, fraction: f64, salt: u64) -> Result<(), String> {
        let n = self.state.len();
        let stride = ((1.0 / fraction.clamp(1e-9, 1.0)).round() as usize).max(1);
        let mut v = (salt as usize) % stride;
        while v < n {
            if let Some(b) = self.belief(v) {
                self.audit_voxel(v, b)?;
            }
            if self.frontier[v] != self.frontier_by_definition(v) {
                return Err(format!("frontier flag wrong at voxel {v}"));
            }
            v += stride;
        }
        Ok(())
    }

    fn audit_voxel(&self, v: usize, b: &VoxelBelief) -> Result<(), String> {
        if b.sigma != support(b.pos_count, b.neg_count) {
            return Err(format!("support accounting broken at voxel {v}"));
        }
        if self.state[v] != classify(b.sigma, true) {
            return Err(format!("state of voxel {v} disagrees with its support"));
        }
        if let Some(d) = &b.sem {
            let total: f64 = d.iter().sum();
            if (total - 1.0).abs() > 1e-9 || d.iter().any(|&p| p < 0.0) {
                return Err(format!("label distribution of voxel {v} is not normalized"));
            }
            if argmax(d) != (b.label, b.confidence) {
                return Err(format!("label/confidence of voxel {v} stale"));
            }
        }
        Ok(())
    }

    /// Debug export of every observed voxel.
    pub fn snapshot(&self) -> MapSnapshot {
        let mut voxels: Vec<SnapshotVoxel> = self
            .observed()
            .map(|(index, b)| SnapshotVoxel {
                index,
                sigma: b.sigma,
                state: self.state[index],
                label: b.sem.as_ref().map(|_| b.label),
                confidence: b.confidence,
            })
            .collect();
        voxels.sort_by_key(|v| v.index);
        MapSnapshot {
            resolution: self.grid.resolution,
            dims: [self.grid.dims.nx, self.grid.dims.ny, self.grid.dims.nz],
            label_count: self.label_count,
            voxels,
        }
    }
}

/// JSON dump of the belief map. Unlisted voxels are unobserved.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapSnapshot {
    pub resolution: f64,
    pub dims: [usize; 3],
    pub label_count: usize,
    pub voxels: Vec<SnapshotVoxel>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnapshotVoxel {
    pub index: usize,
    pub sigma: f64,
    pub state: VoxelState,
    /// Zero-based class index; absent without label evidence.
    pub label: Option<u16>,
    pub confidence: f64,
}
