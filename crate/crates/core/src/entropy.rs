//! Geometry and semantic uncertainty, information gain, and the entropy map.
//!
//! All logarithms are base 2, so every quantity is in bits.
//!
//! Occupancy confidence squashes the squared support:
//! `p_g = 1 / (1 + e^{−σ²})`, which sits at 0.5 for an unobserved voxel and
//! approaches 1 as evidence of either sign piles up. Geometry entropy is the
//! binary entropy of `p_g`. Semantic entropy is the Shannon entropy of the
//! fused label distribution.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::frustum::{self, Scratch};
use crate::fusion::{
    argmax, fuse_semantic, ChangeSet, VoxelBelief, VoxelState, WorldMap, NEGATIVE_SUPPORT,
    POSITIVE_SUPPORT,
};
use crate::grid::Connectivity;
use crate::scene::Pose;
use crate::sensor::CameraModel;

/// Occupancy confidence for a support sum. In `[0.5, 1)` for every input.
pub fn p_g(sigma: f64) -> f64 {
    let p = 1.0 / (1.0 + (-sigma * sigma).exp());
    p.min(1.0 - f64::EPSILON / 2.0)
}

/// Binary entropy of [`p_g`] in bits.
pub fn h_geometry(sigma: f64) -> f64 {
    let s2 = sigma * sigma;
    let p = 1.0 / (1.0 + (-s2).exp());
    // complement computed directly to keep precision as p → 1
    let q = 1.0 / (1.0 + s2.exp());
    -(xlog2x(p) + xlog2x(q))
}

/// Geometry information gain of moving from `old_sigma` to `new_sigma`.
pub fn i_geometry(old_sigma: f64, new_sigma: f64) -> f64 {
    h_geometry(old_sigma) - h_geometry(new_sigma)
}

#[inline]
fn xlog2x(p: f64) -> f64 {
    if p > 0.0 {
        p * p.log2()
    } else {
        0.0
    }
}

/// Shannon entropy in bits.
pub fn entropy(dist: &[f64]) -> f64 {
    -dist.iter().map(|&p| xlog2x(p)).sum::<f64>()
}

/// How the "label changed with higher confidence" case is scored.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Case2Mode {
    /// Entropy of the new distribution.
    #[default]
    Literal,
    /// No gain.
    Zero,
}

/// Semantic information gain between two label beliefs.
///
/// Labels are argmaxes and confidences the max probability; an absent old
/// belief is uniform over `label_count` classes.
/// - same label: `Σ p_new log p_new − Σ p_old log p_old`, i.e. entropy reduction;
/// - label changed and confidence rose: per `case2`;
/// - otherwise 0.
pub fn i_semantic(
    old: Option<&[f64]>,
    new: Option<&[f64]>,
    label_count: usize,
    case2: Case2Mode,
) -> f64 {
    let Some(new) = new else {
        return 0.0;
    };
    let uniform;
    let old = match old {
        Some(o) => o,
        None => {
            uniform = vec![1.0 / label_count as f64; label_count];
            &uniform
        }
    };
    let (old_label, old_conf) = argmax(old);
    let (new_label, new_conf) = argmax(new);
    if old_label == new_label {
        entropy(old) - entropy(new)
    } else if old_conf < new_conf {
        match case2 {
            Case2Mode::Literal => entropy(new),
            Case2Mode::Zero => 0.0,
        }
    } else {
        0.0
    }
}

/// Weights of the semantic and geometry terms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GainWeights {
    pub alpha: f64,
    pub beta: f64,
}

impl Default for GainWeights {
    fn default() -> Self {
        Self {
            alpha: 1.0,
            beta: 0.3,
        }
    }
}

impl GainWeights {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.alpha >= 0.0 && self.beta >= 0.0) {
            return Err("gain weights must be non-negative".into());
        }
        if self.alpha == 0.0 && self.beta == 0.0 {
            return Err("at least one gain weight must be positive".into());
        }
        Ok(())
    }
}

/// `alpha · i_sem + beta · i_geo`.
pub fn i_combined(i_sem: f64, i_geo: f64, w: &GainWeights) -> f64 {
    w.alpha * i_sem + w.beta * i_geo
}

/// Which uncertainty terms drive exploration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EntropyMode {
    #[default]
    Combined,
    Geometry,
    Semantic,
}

impl EntropyMode {
    /// Weights with the disabled term zeroed.
    pub fn apply(self, w: GainWeights) -> GainWeights {
        match self {
            EntropyMode::Combined => w,
            EntropyMode::Geometry => GainWeights { alpha: 0.0, ..w },
            EntropyMode::Semantic => GainWeights { beta: 0.0, ..w },
        }
    }
}

/// How a hypothetical extra observation is predicted.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GainModel {
    pub weights: GainWeights,
    pub case2: Case2Mode,
    /// Discount on the full uncertainty of never-observed voxels.
    pub unknown_discount: f64,
    /// Peak mass of the predicted label observation.
    pub predicted_confidence: f64,
}

impl Default for GainModel {
    fn default() -> Self {
        Self {
            weights: GainWeights::default(),
            case2: Case2Mode::Literal,
            unknown_discount: 0.5,
            predicted_confidence: 0.95,
        }
    }
}

impl GainModel {
    pub fn validate(&self) -> Result<(), String> {
        self.weights.validate()?;
        if !(0.0..=1.0).contains(&self.unknown_discount) {
            return Err("unknown_discount must lie in [0, 1]".into());
        }
        if !(self.predicted_confidence > 0.0 && self.predicted_confidence <= 1.0) {
            return Err("predicted_confidence must lie in (0, 1]".into());
        }
        Ok(())
    }
}

/// Semantic entropy of a voxel given its belief.
///
/// Free voxels carry no label uncertainty; anything else without label
/// evidence is maximally uncertain.
pub fn h_semantic(belief: Option<&VoxelBelief>, state: VoxelState, label_count: usize) -> f64 {
    if state == VoxelState::Free {
        return 0.0;
    }
    match belief.and_then(|b| b.sem.as_deref()) {
        Some(d) => entropy(d),
        None => (label_count as f64).log2(),
    }
}

/// Predicted label observation: `confidence` on `label`, the rest spread evenly.
pub fn predicted_observation(label: u16, confidence: f64, label_count: usize) -> Vec<f64> {
    if label_count == 1 {
        return vec![1.0];
    }
    let rest = (1.0 - confidence) / (label_count - 1) as f64;
    let mut d = vec![rest; label_count];
    d[label as usize] = confidence;
    d
}

/// Gain a single further frame is predicted to bring to one voxel.
///
/// Unobserved voxels yield their discounted full uncertainty. Free voxels
/// expect one more pass-through. Everything else expects one more hit plus a
/// label observation agreeing with the current argmax.
pub fn voxel_view_gain(
    belief: Option<&VoxelBelief>,
    state: VoxelState,
    label_count: usize,
    model: &GainModel,
) -> f64 {
    let w = &model.weights;
    let Some(b) = belief else {
        let h = i_combined((label_count as f64).log2(), h_geometry(0.0), w);
        return model.unknown_discount * h;
    };
    if state == VoxelState::Free {
        return (w.beta * i_geometry(b.sigma, b.sigma + NEGATIVE_SUPPORT)).max(0.0);
    }
    let geo = i_geometry(b.sigma, b.sigma + POSITIVE_SUPPORT).max(0.0);
    let sem = if w.alpha > 0.0 {
        let label = b.sem.as_ref().map_or(0, |_| b.label);
        let obs = predicted_observation(label, model.predicted_confidence, label_count);
        let fused = fuse_semantic(b.sem.as_deref(), &obs);
        (h_semantic(Some(b), state, label_count) - entropy(&fused)).max(0.0)
    } else {
        0.0
    };
    i_combined(sem, geo, w)
}

/// Compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
struct Accum {
    sum: f64,
    comp: f64,
}

impl Accum {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Per-voxel entropy map with global sums and cached view gains.
#[derive(Debug, Clone)]
pub struct EntropyField {
    model: GainModel,
    label_count: usize,
    h_geo: Vec<f64>,
    h_sem: Vec<f64>,
    view_gain: Vec<f64>,
    sum_geo: Accum,
    sum_sem: Accum,
}

impl EntropyField {
    /// Computes every voxel from the map.
    pub fn build(map: &WorldMap, model: GainModel) -> Self {
        let n = map.grid().dims.len();
        let k = map.label_count();
        let unobs_geo = h_geometry(0.0);
        let unobs_sem = h_semantic(None, VoxelState::Unknown, k);
        let unobs_gain = voxel_view_gain(None, VoxelState::Unknown, k, &model);
        let mut field = Self {
            model,
            label_count: k,
            h_geo: vec![unobs_geo; n],
            h_sem: vec![unobs_sem; n],
            view_gain: vec![unobs_gain; n],
            sum_geo: Accum::default(),
            sum_sem: Accum::default(),
        };
        for (v, _) in map.observed() {
            field.refresh(map, v);
        }
        for v in 0..n {
            field.sum_geo.add(field.h_geo[v]);
            field.sum_sem.add(field.h_sem[v]);
        }
        field
    }

    fn refresh(&mut self, map: &WorldMap, v: usize) {
        let b = map.belief(v);
        let state = map.state(v);
        self.h_geo[v] = h_geometry(b.map_or(0.0, |b| b.sigma));
        self.h_sem[v] = h_semantic(b, state, self.label_count);
        self.view_gain[v] = voxel_view_gain(b, state, self.label_count, &self.model);
    }

    /// Brings the changed voxels up to date.
    pub fn apply(&mut self, map: &WorldMap, changes: &ChangeSet) {
        for c in &changes.changes {
            let v = c.index;
            let (g0, s0) = (self.h_geo[v], self.h_sem[v]);
            self.refresh(map, v);
            self.sum_geo.add(self.h_geo[v] - g0);
            self.sum_sem.add(self.h_sem[v] - s0);
        }
    }

    pub fn model(&self) -> &GainModel {
        &self.model
    }

    pub fn h_geometry(&self, v: usize) -> f64 {
        self.h_geo[v]
    }

    pub fn h_semantic(&self, v: usize) -> f64 {
        self.h_sem[v]
    }

    /// Combined entropy of one voxel.
    pub fn h(&self, v: usize) -> f64 {
        let w = &self.model.weights;
        w.alpha * self.h_sem[v] + w.beta * self.h_geo[v]
    }

    pub fn view_gain(&self, v: usize) -> f64 {
        self.view_gain[v]
    }

    pub fn total_geometry(&self) -> f64 {
        self.sum_geo.value()
    }

    pub fn total_semantic(&self) -> f64 {
        self.sum_sem.value()
    }

    /// Combined entropy summed over the whole grid.
    pub fn total(&self) -> f64 {
        let w = &self.model.weights;
        w.alpha * self.total_semantic() + w.beta * self.total_geometry()
    }

    /// Combined entropy over observed voxels and Unknown voxels touching a
    /// frontier: the part of the map exploration is currently working on.
    pub fn active_total(&self, map: &WorldMap) -> f64 {
        let dims = map.grid().dims;
        let mut seen = vec![false; dims.len()];
        let mut acc = Accum::default();
        for (v, _) in map.observed() {
            seen[v] = true;
            acc.add(self.h(v));
        }
        for v in map.frontiers() {
            let mut visit = |n: usize| {
                if !seen[n] && map.state(n) == VoxelState::Unknown {
                    seen[n] = true;
                    acc.add(self.h(n));
                }
            };
            match map.connectivity() {
                Connectivity::Six => dims.neighbors6(v).for_each(&mut visit),
                Connectivity::TwentySix => dims.neighbors26(v).for_each(&mut visit),
            }
        }
        acc.value()
    }

    /// Checks every voxel and both sums against a rebuild.
    pub fn audit(&self, map: &WorldMap) -> Result<(), String> {
        let fresh = EntropyField::build(map, self.model);
        for v in 0..self.h_geo.len() {
            for (name, a, b) in [
                ("h_geometry", self.h_geo[v], fresh.h_geo[v]),
                ("h_semantic", self.h_sem[v], fresh.h_sem[v]),
                ("view_gain", self.view_gain[v], fresh.view_gain[v]),
            ] {
                if (a - b).abs() > 1e-9 {
                    return Err(format!("{name} of voxel {v} is {a}, rebuild gives {b}"));
                }
            }
        }
        let direct_geo: f64 = self.h_geo.iter().sum();
        let direct_sem: f64 = self.h_sem.iter().sum();
        if (direct_geo - self.total_geometry()).abs() > 1e-6
            || (direct_sem - self.total_semantic()).abs() > 1e-6
        {
            return Err("global entropy sums drifted from per-voxel values".into());
        }
        Ok(())
    }

    /// Predicted gain of one frame from `view`: cached per-voxel gains summed
    /// over the voxels the view would inform.
    pub fn expected_gain(
        &self,
        map: &WorldMap,
        view: &Pose,
        camera: &CameraModel,
        scratch: &mut Scratch,
    ) -> f64 {
        let vis = frustum::visible(map, view, camera, scratch);
        self.gain_of(&vis.gain_voxels)
    }

    /// Sum of cached view gains over `voxels`.
    pub fn gain_of(&self, voxels: &[usize]) -> f64 {
        voxels.iter().map(|&v| self.view_gain[v]).sum()
    }

    /// Writes the map as layered CSV: one `z` block per layer, rows along y,
    /// columns along x, combined entropy in bits.
    pub fn write_layers_csv<W: Write>(&self, map: &WorldMap, out: W) -> csv::Result<()> {
        let dims = map.grid().dims;
        let mut w = csv::WriterBuilder::new().flexible(true).from_writer(out);
        for z in 0..dims.nz {
            w.write_record([format!("z={z}")])?;
            for y in 0..dims.ny {
                let row: Vec<String> = (0..dims.nx)
                    .map(|x| format!("{:.6}", self.h(dims.index(x, y, z))))
                    .collect();
                w.write_record(&row)?;
            }
        }
        w.flush()?;
        Ok(())
    }
}
