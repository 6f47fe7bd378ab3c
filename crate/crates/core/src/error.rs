use std::path::PathBuf;

use thiserror::Error;

/// Errors raised while loading, validating or generating scenes.
#[derive(Debug, Error)]
pub enum SceneError {
    #[error("failed to read scene file {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed scene JSON: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("invalid scene field `{field}`: {reason}")]
    Invalid { field: String, reason: String },
    #[error("scene generation infeasible after {attempts} attempts (seed {seed}, {params})")]
    GenerationInfeasible {
        seed: u64,
        attempts: usize,
        params: String,
    },
}

impl SceneError {
    pub(crate) fn invalid(field: impl Into<String>, reason: impl Into<String>) -> Self {
        SceneError::Invalid {
            field: field.into(),
            reason: reason.into(),
        }
    }
}

/// Errors from simulated sensing and view evaluation.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum SensorError {
    #[error("pose ({x:.3}, {y:.3}) lies inside an obstacle")]
    PoseInObstacle { x: f64, y: f64 },
    #[error("pose ({x:.3}, {y:.3}) lies outside the map")]
    PoseOutsideMap { x: f64, y: f64 },
}

/// Errors from the view scoring field.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum FieldError {
    #[error("view cell {cell} is not in the safety mask")]
    UnsafeView { cell: usize },
    #[error("invalid field parameter `{field}`: {reason}")]
    InvalidParams { field: &'static str, reason: String },
}

/// Errors from NBV selection and path planning.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum PlanError {
    #[error("exploration complete: best view score {best} is below threshold {threshold}")]
    ExplorationComplete { best: f64, threshold: f64 },
    #[error("no path from lattice cell {start} to {goal}")]
    NoPath { start: usize, goal: usize },
    #[error("lattice cell {cell} is not in the safety mask")]
    UnsafeEndpoint { cell: usize },
}

/// Errors surfaced by a full episode run.
#[derive(Debug, Error)]
pub enum EpisodeError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Scene(#[from] SceneError),
    #[error(transparent)]
    Sensor(#[from] SensorError),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Plan(#[from] PlanError),
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("serialization error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
}
