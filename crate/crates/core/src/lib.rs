//! Simulation and planning for entropy-driven active scene exploration.
//!
//! A robot with a depth camera fuses occupancy and semantic evidence into a
//! voxel belief map ([`fusion`]), tracks per-voxel uncertainty
//! ([`entropy`]), scores candidate views over an (x, y, θ) lattice
//! ([`vsf`]) and plans paths through informative views ([`planner`]).
//! [`harness`] runs whole episodes and comparisons.

pub mod edt;
pub mod entropy;
pub mod error;
pub mod frustum;
pub mod fusion;
pub mod grid;
pub mod harness;
pub mod planner;
pub mod raycast;
pub mod scene;
pub mod sensor;
pub mod vsf;
