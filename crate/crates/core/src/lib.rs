//! Deterministic slide-quality tooling: layout metrics, reward shaping for an
//! aesthetic judge, an iterative score-and-refine loop, a geometric layout
//! planner, a heuristic scorer, benchmark perturbations and an SVG/raster
//! renderer.

pub mod aesth;
pub mod checker;
pub mod harness;
pub mod metrics;
pub mod perturb;
pub mod planner;
pub mod rewards;
pub mod slide;
pub mod render;
pub mod typeset;
