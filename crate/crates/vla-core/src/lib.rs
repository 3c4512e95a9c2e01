//! Desk-scale vision-language-action testbed.
//!
//! Everything runs on one machine with no learned-vision dependency: camera
//! frames are replaced by symbolic palette grids, the robot by a 2.5D
//! kinematic micro-simulator, and the language-model backbone by a small
//! from-scratch autoregressive transformer over a unified discrete vocabulary
//! of action bins, proprioception bins, direction tokens, and control markers.
//!
//! Module map:
//! - [`vocab`] — shared token vocabulary plus value/action/proprioception codecs
//! - [`hybrid`] — unified navigation+manipulation action grammar
//! - [`chunk`] — fixed-size action chunks and their open-loop executor
//! - [`obs`] — symbolic view grids and composite observations
//! - [`sim`] — deterministic mobile-manipulation simulator with scripted experts
//! - [`data`] — demonstration generation, persistence, curriculum splits
//! - [`policy`] — autoregressive categorical policy trained by behavior cloning
//! - [`harness`] — evaluation protocols, ablation driver, reports
//!
//! Episode-level inner loops (demo generation, evaluation rollouts, batch
//! gradient accumulation) run data-parallel through [`parallel`] when the
//! `parallel` feature (default) is enabled, and sequentially otherwise.
//! Results are bit-identical either way.

pub mod action;
pub mod chunk;
pub mod config;
pub mod data;
pub mod harness;
pub mod hybrid;
pub mod obs;
pub mod parallel;
pub mod policy;
pub mod sim;
pub mod vocab;

/// Token-layout version tag embedded in configs and dataset manifests.
pub const VOCAB_VERSION: &str = "vocab-v1";
/// Action-grammar version tag recorded in dataset manifests.
pub const GRAMMAR_VERSION: &str = "hybrid-v1";
/// Checkpoint file version tag.
pub const CHECKPOINT_VERSION: &str = "ckpt-v1";
/// Dataset manifest file name.
pub const MANIFEST_FILE: &str = "manifest.v1";
