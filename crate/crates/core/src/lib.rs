//! Flow-based video frame interpolation with hole-aware fusion, plus the
//! saliency-weighted evaluation used to score interpolated frames.
//!
//! The pipeline for a frame pair `(f1, f3)` and a time `t` in `(0, 1)`:
//!
//! 1. [`flow::estimate_bidirectional`] computes `F13` and `F31`.
//! 2. [`warp::synthesize_candidates`] forward-warps `f1` by `t·F13` and `f3`
//!    by `(1-t)·F31`, recording uncovered pixels as holes.
//! 3. [`fusion::contribution_mask`] picks a per-pixel weight between the two
//!    candidates and [`fusion::attention_fuse`] blends them.
//! 4. [`fusion::fill_joint_holes`] repairs pixels neither candidate covered.
//!
//! [`fusion::interpolate`] runs all of it. [`metrics`] scores results against
//! ground truth, with foreground/background splits driven by a [`saliency`]
//! mask, and [`bench`] runs the whole thing over a [`dataset`].

pub mod bench;
pub mod cli;
pub mod config;
pub mod dataset;
pub mod error;
pub mod field;
pub mod flow;
pub mod frame;
pub mod fusion;
pub mod io;
pub mod mask;
pub mod metrics;
mod plane;
pub mod saliency;
pub mod synth;
pub mod warp;

pub use error::{Error, Result};
pub use field::FlowField;
pub use flow::{estimate_bidirectional, estimate_flow, scale_flow, FlowParams};
pub use frame::Frame;
pub use fusion::{attention_fuse, contribution_mask, fill_joint_holes, interpolate, oracle_mask};
pub use io::{load_flo, load_frame, save_flo, save_frame};
pub use mask::{HoleMask, MaskMap};
pub use metrics::{evaluate_sample, EvalRecord};
pub use warp::{backward_warp, forward_warp, synthesize_candidates};
