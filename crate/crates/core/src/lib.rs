//! Keypoint-based shaping of deformable linear objects (DLOs) around circular
//! contacts with two grippers.
//!
//! The crate is organised bottom-up:
//!
//! * [`geometry`] - Fourier curve segments, curvature, keypoint sampling,
//!   rigid transforms and rasterization.
//! * [`dataset`] - labeled synthetic image generation and its on-disk format.
//! * [`perception`] - skeleton-based keypoint detection, geometric finetuning
//!   and detection metrics.
//! * [`sim`] - a quasi-static node-chain rope manipulated by two grippers.
//! * [`planner`] - the contact and shape primitives and the episode loop.
//! * [`metrics`] - IoU, per-pixel L1 and Chamfer distance.
//! * [`scenario`], [`render`], [`pbm`] - scenario files, SVG frames and
//!   image IO used by the `dlo` command-line tool.
//!
//! Batch work (dataset generation, detector evaluation, episode batches) is
//! data-parallel through [`par`]; with the `parallel` feature disabled every
//! batch runs sequentially and produces identical output.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dataset;
pub mod error;
pub mod geometry;
pub mod metrics;
pub mod par;
pub mod pbm;
pub mod perception;
pub mod planner;
pub mod render;
pub mod scenario;
pub mod sim;

pub use error::{Error, Result};
pub use geometry::{BinaryImage, KeypointSequence, Point, PolylineCurve, Vec2};
