//! Differentiable non-maximal suppression for monocular 3D detection.
//!
//! Boxes are rescored in matrix form, `r = clip((I + M∘P)^-1 s)`, where `P`
//! holds pruning weights of pairwise overlaps and `M` masks everything but
//! each group's top box. Because the masked matrix is nilpotent of order two
//! the inverse is exact and cheap, and the whole map is differentiable in the
//! scores and overlaps.
//!
//! - [`geometry`]: 2D/3D boxes, IoU, rotated and generalized IoU.
//! - [`nms`]: grouping, masking, the rescorers and classical/soft NMS.
//! - [`autodiff`]: the backward pass and a finite-difference checker.
//! - [`ranking`]: targets, the imagewise AP loss and AP|R40 evaluation.
//! - [`harness`]: dataset I/O, synthetic scenes and the command implementations.

pub mod autodiff;
pub mod boxes;
pub mod error;
pub mod geometry;
pub mod harness;
pub mod linalg;
pub mod nms;
pub mod ranking;

pub use error::{Error, Result};
