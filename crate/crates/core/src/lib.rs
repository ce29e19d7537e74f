//! Face identification from Hough peaks of significant blocks of a binary
//! gradient map.
//!
//! The extraction pipeline runs, per image:
//!
//! 1. [`imageops`]: grayscale normalization, 8-direction gradient, mean/median
//!    threshold, line dilation.
//! 2. [`blocks`]: randomized search for significant, disjoint square blocks.
//! 3. [`hough`]: per-block standard Hough transform and the two peaks nearest
//!    the centroid of the strongest cells.
//! 4. [`descriptor`]: the resulting per-image feature and its `.hfd` file form.
//!
//! [`matcher`] compares descriptors with a spatially gated χ² measure and
//! [`harness`] runs the genuine/impostor evaluation and the CLI.

pub mod blocks;
pub mod config;
pub mod descriptor;
pub mod error;
pub mod harness;
pub mod hough;
pub mod imageops;
pub mod matcher;

pub use config::{Aggregation, PipelineConfig};
pub use descriptor::{extract_descriptor, extract_from_path, read_descriptor, write_descriptor, FaceDescriptor};
pub use error::{Error, Result};
pub use matcher::{classify, dissimilarity, Gallery, MatchResult, Matcher};
