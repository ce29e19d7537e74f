//! Evaluation protocol, metrics, stage dumps and the command-line front end.

pub mod cli;
pub mod dump;
pub mod evaluate;
pub mod manifest;
pub mod metrics;

pub use cli::{cli_main, load_gallery};
pub use evaluate::{evaluate, evaluate_detailed, Evaluation, Trial};
pub use manifest::{build_protocol, load_manifest, parse_manifest, DatasetManifest, ManifestRecord, Role};
pub use metrics::{metrics, ConfusionCounts, MetricsReport};
