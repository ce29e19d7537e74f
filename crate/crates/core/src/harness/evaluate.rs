//! Closed-set genuine/impostor evaluation over a dataset manifest.
//!
//! Training records form the gallery. A genuine record counts as a true
//! positive when it is identified as its own class; an impostor record
//! assigned to class `c` counts as a false positive when it is identified as
//! `c`. No distance threshold is involved.

use std::collections::HashMap;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::config::PipelineConfig;
use crate::descriptor::{extract_from_path, FaceDescriptor};
use crate::error::{Error, Result};
use crate::harness::manifest::{DatasetManifest, Role};
use crate::harness::metrics::ConfusionCounts;
use crate::matcher::{Gallery, Matcher};

/// Outcome of one genuine or impostor trial.
#[derive(Clone, Debug, PartialEq)]
pub struct Trial {
    pub path: PathBuf,
    pub class_id: String,
    pub role: Role,
    /// `None` when the probe produced no blocks.
    pub predicted: Option<String>,
    pub distance: Option<f64>,
}

impl Trial {
    fn counts(&self) -> ConfusionCounts {
        let hit = self.predicted.as_deref() == Some(self.class_id.as_str());
        match (self.role, hit) {
            (Role::Genuine, true) => ConfusionCounts::new(1, 0, 0, 0),
            (Role::Genuine, false) => ConfusionCounts::new(0, 0, 0, 1),
            (Role::Impostor, true) => ConfusionCounts::new(0, 1, 0, 0),
            (Role::Impostor, false) => ConfusionCounts::new(0, 0, 1, 0),
            (Role::Train, _) => ConfusionCounts::default(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Evaluation {
    pub counts: ConfusionCounts,
    pub trials: Vec<Trial>,
}

/// Runs `f` on a pool of `jobs` threads, or on the global pool when `jobs` is `None`.
pub fn with_jobs<T: Send>(jobs: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match jobs {
        None => Ok(f()),
        Some(0) => Err(Error::Config("--jobs must be at least 1".into())),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::Config(format!("cannot start {n} worker threads: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

fn describe_all<'a>(
    paths: impl IntoIterator<Item = &'a Path>,
    cfg: &PipelineConfig,
) -> Result<HashMap<&'a Path, FaceDescriptor>> {
    let mut unique: Vec<&Path> = paths.into_iter().collect();
    unique.sort();
    unique.dedup();
    unique
        .into_par_iter()
        .map(|p| extract_from_path(p, &p.display().to_string(), cfg).map(|d| (p, d)))
        .collect()
}

pub fn evaluate_detailed(manifest: &DatasetManifest, cfg: &PipelineConfig) -> Result<Evaluation> {
    manifest.validate()?;
    let matcher = Matcher::new(cfg)?;
    let descriptors = describe_all(manifest.records.iter().map(|r| r.path.as_path()), cfg)?;

    let mut gallery = Gallery::new();
    for r in manifest.with_role(Role::Train) {
        gallery.push(descriptors[r.path.as_path()].clone(), r.class_id.clone());
    }
    let tests: Vec<_> = manifest.records.iter().filter(|r| r.role != Role::Train).collect();
    if !tests.is_empty() && gallery.is_empty() {
        return Err(Error::Validation(
            "manifest has test records but no train records".into(),
        ));
    }

    let trials = tests
        .into_par_iter()
        .map(|r| {
            let probe = &descriptors[r.path.as_path()];
            let (predicted, distance) = if probe.is_empty() {
                log::warn!("{}: no significant blocks, counted as a miss", r.path.display());
                (None, None)
            } else {
                let m = matcher.classify(probe, &gallery)?;
                (Some(m.class_id), Some(m.distance))
            };
            Ok(Trial {
                path: r.path.clone(),
                class_id: r.class_id.clone(),
                role: r.role,
                predicted,
                distance,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let counts = trials
        .iter()
        .map(Trial::counts)
        .fold(ConfusionCounts::default(), |a, b| a + b);
    Ok(Evaluation { counts, trials })
}

pub fn evaluate(manifest: &DatasetManifest, cfg: &PipelineConfig) -> Result<ConfusionCounts> {
    evaluate_detailed(manifest, cfg).map(|e| e.counts)
}
