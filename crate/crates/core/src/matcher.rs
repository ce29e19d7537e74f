//! Gated χ² dissimilarity between descriptors and nearest-gallery classification.
//!
//! Each block's two peaks are flattened to four non-negative scalars
//! `(ρ1 + ρmax, θ1 + 90, ρ2 + ρmax, θ2 + 90)`. For a probe block the χ²
//! values against all training blocks whose origin lies within `th1` are
//! reduced with min (or max), and the per-block results are averaged.

use rayon::prelude::*;

use crate::config::{Aggregation, PipelineConfig};
use crate::descriptor::{DescriptorEntry, FaceDescriptor};
use crate::error::{Error, Result};

pub type Feature = [f64; 4];

/// Shifted non-negative encoding of a block's two peaks.
pub fn encode_feature(entry: &DescriptorEntry, rho_max: f64) -> Feature {
    let [p, q] = &entry.peaks;
    [p.rho + rho_max, p.theta + 90.0, q.rho + rho_max, q.theta + 90.0]
}

/// `Σ (a − b)² / (a + b)²` over the four components; terms with a zero
/// denominator contribute nothing.
pub fn chi_square(f1: &Feature, f2: &Feature) -> Result<f64> {
    if let Some(v) = f1.iter().chain(f2).find(|v| v.is_nan() || **v < 0.0) {
        return Err(Error::Encoding(format!("feature component {v} is negative")));
    }
    Ok(f1
        .iter()
        .zip(f2)
        .map(|(&a, &b)| {
            let den = a + b;
            if den == 0.0 {
                0.0
            } else {
                (a - b) * (a - b) / (den * den)
            }
        })
        .sum())
}

/// Spatial gate: true iff the two block origins are strictly closer than `th1`.
pub fn block_gate(a: (usize, usize), b: (usize, usize), th1: f64) -> bool {
    let dx = a.0 as f64 - b.0 as f64;
    let dy = a.1 as f64 - b.1 as f64;
    dx.hypot(dy) < th1
}

#[derive(Clone, Debug)]
pub struct GalleryEntry {
    pub descriptor: FaceDescriptor,
    pub class_id: String,
}

#[derive(Clone, Debug, Default)]
pub struct Gallery {
    pub entries: Vec<GalleryEntry>,
}

impl Gallery {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, descriptor: FaceDescriptor, class_id: impl Into<String>) {
        self.entries.push(GalleryEntry {
            descriptor,
            class_id: class_id.into(),
        });
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MatchResult {
    pub class_id: String,
    pub best_training_index: usize,
    pub distance: f64,
    pub per_gallery_distances: Vec<(usize, f64)>,
}

/// Matching parameters resolved from a [`PipelineConfig`].
#[derive(Clone, Debug)]
pub struct Matcher {
    fingerprint: String,
    th1: f64,
    rho_max: f64,
    aggregation: Aggregation,
    empty_gate_penalty: f64,
    allow_mismatch: bool,
}

impl Matcher {
    pub fn new(cfg: &PipelineConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(Self {
            fingerprint: cfg.fingerprint(),
            th1: cfg.th1(),
            rho_max: cfg.hough.rho_max(cfg.block_size),
            aggregation: cfg.aggregation,
            empty_gate_penalty: cfg.empty_gate_penalty,
            allow_mismatch: false,
        })
    }

    /// Compare descriptors even when their config fingerprints differ.
    pub fn allow_fingerprint_mismatch(mut self, allow: bool) -> Self {
        self.allow_mismatch = allow;
        self
    }

    fn check_compatible(&self, probe: &FaceDescriptor, train: &FaceDescriptor) -> Result<()> {
        if self.allow_mismatch {
            return Ok(());
        }
        let offender = [&probe.fingerprint, &train.fingerprint]
            .into_iter()
            .find(|fp| **fp != self.fingerprint);
        match offender {
            None => Ok(()),
            Some(fp) if *fp == probe.fingerprint => Err(Error::Compatibility {
                probe: probe.fingerprint.clone(),
                gallery: self.fingerprint.clone(),
            }),
            Some(fp) => Err(Error::Compatibility {
                probe: probe.fingerprint.clone(),
                gallery: fp.clone(),
            }),
        }
    }

    pub fn dissimilarity(&self, probe: &FaceDescriptor, train: &FaceDescriptor) -> Result<f64> {
        if probe.is_empty() {
            return Err(Error::DegenerateDescriptor(probe.id.clone()));
        }
        self.check_compatible(probe, train)?;
        let train_features: Vec<((usize, usize), Feature)> = train
            .entries
            .iter()
            .map(|e| ((e.x, e.y), encode_feature(e, self.rho_max)))
            .collect();

        let mut total = 0.0;
        for k in &probe.entries {
            let fk = encode_feature(k, self.rho_max);
            let mut best: Option<f64> = None;
            for (origin, fl) in &train_features {
                if !block_gate((k.x, k.y), *origin, self.th1) {
                    continue;
                }
                let d = chi_square(&fk, fl)?;
                best = Some(match (best, self.aggregation) {
                    (None, _) => d,
                    (Some(b), Aggregation::Min) => b.min(d),
                    (Some(b), Aggregation::Max) => b.max(d),
                });
            }
            total += best.unwrap_or(self.empty_gate_penalty);
        }
        Ok(total / probe.len() as f64)
    }

    /// Nearest gallery entry by dissimilarity; ties go to the earlier index.
    pub fn classify(&self, probe: &FaceDescriptor, gallery: &Gallery) -> Result<MatchResult> {
        if gallery.is_empty() {
            return Err(Error::Config("cannot classify against an empty gallery".into()));
        }
        let distances = gallery
            .entries
            .par_iter()
            .enumerate()
            .map(|(i, g)| self.dissimilarity(probe, &g.descriptor).map(|d| (i, d)))
            .collect::<Result<Vec<_>>>()?;
        let (best, distance) = distances
            .iter()
            .copied()
            .fold(None, |acc: Option<(usize, f64)>, (i, d)| match acc {
                Some((_, bd)) if bd <= d => acc,
                _ => Some((i, d)),
            })
            .expect("gallery is non-empty");
        Ok(MatchResult {
            class_id: gallery.entries[best].class_id.clone(),
            best_training_index: best,
            distance,
            per_gallery_distances: distances,
        })
    }
}

pub fn dissimilarity(probe: &FaceDescriptor, train: &FaceDescriptor, cfg: &PipelineConfig) -> Result<f64> {
    Matcher::new(cfg)?.dissimilarity(probe, train)
}

pub fn classify(probe: &FaceDescriptor, gallery: &Gallery, cfg: &PipelineConfig) -> Result<MatchResult> {
    Matcher::new(cfg)?.classify(probe, gallery)
}
