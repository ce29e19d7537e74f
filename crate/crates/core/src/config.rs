//! Pipeline configuration and its flat `key = value` text form.

use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use sha2::{Digest, Sha256};

use crate::blocks::BlockParams;
use crate::error::{Error, Result};
use crate::hough::HoughConfig;

/// How the gated χ² values of one probe block are reduced over training blocks.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum Aggregation {
    /// Best-matching gated training block.
    #[default]
    Min,
    /// Worst gated training block, as the matching formula is literally printed.
    Max,
}

impl FromStr for Aggregation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "min" => Ok(Aggregation::Min),
            "max" => Ok(Aggregation::Max),
            other => Err(Error::Config(format!(
                "unknown aggregation `{other}` (expected min or max)"
            ))),
        }
    }
}

impl std::fmt::Display for Aggregation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Aggregation::Min => "min",
            Aggregation::Max => "max",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PipelineConfig {
    pub target_width: usize,
    pub target_height: usize,
    /// Length of the horizontal and vertical dilation lines; odd.
    pub se_length: usize,
    pub block_size: usize,
    pub num_candidates: usize,
    pub target_fraction: f64,
    /// Size of the Hough peak pool; `None` means `block_size`.
    pub peak_pool: Option<usize>,
    pub hough: HoughConfig,
    pub rng_seed: u64,
    /// Spatial gate radius in pixels; `None` means `block_size`.
    pub th1: Option<f64>,
    pub aggregation: Aggregation,
    pub empty_gate_penalty: f64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            target_width: 92,
            target_height: 112,
            se_length: 3,
            block_size: 16,
            num_candidates: 500_000,
            target_fraction: 0.25,
            peak_pool: None,
            hough: HoughConfig::default(),
            rng_seed: 0,
            th1: None,
            aggregation: Aggregation::Min,
            empty_gate_penalty: 1000.0,
        }
    }
}

impl PipelineConfig {
    pub fn peak_pool(&self) -> usize {
        self.peak_pool.unwrap_or(self.block_size)
    }

    pub fn th1(&self) -> f64 {
        self.th1.unwrap_or(self.block_size as f64)
    }

    pub fn target_dims(&self) -> (usize, usize) {
        (self.target_width, self.target_height)
    }

    pub fn block_params(&self) -> BlockParams {
        BlockParams {
            block_size: self.block_size,
            num_candidates: self.num_candidates,
            target_fraction: self.target_fraction,
            seed: self.rng_seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.target_width == 0 || self.target_height == 0 {
            return Err(Error::Config("target dimensions must be nonzero".into()));
        }
        if self.se_length == 0 || self.se_length.is_multiple_of(2) {
            return Err(Error::Config(format!("se_length must be odd, got {}", self.se_length)));
        }
        self.block_params().validate(self.target_width, self.target_height)?;
        if self.peak_pool() == 0 {
            return Err(Error::Config("peak_pool must be at least 1".into()));
        }
        self.hough.validate()?;
        let th1 = self.th1();
        if !(th1.is_finite() && th1 > 0.0) {
            return Err(Error::Config(format!("th1 must be positive, got {th1}")));
        }
        if !(self.empty_gate_penalty.is_finite() && self.empty_gate_penalty >= 0.0) {
            return Err(Error::Config(format!(
                "empty_gate_penalty must be finite and non-negative, got {}",
                self.empty_gate_penalty
            )));
        }
        Ok(())
    }

    /// Canonical text form, one `key = value` per line, with defaults resolved.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let mut kv = |k: &str, v: &dyn std::fmt::Display| {
            let _ = writeln!(s, "{k} = {v}");
        };
        kv("target_width", &self.target_width);
        kv("target_height", &self.target_height);
        kv("se_length", &self.se_length);
        kv("block_size", &self.block_size);
        kv("num_candidates", &self.num_candidates);
        kv("target_fraction", &self.target_fraction);
        kv("peak_pool", &self.peak_pool());
        kv("theta_min", &self.hough.theta_min);
        kv("theta_step", &self.hough.theta_step);
        kv("theta_bins", &self.hough.theta_bins);
        kv("rho_step", &self.hough.rho_step);
        kv("rng_seed", &self.rng_seed);
        kv("th1", &self.th1());
        kv("aggregation", &self.aggregation);
        kv("empty_gate_penalty", &self.empty_gate_penalty);
        s
    }

    /// Parses the `key = value` form. Missing keys keep their defaults;
    /// `#` starts a comment.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut cfg = PipelineConfig::default();
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::Parse {
                line: line_no,
                msg: format!("expected `key = value`, got `{line}`"),
            })?;
            cfg.set(key.trim(), value.trim())
                .map_err(|msg| Error::Parse { line: line_no, msg })?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_text(&text)
    }

    fn set(&mut self, key: &str, value: &str) -> std::result::Result<(), String> {
        fn num<T: FromStr>(key: &str, value: &str) -> std::result::Result<T, String> {
            value
                .parse()
                .map_err(|_| format!("invalid value `{value}` for `{key}`"))
        }
        fn auto<T: FromStr>(key: &str, value: &str) -> std::result::Result<Option<T>, String> {
            if value == "auto" {
                Ok(None)
            } else {
                num(key, value).map(Some)
            }
        }
        match key {
            "target_width" => self.target_width = num(key, value)?,
            "target_height" => self.target_height = num(key, value)?,
            "se_length" => self.se_length = num(key, value)?,
            "block_size" => self.block_size = num(key, value)?,
            "num_candidates" => self.num_candidates = num(key, value)?,
            "target_fraction" => self.target_fraction = num(key, value)?,
            "peak_pool" => self.peak_pool = auto(key, value)?,
            "theta_min" => self.hough.theta_min = num(key, value)?,
            "theta_step" => self.hough.theta_step = num(key, value)?,
            "theta_bins" => self.hough.theta_bins = num(key, value)?,
            "rho_step" => self.hough.rho_step = num(key, value)?,
            "rng_seed" => self.rng_seed = num(key, value)?,
            "th1" => self.th1 = auto(key, value)?,
            "aggregation" => self.aggregation = value.parse().map_err(|e: Error| e.to_string())?,
            "empty_gate_penalty" => self.empty_gate_penalty = num(key, value)?,
            other => return Err(format!("unknown config key `{other}`")),
        }
        Ok(())
    }

    /// First 16 hex digits of the SHA-256 of the canonical text form.
    pub fn fingerprint(&self) -> String {
        let digest = Sha256::digest(self.to_text().as_bytes());
        digest[..8].iter().map(|b| format!("{b:02x}")).collect()
    }
}
