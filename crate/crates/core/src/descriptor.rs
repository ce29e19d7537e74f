//! Whole-image feature extraction and the `.hfd` descriptor file format.
//!
//! ```text
//! HFD1 <config-fingerprint> <n>
//! id <image identifier>
//! x y rho1 theta1 votes1 rho2 theta2 votes2     (n lines)
//! ```

use std::io::{BufRead, Write};
use std::path::Path;

use crate::blocks::{select_significant_blocks, BlockSet};
use crate::config::PipelineConfig;
use crate::error::{Error, Result};
use crate::hough::{block_feature, Peak};
use crate::imageops::{
    binary_threshold, dilate_linear, gradient_8dir, load_image, resize_bilinear, BinaryImage, GradientImage, GrayImage,
};

const MAGIC: &str = "HFD";
const VERSION: &str = "1";

/// One significant block: its origin and the two peaks nearest the centroid.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DescriptorEntry {
    pub x: usize,
    pub y: usize,
    pub peaks: [Peak; 2],
}

#[derive(Clone, Debug, PartialEq)]
pub struct FaceDescriptor {
    pub id: String,
    pub fingerprint: String,
    pub entries: Vec<DescriptorEntry>,
}

impl FaceDescriptor {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Number of selected peaks, two per block.
    pub fn feature_len(&self) -> usize {
        2 * self.entries.len()
    }
}

/// Every intermediate product of the extraction pipeline.
#[derive(Clone, Debug)]
pub struct PipelineStages {
    pub gray: GrayImage,
    pub gradient: GradientImage,
    pub thresholded: BinaryImage,
    pub dilated: BinaryImage,
    pub blocks: BlockSet,
}

pub fn run_stages(img: &GrayImage, cfg: &PipelineConfig) -> Result<PipelineStages> {
    cfg.validate()?;
    let gray = resize_bilinear(img, cfg.target_width, cfg.target_height)?;
    let gradient = gradient_8dir(&gray);
    let thresholded = binary_threshold(&gradient);
    let dilated = dilate_linear(&thresholded, cfg.se_length)?;
    let blocks = select_significant_blocks(&dilated, &cfg.block_params())?;
    Ok(PipelineStages {
        gray,
        gradient,
        thresholded,
        dilated,
        blocks,
    })
}

/// Builds descriptor entries from already computed stages.
pub fn describe_stages(stages: &PipelineStages, id: &str, cfg: &PipelineConfig) -> Result<FaceDescriptor> {
    let mut entries = Vec::with_capacity(stages.blocks.len());
    for b in stages.blocks.iter() {
        let window = stages.dilated.crop(b.x, b.y, b.size, b.size)?;
        if let Some(peaks) = block_feature(&window, &cfg.hough, cfg.peak_pool())? {
            entries.push(DescriptorEntry { x: b.x, y: b.y, peaks });
        }
    }
    Ok(FaceDescriptor {
        id: id.to_owned(),
        fingerprint: cfg.fingerprint(),
        entries,
    })
}

pub fn extract_descriptor(img: &GrayImage, id: &str, cfg: &PipelineConfig) -> Result<FaceDescriptor> {
    let stages = run_stages(img, cfg)?;
    describe_stages(&stages, id, cfg)
}

/// Loads, normalizes and describes an image file.
pub fn extract_from_path(path: &Path, id: &str, cfg: &PipelineConfig) -> Result<FaceDescriptor> {
    cfg.validate()?;
    let img = load_image(path, cfg.target_dims())?;
    extract_descriptor(&img, id, cfg)
}

pub fn write_descriptor<W: Write>(d: &FaceDescriptor, mut sink: W) -> std::io::Result<()> {
    writeln!(sink, "{MAGIC}{VERSION} {} {}", d.fingerprint, d.entries.len())?;
    writeln!(sink, "id {}", d.id)?;
    for e in &d.entries {
        let [p, q] = &e.peaks;
        writeln!(
            sink,
            "{} {} {} {} {} {} {} {}",
            e.x, e.y, p.rho, p.theta, p.votes, q.rho, q.theta, q.votes
        )?;
    }
    Ok(())
}

pub fn descriptor_to_string(d: &FaceDescriptor) -> String {
    let mut buf = Vec::new();
    write_descriptor(d, &mut buf).expect("writing to a Vec cannot fail");
    String::from_utf8(buf).expect("descriptor text is UTF-8")
}

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

pub fn read_descriptor<R: BufRead>(source: R) -> Result<FaceDescriptor> {
    let mut lines = source.lines();
    let mut next_line = |line_no: usize| -> Result<Option<String>> {
        match lines.next() {
            None => Ok(None),
            Some(Ok(s)) => Ok(Some(s)),
            Some(Err(e)) => Err(parse_err(line_no, format!("unreadable line: {e}"))),
        }
    };

    let header = next_line(1)?.ok_or_else(|| parse_err(1, "missing header"))?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    let tag = fields.first().copied().unwrap_or("");
    let version = tag
        .strip_prefix(MAGIC)
        .ok_or_else(|| parse_err(1, format!("expected `{MAGIC}{VERSION}` header, got `{header}`")))?;
    if version != VERSION {
        return Err(Error::Version { found: tag.to_owned() });
    }
    if fields.len() != 3 {
        return Err(parse_err(1, "header must be `HFD1 <fingerprint> <count>`"));
    }
    let fingerprint = fields[1].to_owned();
    let count: usize = fields[2]
        .parse()
        .map_err(|_| parse_err(1, format!("invalid entry count `{}`", fields[2])))?;

    let id_line = next_line(2)?.ok_or_else(|| parse_err(2, "missing `id` line"))?;
    let id = match id_line.strip_prefix("id") {
        Some("") => String::new(),
        Some(rest) if rest.starts_with(' ') => rest[1..].to_owned(),
        _ => return Err(parse_err(2, format!("expected `id <label>`, got `{id_line}`"))),
    };

    let mut entries = Vec::with_capacity(count);
    for k in 0..count {
        let line_no = k + 3;
        let line = next_line(line_no)?
            .ok_or_else(|| parse_err(line_no, format!("truncated: expected {count} entries, found {k}")))?;
        entries.push(parse_entry(&line).map_err(|msg| parse_err(line_no, msg))?);
    }
    let trailing = count + 3;
    if let Some(extra) = next_line(trailing)? {
        if !extra.trim().is_empty() {
            return Err(parse_err(trailing, "unexpected content after the last entry"));
        }
    }
    Ok(FaceDescriptor {
        id,
        fingerprint,
        entries,
    })
}

fn parse_entry(line: &str) -> std::result::Result<DescriptorEntry, String> {
    let f: Vec<&str> = line.split_whitespace().collect();
    if f.len() != 8 {
        return Err(format!("expected 8 fields, got {}", f.len()));
    }
    fn field<T: std::str::FromStr>(s: &str, what: &str) -> std::result::Result<T, String> {
        s.parse().map_err(|_| format!("invalid {what} `{s}`"))
    }
    let peak = |i: usize| -> std::result::Result<Peak, String> {
        let rho: f64 = field(f[i], "rho")?;
        let theta: f64 = field(f[i + 1], "theta")?;
        if !rho.is_finite() || !theta.is_finite() {
            return Err("non-finite peak coordinate".into());
        }
        Ok(Peak {
            rho,
            theta,
            votes: field(f[i + 2], "votes")?,
        })
    };
    Ok(DescriptorEntry {
        x: field(f[0], "x")?,
        y: field(f[1], "y")?,
        peaks: [peak(2)?, peak(5)?],
    })
}

pub fn save_descriptor(d: &FaceDescriptor, path: &Path) -> Result<()> {
    std::fs::write(path, descriptor_to_string(d)).map_err(|e| Error::io(path, e))
}

pub fn load_descriptor(path: &Path) -> Result<FaceDescriptor> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_descriptor(std::io::BufReader::new(file))
}
