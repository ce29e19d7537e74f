//! PGM renderings of intermediate pipeline stages.

use std::fmt::Write as _;
use std::io::{self, Write};

use crate::blocks::BlockSet;
use crate::hough::HoughAccumulator;
use crate::imageops::{BinaryImage, GradientImage, GrayImage};

/// Binary (P5) PGM with maxval 255.
pub fn write_pgm_p5<W: Write>(mut sink: W, width: usize, height: usize, data: &[u8]) -> io::Result<()> {
    write!(sink, "P5\n{width} {height}\n255\n")?;
    sink.write_all(data)
}

/// ASCII (P2) PGM with maxval 255, one raster row per line.
pub fn write_pgm_p2<W: Write>(mut sink: W, width: usize, height: usize, data: &[u8]) -> io::Result<()> {
    write!(sink, "P2\n{width} {height}\n255\n")?;
    for row in data.chunks(width) {
        let line: Vec<String> = row.iter().map(u8::to_string).collect();
        writeln!(sink, "{}", line.join(" "))?;
    }
    Ok(())
}

/// Linear stretch of `values` onto 0..=255 by their maximum.
fn stretch(values: impl Iterator<Item = u32> + Clone) -> Vec<u8> {
    let max = values.clone().max().unwrap_or(0);
    values
        .map(|v| {
            if max == 0 {
                0
            } else {
                ((v as u64 * 255 + max as u64 / 2) / max as u64) as u8
            }
        })
        .collect()
}

pub fn gradient_raster(grad: &GradientImage) -> Vec<u8> {
    stretch(grad.data().iter().map(|&v| v as u32))
}

pub fn binary_raster(bin: &BinaryImage) -> Vec<u8> {
    bin.data().iter().map(|&v| v * 255).collect()
}

/// The grayscale image with each selected block outlined in white.
pub fn blocks_overlay(gray: &GrayImage, blocks: &BlockSet) -> GrayImage {
    let mut out = gray.clone();
    for b in blocks.iter() {
        let (x1, y1) = (b.x + b.size - 1, b.y + b.size - 1);
        for x in b.x..=x1 {
            out.set(x, b.y, 255);
            out.set(x, y1, 255);
        }
        for y in b.y..=y1 {
            out.set(b.x, y, 255);
            out.set(x1, y, 255);
        }
    }
    out
}

/// Accumulator votes stretched to 0..=255; rows are ρ bins, columns θ samples.
pub fn accumulator_raster(acc: &HoughAccumulator) -> Vec<u8> {
    stretch(acc.votes().iter().copied())
}

/// Exact vote matrix: a comment header, then one row of votes per ρ bin.
pub fn accumulator_matrix(acc: &HoughAccumulator) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "# rho_bins={} theta_bins={} rho_offset={} rho0={} theta0={}",
        acc.rho_bins(),
        acc.theta_bins(),
        acc.rho_offset(),
        acc.rho_at(0),
        acc.theta_at(0)
    );
    for r in 0..acc.rho_bins() {
        let row: Vec<String> = (0..acc.theta_bins()).map(|t| acc.get(r, t).to_string()).collect();
        let _ = writeln!(s, "{}", row.join(" "));
    }
    s
}
