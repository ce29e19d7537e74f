//! Test support: synthetic line-drawing faces and brute-force reference
//! implementations that share no code with the library's fast paths.

#![allow(dead_code)]

use std::path::{Path, PathBuf};

use hough_face::descriptor::FaceDescriptor;
use hough_face::hough::HoughConfig;
use hough_face::imageops::{BinaryImage, GrayImage};
use hough_face::{Aggregation, PipelineConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn data_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests").join("data")
}

pub fn natural_images() -> Vec<PathBuf> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(data_dir().join("natural"))
        .expect("natural image fixtures")
        .map(|e| e.unwrap().path())
        .collect();
    paths.sort();
    paths
}

/// Canvas with anti-aliasing-free thick strokes.
pub struct Canvas {
    pub img: GrayImage,
}

impl Canvas {
    pub fn new(w: usize, h: usize, background: u8) -> Self {
        Self {
            img: GrayImage::filled(w, h, background).unwrap(),
        }
    }

    fn plot(&mut self, x: f64, y: f64, radius: f64, value: u8) {
        let (w, h) = self.img.dimensions();
        let r = radius.ceil() as i64;
        for dy in -r..=r {
            for dx in -r..=r {
                if ((dx * dx + dy * dy) as f64).sqrt() > radius {
                    continue;
                }
                let px = x.round() as i64 + dx;
                let py = y.round() as i64 + dy;
                if px >= 0 && py >= 0 && (px as usize) < w && (py as usize) < h {
                    self.img.set(px as usize, py as usize, value);
                }
            }
        }
    }

    pub fn line(&mut self, a: (f64, f64), b: (f64, f64), radius: f64, value: u8) {
        let steps = ((b.0 - a.0).hypot(b.1 - a.1) * 2.0).ceil().max(1.0) as usize;
        for i in 0..=steps {
            let t = i as f64 / steps as f64;
            self.plot(a.0 + t * (b.0 - a.0), a.1 + t * (b.1 - a.1), radius, value);
        }
    }

    pub fn ellipse(&mut self, c: (f64, f64), rx: f64, ry: f64, radius: f64, value: u8) {
        let n = ((rx + ry) * 4.0) as usize;
        for i in 0..n {
            let t = i as f64 / n as f64 * std::f64::consts::TAU;
            self.plot(c.0 + rx * t.cos(), c.1 + ry * t.sin(), radius, value);
        }
    }

    pub fn rect_outline(&mut self, x: usize, y: usize, w: usize, h: usize, value: u8) {
        let (x0, y0, x1, y1) = (x as f64, y as f64, (x + w - 1) as f64, (y + h - 1) as f64);
        self.line((x0, y0), (x1, y0), 0.0, value);
        self.line((x1, y0), (x1, y1), 0.0, value);
        self.line((x1, y1), (x0, y1), 0.0, value);
        self.line((x0, y1), (x0, y0), 0.0, value);
    }
}

/// Geometry of one synthetic identity.
#[derive(Clone, Debug)]
pub struct FaceParams {
    pub face_rx: f64,
    pub face_ry: f64,
    pub eye_y: f64,
    pub eye_dx: f64,
    pub eye_r: f64,
    pub brow_tilt: f64,
    pub nose_len: f64,
    pub mouth_y: f64,
    pub mouth_w: f64,
    pub mouth_tilt: f64,
    pub extra: Vec<((f64, f64), (f64, f64))>,
    pub background: u8,
    pub ink: u8,
}

impl FaceParams {
    pub fn random(identity: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(0xFACE_0000 + identity);
        let extra = (0..rng.random_range(2..5))
            .map(|_| {
                let a = (rng.random_range(8.0..84.0), rng.random_range(8.0..104.0));
                let len = rng.random_range(8.0..20.0);
                let ang: f64 = rng.random_range(0.0..std::f64::consts::PI);
                (a, (a.0 + len * ang.cos(), a.1 + len * ang.sin()))
            })
            .collect();
        Self {
            face_rx: rng.random_range(30.0..40.0),
            face_ry: rng.random_range(40.0..50.0),
            eye_y: rng.random_range(38.0..48.0),
            eye_dx: rng.random_range(12.0..20.0),
            eye_r: rng.random_range(3.0..7.0),
            brow_tilt: rng.random_range(-4.0..4.0),
            nose_len: rng.random_range(10.0..22.0),
            mouth_y: rng.random_range(78.0..90.0),
            mouth_w: rng.random_range(10.0..22.0),
            mouth_tilt: rng.random_range(-5.0..5.0),
            extra,
            background: rng.random_range(30..90),
            ink: rng.random_range(180..=255),
        }
    }
}

/// Renders a 92x112 line-drawing face, optionally shifted and brightened.
pub fn render_face(p: &FaceParams, shift: (f64, f64), brighten: i16) -> GrayImage {
    let bg = (p.background as i16 + brighten).clamp(0, 255) as u8;
    let ink = (p.ink as i16 + brighten).clamp(0, 255) as u8;
    let mut c = Canvas::new(92, 112, bg);
    let (sx, sy) = shift;
    let cx = 46.0 + sx;
    c.ellipse((cx, 56.0 + sy), p.face_rx, p.face_ry, 1.0, ink);
    for side in [-1.0, 1.0] {
        let ex = cx + side * p.eye_dx;
        let ey = p.eye_y + sy;
        c.ellipse((ex, ey), p.eye_r * 1.6, p.eye_r, 0.7, ink);
        let by = ey - p.eye_r - 5.0;
        c.line(
            (ex - 7.0, by + side * p.brow_tilt),
            (ex + 7.0, by - side * p.brow_tilt),
            0.8,
            ink,
        );
    }
    let nose_top = p.eye_y + sy + 4.0;
    c.line((cx, nose_top), (cx - 3.0, nose_top + p.nose_len), 0.7, ink);
    c.line(
        (cx - 3.0, nose_top + p.nose_len),
        (cx + 4.0, nose_top + p.nose_len),
        0.7,
        ink,
    );
    let my = p.mouth_y + sy;
    c.line(
        (cx - p.mouth_w, my - p.mouth_tilt),
        (cx + p.mouth_w, my + p.mouth_tilt),
        1.0,
        ink,
    );
    for &(a, b) in &p.extra {
        c.line((a.0 + sx, a.1 + sy), (b.0 + sx, b.1 + sy), 0.7, ink);
    }
    c.img
}

pub fn synthetic_face(identity: u64) -> GrayImage {
    render_face(&FaceParams::random(identity), (0.0, 0.0), 0)
}

pub fn write_pgm(path: &Path, img: &GrayImage) {
    let mut bytes = format!("P5\n{} {}\n255\n", img.width(), img.height()).into_bytes();
    bytes.extend_from_slice(img.data());
    std::fs::write(path, bytes).unwrap();
}

pub fn random_gray(rng: &mut ChaCha8Rng, w: usize, h: usize) -> GrayImage {
    let data = (0..w * h).map(|_| rng.random::<u8>()).collect();
    GrayImage::new(w, h, data).unwrap()
}

pub fn random_binary(rng: &mut ChaCha8Rng, w: usize, h: usize, density: f64) -> BinaryImage {
    let data = (0..w * h).map(|_| rng.random_bool(density) as u8).collect();
    BinaryImage::new(w, h, data).unwrap()
}

// ---------------------------------------------------------------------------
// Brute-force oracles
// ---------------------------------------------------------------------------

/// Gradient by direct evaluation of the eight difference terms.
pub fn oracle_gradient(img: &GrayImage) -> Vec<u16> {
    let (w, h) = img.dimensions();
    let at = |x: i64, y: i64| -> Option<i64> {
        (x >= 0 && y >= 0 && x < w as i64 && y < h as i64).then(|| img.get(x as usize, y as usize) as i64)
    };
    let mut out = vec![0u16; w * h];
    for y in 0..h as i64 {
        for x in 0..w as i64 {
            let c = at(x, y).unwrap();
            let terms = [
                at(x - 1, y),
                at(x, y - 1),
                at(x + 1, y),
                at(x, y + 1),
                at(x - 1, y + 1),
                at(x + 1, y - 1),
                at(x - 1, y - 1),
                at(x + 1, y + 1),
            ];
            let s: i64 = terms.iter().flatten().map(|n| (n - c).abs()).sum();
            out[(y as usize) * w + x as usize] = s as u16;
        }
    }
    out
}

/// Accumulator computed θ-column by θ-column, straight from the line equation.
/// Returns (rho_bins, theta_bins, votes[rho][theta]).
#[allow(clippy::needless_range_loop)]
pub fn oracle_hough(block: &BinaryImage, cfg: &HoughConfig) -> (usize, usize, Vec<Vec<u32>>) {
    let m = block.width();
    let d = (2f64.sqrt() * m as f64).ceil();
    let half = (d / cfg.rho_step).ceil() as i64;
    let rho_bins = (2 * half + 1) as usize;
    let mut votes = vec![vec![0u32; cfg.theta_bins]; rho_bins];
    for t in 0..cfg.theta_bins {
        let theta = (cfg.theta_min + t as f64 * cfg.theta_step).to_radians();
        for y in 0..m {
            for x in 0..m {
                if !block.get(x, y) {
                    continue;
                }
                let rho = x as f64 * theta.cos() + y as f64 * theta.sin();
                let q = rho / cfg.rho_step;
                // q - trunc(q) is exact, unlike q + 0.5 which can round up
                // values just below one half.
                let whole = q.trunc();
                let frac = q - whole;
                let r = if frac.abs() >= 0.5 {
                    whole + frac.signum()
                } else {
                    whole
                };
                votes[(r as i64 + half) as usize][t] += 1;
            }
        }
    }
    (rho_bins, cfg.theta_bins, votes)
}

/// Pixel count of a rectangle by direct iteration.
pub fn oracle_count(bin: &BinaryImage, x: usize, y: usize, w: usize, h: usize) -> u32 {
    let mut n = 0;
    for yy in y..y + h {
        for xx in x..x + w {
            n += bin.get(xx, yy) as u32;
        }
    }
    n
}

pub fn oracle_chi_square(a: &[f64; 4], b: &[f64; 4]) -> f64 {
    let mut s = 0.0;
    for m in 0..4 {
        let den = a[m] + b[m];
        if den != 0.0 {
            s += (a[m] - b[m]).powi(2) / den.powi(2);
        }
    }
    s
}

/// D(probe, train) evaluated as a full probe x train table.
pub fn oracle_dissimilarity(probe: &FaceDescriptor, train: &FaceDescriptor, cfg: &PipelineConfig) -> f64 {
    let rho_max = cfg.hough.rho_max(cfg.block_size);
    let feat = |e: &hough_face::descriptor::DescriptorEntry| {
        [
            e.peaks[0].rho + rho_max,
            e.peaks[0].theta + 90.0,
            e.peaks[1].rho + rho_max,
            e.peaks[1].theta + 90.0,
        ]
    };
    let th1 = cfg.th1();
    let mut table = vec![vec![None; train.entries.len()]; probe.entries.len()];
    for (k, pk) in probe.entries.iter().enumerate() {
        for (l, tl) in train.entries.iter().enumerate() {
            let dist = (((pk.x as f64 - tl.x as f64).powi(2)) + (pk.y as f64 - tl.y as f64).powi(2)).sqrt();
            if dist < th1 {
                table[k][l] = Some(oracle_chi_square(&feat(pk), &feat(tl)));
            }
        }
    }
    let mut sum = 0.0;
    for row in &table {
        let gated: Vec<f64> = row.iter().flatten().copied().collect();
        sum += if gated.is_empty() {
            cfg.empty_gate_penalty
        } else {
            match cfg.aggregation {
                Aggregation::Min => gated.iter().copied().fold(f64::INFINITY, f64::min),
                Aggregation::Max => gated.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            }
        };
    }
    sum / probe.entries.len() as f64
}

/// Index of the first minimum.
pub fn oracle_argmin(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        if v < values[best] {
            best = i;
        }
    }
    best
}
