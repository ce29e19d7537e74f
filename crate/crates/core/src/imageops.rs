//! Raster loading, resampling, and the binary gradient map.
//!
//! The pipeline runs on three raster types: [`GrayImage`] (8-bit intensities),
//! [`GradientImage`] (sum of absolute differences to the 8 compass neighbours)
//! and [`BinaryImage`] (0/1 mask). All operations here are pure.

use std::path::Path;

use crate::error::{Error, Result};

/// Offsets of the 8 compass neighbours: N, NE, E, SE, S, SW, W, NW.
const NEIGHBOURS: [(isize, isize); 8] = [(0, -1), (1, -1), (1, 0), (1, 1), (0, 1), (-1, 1), (-1, 0), (-1, -1)];

/// Row-major 8-bit single-channel raster.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    data: Vec<u8>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, data: Vec<u8>) -> Result<Self> {
        check_dims(width, height, data.len())?;
        Ok(Self { width, height, data })
    }

    pub fn from_fn(width: usize, height: usize, f: impl Fn(usize, usize) -> u8) -> Result<Self> {
        let data = (0..height)
            .flat_map(|y| (0..width).map(move |x| (x, y)))
            .map(|(x, y)| f(x, y))
            .collect();
        Self::new(width, height, data)
    }

    pub fn filled(width: usize, height: usize, value: u8) -> Result<Self> {
        Self::new(width, height, vec![value; width * height])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dimensions(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.data[y * self.width + x]
    }

    pub fn set(&mut self, x: usize, y: usize, value: u8) {
        self.data[y * self.width + x] = value;
    }
}

/// Per-pixel gradient magnitudes, each in `0..=8 * 255`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GradientImage {
    width: usize,
    height: usize,
    data: Vec<u16>,
}

impl GradientImage {
    pub fn new(width: usize, height: usize, data: Vec<u16>) -> Result<Self> {
        check_dims(width, height, data.len())?;
        if let Some(v) = data.iter().find(|&&v| v > 8 * 255) {
            return Err(Error::InvalidInput(format!("gradient value {v} exceeds 8 x 255")));
        }
        Ok(Self { width, height, data })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[u16] {
        &self.data
    }

    pub fn get(&self, x: usize, y: usize) -> u16 {
        self.data[y * self.width + x]
    }
}

/// Row-major mask whose pixels are exactly 0 or 1.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BinaryImage {
    width: usize,
    height: usize,
    data: Vec<u8>,
}

impl BinaryImage {
    pub fn new(width: usize, height: usize, data: Vec<u8>) -> Result<Self> {
        check_dims(width, height, data.len())?;
        if data.iter().any(|&v| v > 1) {
            return Err(Error::InvalidInput("binary image values must be 0 or 1".into()));
        }
        Ok(Self { width, height, data })
    }

    pub fn zeros(width: usize, height: usize) -> Result<Self> {
        Self::new(width, height, vec![0; width * height])
    }

    pub fn from_fn(width: usize, height: usize, f: impl Fn(usize, usize) -> bool) -> Result<Self> {
        let data = (0..height)
            .flat_map(|y| (0..width).map(move |x| (x, y)))
            .map(|(x, y)| f(x, y) as u8)
            .collect();
        Self::new(width, height, data)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    pub fn get(&self, x: usize, y: usize) -> bool {
        self.data[y * self.width + x] != 0
    }

    pub fn set(&mut self, x: usize, y: usize, value: bool) {
        self.data[y * self.width + x] = value as u8;
    }

    pub fn count_ones(&self) -> usize {
        self.data.iter().filter(|&&v| v != 0).count()
    }

    /// Copies out the `w`x`h` window with top-left corner `(x, y)`.
    pub fn crop(&self, x: usize, y: usize, w: usize, h: usize) -> Result<BinaryImage> {
        if w == 0 || h == 0 || x + w > self.width || y + h > self.height {
            return Err(Error::Bounds {
                x,
                y,
                size: w.max(h),
                width: self.width,
                height: self.height,
            });
        }
        let mut data = Vec::with_capacity(w * h);
        for row in y..y + h {
            let start = row * self.width + x;
            data.extend_from_slice(&self.data[start..start + w]);
        }
        Ok(BinaryImage {
            width: w,
            height: h,
            data,
        })
    }

    /// Iterates over the coordinates of set pixels in row-major order.
    pub fn ones(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let w = self.width;
        self.data
            .iter()
            .enumerate()
            .filter(|(_, &v)| v != 0)
            .map(move |(i, _)| (i % w, i / w))
    }
}

fn check_dims(width: usize, height: usize, len: usize) -> Result<()> {
    if width == 0 || height == 0 {
        return Err(Error::InvalidInput(format!("zero-sized image {width}x{height}")));
    }
    if width.checked_mul(height) != Some(len) {
        return Err(Error::InvalidInput(format!(
            "buffer of {len} pixels does not match {width}x{height}"
        )));
    }
    Ok(())
}

/// Decodes a PGM (P2/P5) or PNG file and normalizes it to `target` (width, height).
pub fn load_image(path: &Path, target: (usize, usize)) -> Result<GrayImage> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_image(&bytes, target).map_err(|e| Error::InputFormat(format!("{}: {e}", path.display())))
}

/// Decodes an in-memory PGM/PNG raster and normalizes it to `target`.
pub fn decode_image(bytes: &[u8], target: (usize, usize)) -> Result<GrayImage> {
    let dynamic = image::load_from_memory(bytes).map_err(|e| Error::InputFormat(e.to_string()))?;
    normalize_input(&dynamic, target)
}

/// Converts any decoded raster to 8-bit luma and resamples it to `target`.
pub fn normalize_input(raw: &image::DynamicImage, target: (usize, usize)) -> Result<GrayImage> {
    let luma = raw.to_luma8();
    let (w, h) = luma.dimensions();
    let gray = GrayImage::new(w as usize, h as usize, luma.into_raw())?;
    resize_bilinear(&gray, target.0, target.1)
}

/// Bilinear resampling with pixel centres aligned (half-pixel convention).
///
/// Returns the input unchanged when the dimensions already match.
pub fn resize_bilinear(img: &GrayImage, width: usize, height: usize) -> Result<GrayImage> {
    if width == 0 || height == 0 {
        return Err(Error::InvalidInput(format!(
            "zero-sized resample target {width}x{height}"
        )));
    }
    if img.dimensions() == (width, height) {
        return Ok(img.clone());
    }
    let sx = img.width as f64 / width as f64;
    let sy = img.height as f64 / height as f64;
    let sample_axis = |out: usize, scale: f64, len: usize| {
        let pos = ((out as f64 + 0.5) * scale - 0.5).clamp(0.0, (len - 1) as f64);
        let lo = pos.floor() as usize;
        let hi = (lo + 1).min(len - 1);
        (lo, hi, pos - lo as f64)
    };
    let cols: Vec<_> = (0..width).map(|x| sample_axis(x, sx, img.width)).collect();
    let mut data = Vec::with_capacity(width * height);
    for y in 0..height {
        let (y0, y1, fy) = sample_axis(y, sy, img.height);
        for &(x0, x1, fx) in &cols {
            let p = |x, y| img.get(x, y) as f64;
            let top = p(x0, y0) * (1.0 - fx) + p(x1, y0) * fx;
            let bottom = p(x0, y1) * (1.0 - fx) + p(x1, y1) * fx;
            let v = top * (1.0 - fy) + bottom * fy;
            data.push((v + 0.5).floor().clamp(0.0, 255.0) as u8);
        }
    }
    GrayImage::new(width, height, data)
}

/// Sum of absolute intensity differences to the 8 compass neighbours.
///
/// Neighbours outside the image contribute nothing.
pub fn gradient_8dir(img: &GrayImage) -> GradientImage {
    let (w, h) = img.dimensions();
    let mut data = Vec::with_capacity(w * h);
    for y in 0..h {
        for x in 0..w {
            let centre = img.get(x, y) as i32;
            let mut sum = 0u16;
            for &(dx, dy) in &NEIGHBOURS {
                let (nx, ny) = (x as isize + dx, y as isize + dy);
                if nx < 0 || ny < 0 || nx >= w as isize || ny >= h as isize {
                    continue;
                }
                let n = img.get(nx as usize, ny as usize) as i32;
                sum += (n - centre).unsigned_abs() as u16;
            }
            data.push(sum);
        }
    }
    GradientImage {
        width: w,
        height: h,
        data,
    }
}

/// Threshold value `(mean + median) / 2` of a gradient image.
pub fn gradient_threshold(grad: &GradientImage) -> f64 {
    let n = grad.data.len();
    let mean = grad.data.iter().map(|&v| v as u64).sum::<u64>() as f64 / n as f64;

    // Values are bounded by 2040, so a histogram gives exact order statistics.
    let mut hist = vec![0usize; 8 * 255 + 1];
    for &v in &grad.data {
        hist[v as usize] += 1;
    }
    let order_stat = |k: usize| {
        let mut seen = 0;
        for (value, &count) in hist.iter().enumerate() {
            seen += count;
            if seen > k {
                return value as f64;
            }
        }
        unreachable!("k < n")
    };
    let median = if n % 2 == 1 {
        order_stat(n / 2)
    } else {
        (order_stat(n / 2 - 1) + order_stat(n / 2)) / 2.0
    };
    (mean + median) / 2.0
}

/// Sets exactly the pixels whose gradient strictly exceeds the mean/median threshold.
pub fn binary_threshold(grad: &GradientImage) -> BinaryImage {
    let t = gradient_threshold(grad);
    BinaryImage {
        width: grad.width,
        height: grad.height,
        data: grad.data.iter().map(|&v| (v as f64 > t) as u8).collect(),
    }
}

/// Dilation by a horizontal then a vertical line structuring element of odd length.
pub fn dilate_linear(bin: &BinaryImage, se_length: usize) -> Result<BinaryImage> {
    if se_length == 0 || se_length.is_multiple_of(2) {
        return Err(Error::Config(format!(
            "structuring element length must be odd and positive, got {se_length}"
        )));
    }
    let r = se_length / 2;
    let (w, h) = (bin.width, bin.height);

    let mut horizontal = vec![0u8; w * h];
    for y in 0..h {
        let row = &bin.data[y * w..(y + 1) * w];
        for x in 0..w {
            let lo = x.saturating_sub(r);
            let hi = (x + r).min(w - 1);
            horizontal[y * w + x] = row[lo..=hi].iter().any(|&v| v != 0) as u8;
        }
    }

    let mut out = vec![0u8; w * h];
    for y in 0..h {
        let lo = y.saturating_sub(r);
        let hi = (y + r).min(h - 1);
        for x in 0..w {
            out[y * w + x] = (lo..=hi).any(|yy| horizontal[yy * w + x] != 0) as u8;
        }
    }
    Ok(BinaryImage {
        width: w,
        height: h,
        data: out,
    })
}
