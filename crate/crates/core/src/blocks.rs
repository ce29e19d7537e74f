//! Random significant-block selection over a binary gradient map.
//!
//! Candidates are square windows whose top-left corner is drawn uniformly
//! from a [`ChaCha8Rng`] seeded with the caller's seed; for every candidate
//! the generator is asked for the column first, then the row. A candidate is
//! admitted when its white fraction strictly exceeds the global white
//! fraction of the map and it has strictly more white pixels than every
//! currently selected block it overlaps, which it then replaces.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::imageops::BinaryImage;

/// A located square region of the binary map.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Block {
    pub x: usize,
    pub y: usize,
    pub size: usize,
    pub white_count: u32,
}

impl Block {
    pub fn area(&self) -> usize {
        self.size * self.size
    }

    pub fn overlaps(&self, other: &Block) -> bool {
        self.x < other.x + other.size
            && other.x < self.x + self.size
            && self.y < other.y + other.size
            && other.y < self.y + self.size
    }

    pub fn white_fraction(&self) -> f64 {
        self.white_count as f64 / self.area() as f64
    }
}

/// Selected blocks, pairwise disjoint and sorted by `(y, x)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlockSet {
    pub blocks: Vec<Block>,
    pub image_dims: (usize, usize),
}

impl BlockSet {
    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Block> {
        self.blocks.iter()
    }

    pub fn covered_area(&self) -> usize {
        self.blocks.iter().map(Block::area).sum()
    }
}

/// Integral image of a binary map: `(width + 1) x (height + 1)` cumulative counts.
#[derive(Clone, Debug)]
pub struct SummedAreaTable {
    width: usize,
    height: usize,
    sums: Vec<u32>,
}

impl SummedAreaTable {
    pub fn new(bin: &BinaryImage) -> Self {
        let (w, h) = (bin.width(), bin.height());
        let stride = w + 1;
        let mut sums = vec![0u32; stride * (h + 1)];
        for y in 0..h {
            let mut row = 0u32;
            for x in 0..w {
                row += bin.get(x, y) as u32;
                sums[(y + 1) * stride + x + 1] = sums[y * stride + x + 1] + row;
            }
        }
        Self {
            width: w,
            height: h,
            sums,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    /// Number of set pixels in `[0, x) x [0, y)`.
    pub fn at(&self, x: usize, y: usize) -> u32 {
        self.sums[y * (self.width + 1) + x]
    }

    pub fn total(&self) -> u32 {
        self.at(self.width, self.height)
    }

    /// Set pixels in the `w`x`h` rectangle at `(x, y)`. The rectangle must lie inside the image.
    pub fn rect_sum(&self, x: usize, y: usize, w: usize, h: usize) -> u32 {
        debug_assert!(x + w <= self.width && y + h <= self.height);
        self.at(x + w, y + h) + self.at(x, y) - self.at(x + w, y) - self.at(x, y + h)
    }

    fn check_square(&self, x: usize, y: usize, size: usize) -> Result<()> {
        if size == 0 || x + size > self.width || y + size > self.height {
            return Err(Error::Bounds {
                x,
                y,
                size,
                width: self.width,
                height: self.height,
            });
        }
        Ok(())
    }

    /// The block at `(x, y)` with its white count filled in.
    pub fn block(&self, x: usize, y: usize, size: usize) -> Result<Block> {
        self.check_square(x, y, size)?;
        Ok(Block {
            x,
            y,
            size,
            white_count: self.rect_sum(x, y, size, size),
        })
    }

    /// White pixels in the square at `(x, y)` divided by its area.
    pub fn white_fraction(&self, x: usize, y: usize, size: usize) -> Result<f64> {
        Ok(self.block(x, y, size)?.white_fraction())
    }
}

pub fn build_sat(bin: &BinaryImage) -> SummedAreaTable {
    SummedAreaTable::new(bin)
}

/// Parameters of the randomized block search.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BlockParams {
    pub block_size: usize,
    pub num_candidates: usize,
    pub target_fraction: f64,
    pub seed: u64,
}

impl Default for BlockParams {
    fn default() -> Self {
        Self {
            block_size: 16,
            num_candidates: 500_000,
            target_fraction: 0.25,
            seed: 0,
        }
    }
}

impl BlockParams {
    pub fn validate(&self, width: usize, height: usize) -> Result<()> {
        if self.block_size == 0 || self.block_size > width.min(height) {
            return Err(Error::Config(format!(
                "block size {} does not fit a {width}x{height} image",
                self.block_size
            )));
        }
        if self.num_candidates == 0 {
            return Err(Error::Config("num_candidates must be at least 1".into()));
        }
        if !(self.target_fraction > 0.0 && self.target_fraction <= 1.0) {
            return Err(Error::Config(format!(
                "target_fraction must lie in (0, 1], got {}",
                self.target_fraction
            )));
        }
        Ok(())
    }
}

/// Upper bound on the number of retained blocks: the target fraction of the
/// non-overlapping tiling count.
pub fn target_block_count(width: usize, height: usize, block_size: usize, target_fraction: f64) -> usize {
    let tiles = (width / block_size) * (height / block_size);
    (target_fraction * tiles as f64).round() as usize
}

/// Selected blocks indexed by the grid cell containing their origin.
///
/// Two blocks whose origins share a `size`x`size` cell always overlap, so a
/// disjoint selection holds at most one block per cell, and any block that
/// overlaps a candidate has its origin in one of the 3x3 cells around the
/// candidate's cell.
struct OriginGrid {
    cols: usize,
    rows: usize,
    size: usize,
    cells: Vec<Option<Block>>,
}

impl OriginGrid {
    fn new(width: usize, height: usize, size: usize) -> Self {
        let cols = width / size + 1;
        let rows = height / size + 1;
        Self {
            cols,
            rows,
            size,
            cells: vec![None; cols * rows],
        }
    }

    /// Collects the cells of all selected blocks overlapping `cand` into `out`.
    /// Returns false if any of them has at least as many white pixels.
    fn admits(&self, cand: &Block, out: &mut Vec<usize>) -> bool {
        out.clear();
        let cx = cand.x / self.size;
        let cy = cand.y / self.size;
        for gy in cy.saturating_sub(1)..=(cy + 1).min(self.rows - 1) {
            for gx in cx.saturating_sub(1)..=(cx + 1).min(self.cols - 1) {
                let idx = gy * self.cols + gx;
                if let Some(b) = &self.cells[idx] {
                    if b.overlaps(cand) {
                        if b.white_count >= cand.white_count {
                            return false;
                        }
                        out.push(idx);
                    }
                }
            }
        }
        true
    }

    fn insert(&mut self, block: Block) {
        let idx = (block.y / self.size) * self.cols + block.x / self.size;
        debug_assert!(self.cells[idx].is_none());
        self.cells[idx] = Some(block);
    }

    fn into_blocks(self) -> Vec<Block> {
        self.cells.into_iter().flatten().collect()
    }
}

pub fn select_significant_blocks(bin: &BinaryImage, params: &BlockParams) -> Result<BlockSet> {
    let (w, h) = (bin.width(), bin.height());
    params.validate(w, h)?;
    let size = params.block_size;
    let sat = SummedAreaTable::new(bin);

    // white_count / size^2 > total / (w * h), compared exactly in integers.
    let total = sat.total() as u64;
    let image_area = (w * h) as u64;
    let block_area = (size * size) as u64;
    let significant = |count: u32| count as u64 * image_area > total * block_area;

    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let max_x = w - size;
    let max_y = h - size;
    let mut grid = OriginGrid::new(w, h, size);
    let mut overlapped = Vec::with_capacity(9);

    for _ in 0..params.num_candidates {
        let x = rng.random_range(0..=max_x);
        let y = rng.random_range(0..=max_y);
        let count = sat.rect_sum(x, y, size, size);
        if !significant(count) {
            continue;
        }
        let cand = Block {
            x,
            y,
            size,
            white_count: count,
        };
        if !grid.admits(&cand, &mut overlapped) {
            continue;
        }
        for &idx in &overlapped {
            grid.cells[idx] = None;
        }
        grid.insert(cand);
    }

    let mut blocks = grid.into_blocks();
    let n_target = target_block_count(w, h, size, params.target_fraction);
    if blocks.len() > n_target {
        blocks.sort_by(|a, b| {
            b.white_count
                .cmp(&a.white_count)
                .then(a.y.cmp(&b.y))
                .then(a.x.cmp(&b.x))
        });
        blocks.truncate(n_target);
    }
    blocks.sort_by_key(|b| (b.y, b.x));
    Ok(BlockSet {
        blocks,
        image_dims: (w, h),
    })
}
