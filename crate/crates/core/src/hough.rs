//! Standard Hough transform of a block and selection of its feature peaks.
//!
//! A set pixel at block-local `(x, y)` votes, for every θ sample, into the
//! ρ bin nearest to `x cos θ + y sin θ`. From the accumulator the `m`
//! strongest cells are taken, their mean `(ρ, θ)` is computed, and the two
//! cells closest to that mean become the block's feature.

use crate::error::{Error, Result};
use crate::imageops::BinaryImage;

/// Quantization of the (ρ, θ) parameter space.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HoughConfig {
    /// First θ sample, degrees.
    pub theta_min: f64,
    pub theta_step: f64,
    pub theta_bins: usize,
    /// ρ bin width, pixels.
    pub rho_step: f64,
}

impl Default for HoughConfig {
    fn default() -> Self {
        Self {
            theta_min: -90.0,
            theta_step: 1.0,
            theta_bins: 180,
            rho_step: 1.0,
        }
    }
}

impl HoughConfig {
    pub fn validate(&self) -> Result<()> {
        let finite = self.theta_min.is_finite() && self.theta_step.is_finite() && self.rho_step.is_finite();
        if !finite || self.theta_step <= 0.0 || self.rho_step <= 0.0 || self.theta_bins == 0 {
            return Err(Error::Config(format!("invalid Hough quantization {self:?}")));
        }
        let span = self.theta_bins as f64 * self.theta_step;
        if span > 180.0 + 1e-9 || self.theta_min < -90.0 || self.theta_min + span > 90.0 + 1e-9 {
            return Err(Error::Config(format!(
                "theta samples must stay within [-90, 90) degrees, got {} + {} x {}",
                self.theta_min, self.theta_bins, self.theta_step
            )));
        }
        Ok(())
    }

    /// θ of sample `i`, in degrees.
    pub fn theta_at(&self, i: usize) -> f64 {
        self.theta_min + i as f64 * self.theta_step
    }

    /// Number of ρ bins on each side of ρ = 0 for a square block of `block_size`.
    pub fn rho_half_bins(&self, block_size: usize) -> usize {
        let extent = (std::f64::consts::SQRT_2 * block_size as f64).ceil();
        (extent / self.rho_step).ceil() as usize
    }

    /// Largest representable |ρ| for a block of `block_size`, in pixels.
    pub fn rho_max(&self, block_size: usize) -> f64 {
        self.rho_half_bins(block_size) as f64 * self.rho_step
    }
}

/// ρ x θ vote matrix, stored row-major by ρ bin.
#[derive(Clone, Debug, PartialEq)]
pub struct HoughAccumulator {
    rho_bins: usize,
    theta_bins: usize,
    rho_offset: usize,
    cfg: HoughConfig,
    votes: Vec<u32>,
}

impl HoughAccumulator {
    pub fn zeros(block_size: usize, cfg: &HoughConfig) -> Self {
        let rho_offset = cfg.rho_half_bins(block_size);
        let rho_bins = 2 * rho_offset + 1;
        Self {
            rho_bins,
            theta_bins: cfg.theta_bins,
            rho_offset,
            cfg: *cfg,
            votes: vec![0; rho_bins * cfg.theta_bins],
        }
    }

    pub fn rho_bins(&self) -> usize {
        self.rho_bins
    }

    pub fn theta_bins(&self) -> usize {
        self.theta_bins
    }

    /// Index of the ρ = 0 row.
    pub fn rho_offset(&self) -> usize {
        self.rho_offset
    }

    pub fn votes(&self) -> &[u32] {
        &self.votes
    }

    pub fn get(&self, rho_idx: usize, theta_idx: usize) -> u32 {
        self.votes[rho_idx * self.theta_bins + theta_idx]
    }

    pub fn rho_at(&self, rho_idx: usize) -> f64 {
        (rho_idx as f64 - self.rho_offset as f64) * self.cfg.rho_step
    }

    pub fn theta_at(&self, theta_idx: usize) -> f64 {
        self.cfg.theta_at(theta_idx)
    }

    /// Row index of the bin whose centre is `rho`, if it exists.
    pub fn rho_index(&self, rho: f64) -> Option<usize> {
        let idx = (rho / self.cfg.rho_step).round() as i64 + self.rho_offset as i64;
        (0..self.rho_bins as i64).contains(&idx).then_some(idx as usize)
    }

    /// Column index of the θ sample equal to `theta`, if it exists.
    pub fn theta_index(&self, theta: f64) -> Option<usize> {
        let idx = ((theta - self.cfg.theta_min) / self.cfg.theta_step).round() as i64;
        (0..self.theta_bins as i64).contains(&idx).then_some(idx as usize)
    }

    pub fn total_votes(&self) -> u64 {
        self.votes.iter().map(|&v| v as u64).sum()
    }

    pub fn max_votes(&self) -> u32 {
        self.votes.iter().copied().max().unwrap_or(0)
    }
}

/// An accumulator cell: signed ρ in pixels, θ in degrees, and its vote count.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Peak {
    pub rho: f64,
    pub theta: f64,
    pub votes: u32,
}

pub fn hough_transform(block: &BinaryImage, cfg: &HoughConfig) -> Result<HoughAccumulator> {
    if block.width() != block.height() {
        return Err(Error::InvalidInput(format!(
            "Hough block must be square, got {}x{}",
            block.width(),
            block.height()
        )));
    }
    cfg.validate()?;
    let mut acc = HoughAccumulator::zeros(block.width(), cfg);
    let trig: Vec<(f64, f64)> = (0..cfg.theta_bins)
        .map(|i| {
            let t = cfg.theta_at(i).to_radians();
            (t.cos(), t.sin())
        })
        .collect();
    let offset = acc.rho_offset as i64;
    let stride = acc.theta_bins;
    for (x, y) in block.ones() {
        let (x, y) = (x as f64, y as f64);
        for (col, &(cos, sin)) in trig.iter().enumerate() {
            let rho = x * cos + y * sin;
            // f64::round breaks ties away from zero
            let row = ((rho / cfg.rho_step).round() as i64 + offset) as usize;
            acc.votes[row * stride + col] += 1;
        }
    }
    Ok(acc)
}

/// Up to `m` nonzero cells, by votes descending, then ρ ascending, then θ ascending.
pub fn top_peaks(acc: &HoughAccumulator, m: usize) -> Vec<Peak> {
    let mut cells: Vec<(u32, usize)> = acc
        .votes
        .iter()
        .enumerate()
        .filter(|(_, &v)| v > 0)
        .map(|(i, &v)| (v, i))
        .collect();
    // Row-major index order is (ρ, θ) order, so the index is the tie-break.
    let by_rank = |a: &(u32, usize), b: &(u32, usize)| b.0.cmp(&a.0).then(a.1.cmp(&b.1));
    if cells.len() > m && m > 0 {
        cells.select_nth_unstable_by(m - 1, by_rank);
        cells.truncate(m);
    }
    cells.sort_unstable_by(by_rank);
    cells.truncate(m);
    cells
        .into_iter()
        .map(|(votes, i)| Peak {
            rho: acc.rho_at(i / acc.theta_bins),
            theta: acc.theta_at(i % acc.theta_bins),
            votes,
        })
        .collect()
}

/// Centre of the peak pool in (ρ, θ).
///
/// This is single-cluster k-means: with one centroid the assignment step is
/// trivial and the update step lands on the mean, so it converges immediately.
pub fn peak_centroid(peaks: &[Peak]) -> Result<(f64, f64)> {
    if peaks.is_empty() {
        return Err(Error::Precondition("peak centroid of an empty pool"));
    }
    let n = peaks.len() as f64;
    let rho = peaks.iter().map(|p| p.rho).sum::<f64>() / n;
    let theta = peaks.iter().map(|p| p.theta).sum::<f64>() / n;
    Ok((rho, theta))
}

fn centroid_distance(p: &Peak, centroid: (f64, f64)) -> f64 {
    (p.rho - centroid.0).hypot(p.theta - centroid.1)
}

/// The two peaks nearest to `centroid` in raw (pixel, degree) units.
///
/// Ties go to more votes, then smaller ρ, then smaller θ. A lone peak is
/// returned twice.
pub fn select_nearest_two(peaks: &[Peak], centroid: (f64, f64)) -> Result<[Peak; 2]> {
    if peaks.is_empty() {
        return Err(Error::Precondition("nearest peaks of an empty pool"));
    }
    let mut ranked: Vec<(f64, &Peak)> = peaks.iter().map(|p| (centroid_distance(p, centroid), p)).collect();
    ranked.sort_by(|(da, a), (db, b)| {
        da.total_cmp(db)
            .then(b.votes.cmp(&a.votes))
            .then(a.rho.total_cmp(&b.rho))
            .then(a.theta.total_cmp(&b.theta))
    });
    let first = *ranked[0].1;
    let second = ranked.get(1).map_or(first, |r| *r.1);
    Ok([first, second])
}

/// Full per-block feature: transform, top-`pool` peaks, centroid, nearest two.
///
/// Returns `None` when the block has no set pixels.
pub fn block_feature(block: &BinaryImage, cfg: &HoughConfig, pool: usize) -> Result<Option<[Peak; 2]>> {
    let acc = hough_transform(block, cfg)?;
    let peaks = top_peaks(&acc, pool.max(1));
    if peaks.is_empty() {
        return Ok(None);
    }
    let centroid = peak_centroid(&peaks)?;
    select_nearest_two(&peaks, centroid).map(Some)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn peak(rho: f64, theta: f64, votes: u32) -> Peak {
        Peak { rho, theta, votes }
    }

    fn line_block(f: impl Fn(usize, usize) -> bool) -> BinaryImage {
        BinaryImage::from_fn(16, 16, f).unwrap()
    }

    #[test]
    fn config_validation() {
        assert!(HoughConfig::default().validate().is_ok());
        let bad = [
            HoughConfig {
                theta_step: 0.0,
                ..Default::default()
            },
            HoughConfig {
                rho_step: -1.0,
                ..Default::default()
            },
            HoughConfig {
                theta_bins: 181,
                ..Default::default()
            },
            HoughConfig {
                theta_min: -91.0,
                ..Default::default()
            },
            HoughConfig {
                theta_bins: 0,
                ..Default::default()
            },
        ];
        for cfg in bad {
            assert!(cfg.validate().is_err(), "{cfg:?}");
        }
    }

    #[test]
    fn accumulator_shape() {
        let acc = HoughAccumulator::zeros(16, &HoughConfig::default());
        // ceil(sqrt(2) * 16) = 23
        assert_eq!(acc.rho_offset(), 23);
        assert_eq!(acc.rho_bins(), 47);
        assert_eq!(acc.theta_bins(), 180);
        assert_eq!(acc.theta_at(0), -90.0);
        assert_eq!(acc.theta_at(179), 89.0);
    }

    #[test]
    fn empty_block_has_no_votes() {
        let acc = hough_transform(&BinaryImage::zeros(16, 16).unwrap(), &HoughConfig::default()).unwrap();
        assert_eq!(acc.total_votes(), 0);
        assert!(top_peaks(&acc, 16).is_empty());
        assert!(
            block_feature(&BinaryImage::zeros(16, 16).unwrap(), &HoughConfig::default(), 16)
                .unwrap()
                .is_none()
        );
    }

    #[test]
    fn non_square_block_rejected() {
        let b = BinaryImage::zeros(16, 8).unwrap();
        assert!(hough_transform(&b, &HoughConfig::default()).is_err());
    }

    #[test]
    fn vertical_line_peaks_at_theta_zero() {
        let acc = hough_transform(&line_block(|x, _| x == 5), &HoughConfig::default()).unwrap();
        let (r, t) = (acc.rho_index(5.0).unwrap(), acc.theta_index(0.0).unwrap());
        assert_eq!(acc.get(r, t), 16);
        assert_eq!(acc.max_votes(), 16);
    }

    #[test]
    fn diagonal_line_peaks_at_minus_45() {
        let acc = hough_transform(&line_block(|x, y| x == y), &HoughConfig::default()).unwrap();
        let (r, t) = (acc.rho_index(0.0).unwrap(), acc.theta_index(-45.0).unwrap());
        assert_eq!(acc.get(r, t), 16);
        assert_eq!(acc.max_votes(), 16);
    }

    #[test]
    fn top_peaks_single_cell() {
        let b = BinaryImage::from_fn(16, 16, |x, y| (x, y) == (0, 0)).unwrap();
        let acc = hough_transform(&b, &HoughConfig::default()).unwrap();
        // The origin pixel votes rho = 0 in every column.
        let peaks = top_peaks(&acc, 5);
        assert_eq!(peaks.len(), 5);
        assert!(peaks.iter().all(|p| p.rho == 0.0 && p.votes == 1));
        assert_eq!(peaks[0].theta, -90.0);

        let one = HoughConfig {
            theta_bins: 1,
            theta_min: 0.0,
            ..Default::default()
        };
        let acc = hough_transform(&b, &one).unwrap();
        assert_eq!(top_peaks(&acc, 5), vec![peak(0.0, 0.0, 1)]);
    }

    #[test]
    fn centroid_examples() {
        assert!(peak_centroid(&[]).is_err());
        assert_eq!(peak_centroid(&[peak(7.0, 30.0, 1)]).unwrap(), (7.0, 30.0));
        let p = [peak(0.0, 0.0, 1), peak(10.0, 0.0, 1), peak(20.0, 0.0, 1)];
        assert_eq!(peak_centroid(&p).unwrap(), (10.0, 0.0));
        let p = [peak(3.0, -10.0, 1), peak(5.0, 20.0, 1), peak(10.0, 50.0, 1)];
        assert_eq!(peak_centroid(&p).unwrap(), (6.0, 20.0));
    }

    #[test]
    fn nearest_two_examples() {
        assert!(select_nearest_two(&[], (0.0, 0.0)).is_err());

        let two = [peak(9.0, 0.0, 3), peak(1.0, 0.0, 3)];
        assert_eq!(select_nearest_two(&two, (0.0, 0.0)).unwrap(), [two[1], two[0]]);

        let three = [peak(20.0, 0.0, 4), peak(10.0, 0.0, 4), peak(0.0, 0.0, 4)];
        let got = select_nearest_two(&three, (10.0, 0.0)).unwrap();
        assert_eq!(got, [peak(10.0, 0.0, 4), peak(0.0, 0.0, 4)]);

        let lone = [peak(7.0, 30.0, 2)];
        assert_eq!(select_nearest_two(&lone, (7.0, 30.0)).unwrap(), [lone[0], lone[0]]);
    }

    #[test]
    fn nearest_two_prefers_more_votes_on_distance_tie() {
        let p = [peak(0.0, 0.0, 2), peak(20.0, 0.0, 9), peak(10.0, 0.0, 1)];
        let got = select_nearest_two(&p, (10.0, 0.0)).unwrap();
        assert_eq!(got[1], peak(20.0, 0.0, 9));
    }
}
