//! Statistical self-checks: Laplace moments, the neighboring-database density
//! ratio bound, and unimodality scans of the temperature objectives.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::calibration::{self, Dataset, LabeledLogits};
use crate::dp::{self, Epsilon, NoiseSpec};
use crate::{seed, Result};

/// Histogram used by the density-ratio check: 41 equal cells over [−10, 10].
pub const RATIO_CELLS: usize = 41;
pub const RATIO_RANGE: (f64, f64) = (-10.0, 10.0);
/// Cells need at least this many hits under both databases to be compared.
pub const RATIO_MIN_HITS: u64 = 1000;
/// Multiplicative slack on e^ε allowed for sampling error.
pub const RATIO_SLACK: f64 = 1.05;

/// Default temperature grid of the unimodality scans.
pub const SCAN_RANGE: (f64, f64) = (0.05, 20.0);
pub const SCAN_POINTS: usize = 200;
/// First differences at or below this magnitude count as flat.
pub const SCAN_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moments {
    pub mean: f64,
    pub variance: f64,
}

/// Sample mean and unbiased variance of `draws` Laplace(0, scale) samples.
pub fn laplace_moments(scale: f64, draws: usize, seed: u64) -> Result<Moments> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut values = Vec::with_capacity(draws);
    for _ in 0..draws {
        values.push(dp::laplace_sample(scale, &mut rng)?);
    }
    let n = draws as f64;
    let mean = values.iter().sum::<f64>() / n;
    let variance = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    Ok(Moments { mean, variance })
}

#[derive(Debug, Clone, PartialEq)]
pub struct RatioReport {
    /// Largest density ratio, in either direction, over the compared cells.
    pub max_ratio: f64,
    pub cells_compared: usize,
    /// e^ε · slack.
    pub bound: f64,
}

impl RatioReport {
    pub fn passed(&self) -> bool {
        self.cells_compared > 0 && self.max_ratio <= self.bound
    }
}

fn histogram(values: &[f64]) -> Vec<u64> {
    let (lo, hi) = RATIO_RANGE;
    let width = (hi - lo) / RATIO_CELLS as f64;
    let mut counts = vec![0u64; RATIO_CELLS];
    for &v in values {
        if (lo..hi).contains(&v) {
            counts[(((v - lo) / width) as usize).min(RATIO_CELLS - 1)] += 1;
        }
    }
    counts
}

/// Runs a counting query (Δf = 1) through the mechanism on two neighboring
/// databases whose true counts differ by one, and compares output histograms.
pub fn neighboring_ratio(epsilon: Epsilon, draws: usize, seed: u64) -> Result<RatioReport> {
    let spec = NoiseSpec::new(1.0, epsilon)?;
    let answer = |count: f64, stream: u64| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed::derive(seed, &[stream]));
        (0..draws)
            .map(|_| dp::mechanize(&[count], &spec, &mut rng)[0])
            .collect::<Vec<_>>()
    };
    let with = histogram(&answer(1.0, 1));
    let without = histogram(&answer(0.0, 2));
    let mut max_ratio: f64 = 0.0;
    let mut cells_compared = 0;
    for (&a, &b) in with.iter().zip(&without) {
        if a >= RATIO_MIN_HITS && b >= RATIO_MIN_HITS {
            cells_compared += 1;
            let (a, b) = (a as f64, b as f64);
            max_ratio = max_ratio.max(a / b).max(b / a);
        }
    }
    Ok(RatioReport {
        max_ratio,
        cells_compared,
        bound: epsilon.value().exp() * RATIO_SLACK,
    })
}

/// `points` evenly spaced temperatures over `[lo, hi]`.
pub fn temperature_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    assert!(points >= 2);
    let step = (hi - lo) / (points - 1) as f64;
    (0..points).map(|i| lo + step * i as f64).collect()
}

/// Sign changes in the first differences of `series`, skipping differences whose
/// magnitude is at most `tol`. A unimodal series has at most one.
pub fn direction_changes(series: &[f64], tol: f64) -> usize {
    let mut changes = 0;
    let mut last_sign = 0.0;
    for w in series.windows(2) {
        let d = w[1] - w[0];
        if d.abs() <= tol {
            continue;
        }
        let sign = d.signum();
        if last_sign != 0.0 && sign != last_sign {
            changes += 1;
        }
        last_sign = sign;
    }
    changes
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ScanReport {
    pub nll_changes: usize,
    pub gap_changes: usize,
}

impl ScanReport {
    pub fn passed(&self) -> bool {
        self.nll_changes <= 1 && self.gap_changes <= 1
    }
}

/// Evaluates summed NLL (clipped at `clip`) and |Acc − Conf(T)| over `grid`.
pub fn unimodality_scan(data: &Dataset, grid: &[f64], clip: f64) -> Result<ScanReport> {
    let acc = calibration::accuracy(data)?;
    let nll = grid
        .iter()
        .map(|&t| calibration::nll_sum(data, t, clip))
        .collect::<Result<Vec<_>>>()?;
    let gap = grid
        .iter()
        .map(|&t| Ok((acc - calibration::average_confidence(data, t)?).abs()))
        .collect::<Result<Vec<_>>>()?;
    Ok(ScanReport {
        nll_changes: direction_changes(&nll, SCAN_TOLERANCE),
        gap_changes: direction_changes(&gap, SCAN_TOLERANCE),
    })
}

/// A random dataset with 2..=`max_classes` classes and 1..=`max_samples` samples.
/// Logits are Normal(0, σ²) with σ drawn from [0.5, 5]; labels follow the softmax of
/// the logits scaled by a random factor, so datasets range from under- to overconfident.
pub fn random_dataset<R: Rng>(rng: &mut R, max_classes: usize, max_samples: usize) -> Dataset {
    let m = rng.random_range(2..=max_classes.max(2));
    let n = rng.random_range(1..=max_samples.max(1));
    let sigma = rng.random_range(0.5..5.0);
    let warp = rng.random_range(0.3..3.0);
    let normal = Normal::new(0.0, sigma).expect("positive sigma");
    let samples = (0..n)
        .map(|_| {
            let logits: Vec<f64> = (0..m).map(|_| normal.sample(rng)).collect();
            let max = logits.iter().cloned().fold(f64::MIN, f64::max);
            let w: Vec<f64> = logits.iter().map(|l| ((l - max) / warp).exp()).collect();
            let total: f64 = w.iter().sum();
            let mut u = rng.random::<f64>() * total;
            let mut label = m - 1;
            for (i, wi) in w.iter().enumerate() {
                if u < *wi {
                    label = i;
                    break;
                }
                u -= wi;
            }
            LabeledLogits::new(logits, label).expect("finite logits, valid label")
        })
        .collect();
    Dataset::new(samples).expect("homogeneous class count")
}

/// One named pass/fail line of [`run_checks`].
#[derive(Debug, Clone, PartialEq)]
pub struct CheckLine {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

/// The full self-check suite: Laplace moments over 10⁶ draws, the ε = 1 density
/// ratio test, and unimodality scans on `datasets` random datasets.
pub fn run_checks(master_seed: u64, datasets: usize) -> Result<Vec<CheckLine>> {
    let mut lines = Vec::new();

    let m = laplace_moments(1.0, 1_000_000, seed::derive(master_seed, &[1]))?;
    lines.push(CheckLine {
        name: "laplace-moments",
        passed: m.mean.abs() <= 0.01 && (1.9..=2.1).contains(&m.variance),
        detail: format!("mean {:.5}, variance {:.5}", m.mean, m.variance),
    });

    let r = neighboring_ratio(Epsilon::new(1.0)?, 1_000_000, seed::derive(master_seed, &[2]))?;
    lines.push(CheckLine {
        name: "dp-density-ratio",
        passed: r.passed(),
        detail: format!(
            "max ratio {:.4} over {} cells, bound {:.4}",
            r.max_ratio, r.cells_compared, r.bound
        ),
    });

    let grid = temperature_grid(SCAN_RANGE.0, SCAN_RANGE.1, SCAN_POINTS);
    let mut rng = ChaCha8Rng::seed_from_u64(seed::derive(master_seed, &[3]));
    let mut nll_fail = 0;
    let mut gap_fail = 0;
    for _ in 0..datasets {
        let data = random_dataset(&mut rng, 10, 200);
        let scan = unimodality_scan(&data, &grid, f64::INFINITY)?;
        nll_fail += usize::from(scan.nll_changes > 1);
        gap_fail += usize::from(scan.gap_changes > 1);
    }
    lines.push(CheckLine {
        name: "nll-unimodal",
        passed: nll_fail == 0,
        detail: format!("{nll_fail}/{datasets} datasets with more than one direction change"),
    });
    lines.push(CheckLine {
        name: "consistency-gap-unimodal",
        passed: gap_fail == 0,
        detail: format!("{gap_fail}/{datasets} datasets with more than one direction change"),
    });
    Ok(lines)
}
