//! Golden-section search over a temperature interval.
//!
//! Every objective evaluation may be a round of private queries, so the search runs
//! a fixed number of iterations and always costs exactly `K + 2` evaluations.

use crate::{Error, Result};

/// (√5 − 1)/2. With this ratio the carried interior point lands exactly where a fresh
/// one would, so each iteration shrinks the interval by the same factor.
pub const GOLDEN_RATIO: f64 = 0.618_033_988_749_894_9;

/// Three-decimal truncation used by the original Acc-T pseudocode. The carried
/// point then sits slightly off its ideal position and the error grows by about
/// 1.618 per iteration: the final width is within 0.05% of `0.618^K` for K ≤ 5, but
/// interior points can cross beyond K ≈ 15.
pub const TRUNCATED_RATIO: f64 = 0.618;

pub const DEFAULT_T_MIN: f64 = 0.5;
pub const DEFAULT_T_MAX: f64 = 3.0;
pub const DEFAULT_ITERATIONS: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Direction {
    #[default]
    Minimize,
    Maximize,
}

/// Ratio placing the interior points.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InteriorRatio {
    #[default]
    Golden,
    /// Bit-compatible with the three-decimal 0.618 Acc-T pseudocode.
    Truncated,
}

impl InteriorRatio {
    pub fn value(self) -> f64 {
        match self {
            InteriorRatio::Golden => GOLDEN_RATIO,
            InteriorRatio::Truncated => TRUNCATED_RATIO,
        }
    }
}

impl std::str::FromStr for InteriorRatio {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "golden" | "exact" => Ok(InteriorRatio::Golden),
            "truncated" | "0.618" => Ok(InteriorRatio::Truncated),
            other => Err(Error::Config(format!("unknown interior ratio {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchConfig {
    t_min: f64,
    t_max: f64,
    iterations: usize,
    direction: Direction,
    ratio: InteriorRatio,
}

impl SearchConfig {
    pub fn new(t_min: f64, t_max: f64, iterations: usize, direction: Direction) -> Result<Self> {
        if !(t_min > 0.0 && t_min < t_max && t_max.is_finite()) {
            return Err(Error::InvalidInterval { t_min, t_max });
        }
        if iterations == 0 {
            return Err(Error::ZeroIterations);
        }
        Ok(Self {
            t_min,
            t_max,
            iterations,
            direction,
            ratio: InteriorRatio::Golden,
        })
    }

    pub fn with_ratio(mut self, ratio: InteriorRatio) -> Self {
        self.ratio = ratio;
        self
    }

    pub fn with_direction(mut self, direction: Direction) -> Self {
        self.direction = direction;
        self
    }

    pub fn ratio(&self) -> InteriorRatio {
        self.ratio
    }

    pub fn minimize(t_min: f64, t_max: f64, iterations: usize) -> Result<Self> {
        Self::new(t_min, t_max, iterations, Direction::Minimize)
    }

    pub fn t_min(&self) -> f64 {
        self.t_min
    }

    pub fn t_max(&self) -> f64 {
        self.t_max
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    pub fn direction(&self) -> Direction {
        self.direction
    }

    /// Objective evaluations one search performs: two initial points plus one per iteration.
    pub fn evaluations(&self) -> usize {
        self.iterations + 2
    }

    /// Width of the final bracketing interval, `(t_max − t_min)·r^K`. Exact for the
    /// golden ratio; approximate for the truncated one.
    pub fn final_width(&self) -> f64 {
        (self.t_max - self.t_min) * self.ratio.value().powi(self.iterations as i32)
    }
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            t_min: DEFAULT_T_MIN,
            t_max: DEFAULT_T_MAX,
            iterations: DEFAULT_ITERATIONS,
            direction: Direction::Minimize,
            ratio: InteriorRatio::Golden,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchOutcome {
    /// Midpoint of the final interval.
    pub optimum: f64,
    pub evaluations: usize,
    /// Bracketing interval before the first iteration and after each one (K + 1 entries).
    pub intervals: Vec<(f64, f64)>,
}

impl SearchOutcome {
    pub fn final_interval(&self) -> (f64, f64) {
        *self.intervals.last().expect("at least the initial interval")
    }
}

/// Runs `K` golden-section iterations on `objective`.
///
/// When the value at the left interior point is no better than at the right one,
/// the left end segment is discarded (ties keep the right segment); otherwise the
/// right end segment is. Objective errors abort the search.
pub fn golden_section<E, F>(cfg: &SearchConfig, mut objective: F) -> std::result::Result<SearchOutcome, E>
where
    F: FnMut(f64) -> std::result::Result<f64, E>,
{
    let sign = match cfg.direction {
        Direction::Minimize => 1.0,
        Direction::Maximize => -1.0,
    };
    let mut evaluations = 0;
    let mut eval = |t: f64| {
        evaluations += 1;
        objective(t).map(|v| sign * v)
    };

    let r = cfg.ratio.value();
    let (mut lo, mut hi) = (cfg.t_min, cfg.t_max);
    let mut t0 = hi - (hi - lo) * r;
    let mut t1 = lo + (hi - lo) * r;
    let mut v0 = eval(t0)?;
    let mut v1 = eval(t1)?;
    let mut intervals = Vec::with_capacity(cfg.iterations + 1);
    intervals.push((lo, hi));

    for _ in 0..cfg.iterations {
        if v0 >= v1 {
            lo = t0;
            t0 = t1;
            v0 = v1;
            t1 = lo + (hi - lo) * r;
            v1 = eval(t1)?;
        } else {
            hi = t1;
            t1 = t0;
            v1 = v0;
            t0 = hi - (hi - lo) * r;
            v0 = eval(t0)?;
        }
        intervals.push((lo, hi));
    }

    Ok(SearchOutcome {
        optimum: (lo + hi) / 2.0,
        evaluations,
        intervals,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::convert::Infallible;

    fn run(cfg: &SearchConfig, f: impl Fn(f64) -> f64) -> SearchOutcome {
        golden_section::<Infallible, _>(cfg, |t| Ok(f(t))).unwrap()
    }

    #[test]
    fn config_validation() {
        assert!(matches!(
            SearchConfig::minimize(3.0, 0.5, 5),
            Err(Error::InvalidInterval { .. })
        ));
        assert!(SearchConfig::minimize(0.0, 1.0, 5).is_err());
        assert!(SearchConfig::minimize(1.0, 1.0, 5).is_err());
        assert!(matches!(
            SearchConfig::minimize(0.5, 3.0, 0),
            Err(Error::ZeroIterations)
        ));
        let d = SearchConfig::default();
        assert_eq!((d.t_min(), d.t_max(), d.iterations()), (0.5, 3.0, 5));
    }

    #[test]
    fn quadratic_minimum_k20() {
        let cfg = SearchConfig::minimize(0.5, 3.0, 20).unwrap();
        let out = run(&cfg, |t| (t - 1.5).powi(2));
        let tol = 2.5 * 0.618f64.powi(20) / 2.0;
        assert!((8.1e-5..8.3e-5).contains(&tol));
        assert!((out.optimum - 1.5).abs() <= tol, "{}", out.optimum);
        assert_eq!(out.evaluations, 22);
    }

    #[test]
    fn final_width_identity() {
        for k in 1..=25 {
            for target in [0.7, 1.3, 2.2, 2.9] {
                let cfg = SearchConfig::minimize(0.5, 3.0, k).unwrap();
                let out = run(&cfg, |t| (t - target).abs());
                let (lo, hi) = out.final_interval();
                assert!(((hi - lo) - cfg.final_width()).abs() <= 1e-12, "k={k}");
                // Within 0.2% of the three-decimal figure up to K = 20.
                if k <= 20 {
                    let truncated = 2.5 * TRUNCATED_RATIO.powi(k as i32);
                    assert!(((hi - lo) / truncated - 1.0).abs() < 2e-3, "k={k}");
                }
            }
        }
    }

    #[test]
    fn truncated_ratio_width_drift_is_small_at_k5() {
        for k in 1..=5 {
            for target in [0.6, 1.1, 1.9, 2.2, 2.95] {
                let cfg = SearchConfig::minimize(0.5, 3.0, k)
                    .unwrap()
                    .with_ratio(InteriorRatio::Truncated);
                let out = run(&cfg, |t| (t - target).abs());
                let (lo, hi) = out.final_interval();
                assert!(((hi - lo) / cfg.final_width() - 1.0).abs() < 1e-3, "k={k}");
            }
        }
    }

    #[test]
    fn truncated_ratio_first_points_follow_pseudocode() {
        let cfg = SearchConfig::minimize(0.5, 3.0, 1)
            .unwrap()
            .with_ratio(InteriorRatio::Truncated);
        let mut points = Vec::new();
        run_recording(&cfg, &mut points, |t| (t - 2.0).powi(2));
        assert_eq!(points[0], 3.0 - 2.5 * 0.618);
        assert_eq!(points[1], 0.5 + 2.5 * 0.618);
        // Right segment kept: new upper point from the new lower bound.
        let lo = points[0];
        assert_eq!(points[2], lo + (3.0 - lo) * 0.618);
    }

    fn run_recording(cfg: &SearchConfig, points: &mut Vec<f64>, f: impl Fn(f64) -> f64) {
        golden_section::<Infallible, _>(cfg, |t| {
            points.push(t);
            Ok(f(t))
        })
        .unwrap();
    }

    #[test]
    fn increasing_objective_converges_to_left_edge() {
        let cfg = SearchConfig::minimize(0.5, 3.0, 8).unwrap();
        let out = run(&cfg, |t| t);
        assert!(out.optimum - 0.5 <= cfg.final_width() / 2.0 + 1e-12);
        assert_eq!(out.final_interval().0, 0.5);
    }

    #[test]
    fn maximize_mirrors_minimize() {
        let cfg = SearchConfig::new(0.5, 3.0, 15, Direction::Maximize).unwrap();
        let out = run(&cfg, |t| -(t - 2.0).powi(2));
        assert!((out.optimum - 2.0).abs() <= cfg.final_width() / 2.0);
    }

    #[test]
    fn ties_keep_right_segment() {
        let cfg = SearchConfig::minimize(0.5, 3.0, 1).unwrap();
        let out = run(&cfg, |_| 0.0);
        let t0 = 3.0 - 2.5 * GOLDEN_RATIO;
        assert_eq!(out.final_interval(), (t0, 3.0));
    }

    #[test]
    fn objective_errors_abort() {
        let cfg = SearchConfig::default();
        let mut calls = 0;
        let r = golden_section(&cfg, |t| {
            calls += 1;
            if calls == 4 {
                Err("boom")
            } else {
                Ok(t)
            }
        });
        assert_eq!(r, Err("boom"));
        assert_eq!(calls, 4);
    }

    #[test]
    fn intervals_nest_and_contain_optimum() {
        let cfg = SearchConfig::minimize(0.5, 3.0, 12).unwrap();
        let out = run(&cfg, |t| (t.ln() - 0.3).abs());
        for w in out.intervals.windows(2) {
            let ((a0, b0), (a1, b1)) = (w[0], w[1]);
            assert!(a0 <= a1 && b1 <= b0);
        }
        for &(a, b) in &out.intervals {
            assert!(a <= out.optimum && out.optimum <= b);
        }
    }
}
