//! Threshold selection by simulation from the pre-change regime.
//!
//! The threshold is bootstrapped: draw `reps` independent streams of `n`
//! i.i.d. samples from a Gaussian matching the signal before the change,
//! run the detection statistic over each with alarms disabled, record each
//! stream's largest statistic, and return the `rank`-th largest of those
//! maxima. The defaults (150 samples, 10 repetitions, second largest) give a
//! threshold that fresh null streams exceed roughly one time in ten.

use rayon::prelude::*;
use rand_distr::{Distribution, Normal};

use crate::detector::{Detector, DetectorConfig, DetectorError};
use crate::discriminator::DiscriminatorSpec;
use crate::seed::{self, tag};

/// Pre-change reference law: a scalar Gaussian.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianReference {
    pub mean: f64,
    pub std: f64,
}

impl Default for GaussianReference {
    fn default() -> Self {
        Self { mean: 0.0, std: 1.0 }
    }
}

/// Settings for [`calibrate`].
#[derive(Debug, Clone)]
pub struct CalibrationConfig {
    pub reference: GaussianReference,
    /// Length of each null stream.
    pub n: usize,
    /// Number of independent null streams.
    pub reps: usize,
    /// Order statistic from the top: 1 = largest, 2 = second largest, ...
    pub rank: usize,
    pub spec: DiscriminatorSpec,
    /// Same meaning as in [`DetectorConfig`]; calibration runs the exact
    /// statistic path used at detection time.
    pub warmup: usize,
    pub margin: usize,
    pub seed: u64,
    pub parallel: bool,
}

impl Default for CalibrationConfig {
    fn default() -> Self {
        Self {
            reference: GaussianReference::default(),
            n: 150,
            reps: 10,
            rank: 2,
            spec: DiscriminatorSpec::default(),
            warmup: 20,
            margin: 10,
            seed: 0,
            parallel: true,
        }
    }
}

/// Errors from [`calibrate`].
#[derive(Debug, thiserror::Error)]
pub enum CalibrationError {
    #[error("reference std must be positive, got {0}")]
    DegenerateReference(f64),
    #[error("invalid calibration config: {0}")]
    InvalidConfig(String),
    #[error("null streams of length {n} produce no statistics (warmup {warmup}, margin {margin})")]
    NoStatistics { n: usize, warmup: usize, margin: usize },
    #[error(transparent)]
    Detector(#[from] DetectorError),
}

/// Bootstrap a detection threshold from the reference law.
///
/// Deterministic given `config.seed`; replications run in parallel without
/// affecting the result.
pub fn calibrate(config: &CalibrationConfig) -> Result<f64, CalibrationError> {
    if !(config.reference.std > 0.0) {
        return Err(CalibrationError::DegenerateReference(config.reference.std));
    }
    if config.rank < 1 || config.rank > config.reps {
        return Err(CalibrationError::InvalidConfig(format!(
            "need reps >= rank >= 1, got rank {} of {} reps",
            config.rank, config.reps
        )));
    }
    if config.n <= config.warmup || config.n < 2 * config.margin {
        return Err(CalibrationError::NoStatistics {
            n: config.n,
            warmup: config.warmup,
            margin: config.margin,
        });
    }
    let one = |rep: usize| -> Result<f64, CalibrationError> {
        let mut rng = seed::rng(config.seed, &[tag::CALIBRATION, rep as u64]);
        let normal = Normal::new(config.reference.mean, config.reference.std)
            .expect("std checked positive");
        let stream: Vec<f64> = (0..config.n).map(|_| normal.sample(&mut rng)).collect();
        let mut det = Detector::new(DetectorConfig {
            threshold: f64::INFINITY,
            spec: config.spec.clone(),
            warmup: config.warmup,
            margin: config.margin,
            window_cap: None,
            seed: seed::derive(config.seed, &[tag::CALIBRATION_DETECTOR, rep as u64]),
            parallel: false,
            warm_start: false,
        })?;
        let res = det.run_scalars(stream)?;
        res.trace
            .iter()
            .map(|p| p.statistic)
            .fold(None, |acc: Option<f64>, s| Some(acc.map_or(s, |a| a.max(s))))
            .ok_or(CalibrationError::NoStatistics {
                n: config.n,
                warmup: config.warmup,
                margin: config.margin,
            })
    };
    let maxima: Vec<f64> = if config.parallel {
        (0..config.reps).into_par_iter().map(one).collect::<Result<_, _>>()?
    } else {
        (0..config.reps).map(one).collect::<Result<_, _>>()?
    };
    Ok(rank_th_largest(&maxima, config.rank))
}

/// The `rank`-th largest value (1-based). `values` must be non-empty and
/// `rank` within `1..=len`.
pub fn rank_th_largest(values: &[f64], rank: usize) -> f64 {
    assert!(!values.is_empty() && rank >= 1 && rank <= values.len());
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| b.partial_cmp(a).expect("statistics are never NaN"));
    sorted[rank - 1]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick_config(seed: u64) -> CalibrationConfig {
        // Short streams keep the test fast; the statistic path is identical.
        CalibrationConfig {
            reference: GaussianReference { mean: 0.0, std: 0.1 },
            n: 40,
            reps: 4,
            rank: 2,
            seed,
            ..CalibrationConfig::default()
        }
    }

    #[test]
    fn rank_th_largest_order_statistics() {
        let maxima = [3.1, 1.2, 2.7, 0.9, 2.0, 1.1, 0.5, 2.9, 1.8, 1.5];
        assert_eq!(rank_th_largest(&maxima, 1), 3.1);
        assert_eq!(rank_th_largest(&maxima, 2), 2.9);
        assert_eq!(rank_th_largest(&maxima, 3), 2.7);
        assert_eq!(rank_th_largest(&maxima, 10), 0.5);
    }

    #[test]
    fn single_rep_rank_one_is_the_maximum() {
        let mut cfg = quick_config(1);
        cfg.reps = 1;
        cfg.rank = 1;
        let z = calibrate(&cfg).unwrap();
        assert!(z.is_finite() && z >= 0.0);
    }

    #[test]
    fn threshold_nonnegative_for_zero_initialized_family() {
        let z = calibrate(&quick_config(2)).unwrap();
        assert!(z >= 0.0);
    }

    #[test]
    fn rank_is_monotone_on_shared_seeds() {
        let mut prev = f64::INFINITY;
        for rank in 1..=4 {
            let mut cfg = quick_config(3);
            cfg.rank = rank;
            let z = calibrate(&cfg).unwrap();
            assert!(z <= prev, "rank {rank}: {z} > {prev}");
            prev = z;
        }
    }

    #[test]
    fn deterministic_given_seed_and_schedule() {
        let a = calibrate(&quick_config(4)).unwrap();
        let b = calibrate(&quick_config(4)).unwrap();
        assert_eq!(a, b);
        let mut serial = quick_config(4);
        serial.parallel = false;
        assert_eq!(a, calibrate(&serial).unwrap());
        let c = calibrate(&quick_config(5)).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn degenerate_reference_is_rejected() {
        let mut cfg = quick_config(0);
        cfg.reference.std = 0.0;
        assert!(matches!(calibrate(&cfg), Err(CalibrationError::DegenerateReference(_))));
    }

    #[test]
    fn too_short_streams_are_rejected() {
        let mut cfg = quick_config(0);
        cfg.n = 20;
        assert!(matches!(calibrate(&cfg), Err(CalibrationError::NoStatistics { .. })));
    }

    #[test]
    fn bad_rank_is_rejected() {
        let mut cfg = quick_config(0);
        cfg.rank = 5;
        cfg.reps = 4;
        assert!(matches!(calibrate(&cfg), Err(CalibrationError::InvalidConfig(_))));
        cfg.rank = 0;
        assert!(matches!(calibrate(&cfg), Err(CalibrationError::InvalidConfig(_))));
    }

    #[test]
    fn default_calibration_lands_near_the_reference_scale() {
        // Full-size run: N(0, 0.01) with degree-one polynomials is known to
        // sit near 1.74; allow a factor of two either way across seeds.
        let cfg = CalibrationConfig {
            reference: GaussianReference { mean: 0.0, std: 0.1 },
            seed: 0,
            ..CalibrationConfig::default()
        };
        let z = calibrate(&cfg).unwrap();
        assert!(z > 0.87 && z < 3.48, "threshold {z} far from the expected scale");
    }
}
