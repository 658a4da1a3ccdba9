//! # contrastive-cpd
//!
//! Online (sequential) change point detection by contrast: at every step `t`
//! and for every candidate split `tau`, a discriminator is fitted to tell the
//! first `tau` observations apart from the rest, and the achieved value of a
//! scaled logistic cross-entropy functional is the evidence for a change at
//! `tau`. The running statistic `S_t` is the maximum of those values over the
//! admissible splits; an alarm is raised once `S_t` crosses a threshold
//! calibrated by simulation from the pre-change regime.
//!
//! The crate is organised around that loop:
//!
//! - [`contrast`]: numerically stable evaluation of the contrast functional,
//!   its gradient with respect to discriminator outputs, and the max statistic.
//! - [`discriminator`]: the function families (polynomial, Fourier, linear,
//!   small ReLU network) and full-batch Adam fitting.
//! - [`detector`]: the streaming loop (buffer, per-split refits, statistic
//!   trace, alarm).
//! - [`calibration`]: bootstrap threshold selection from a Gaussian reference.
//! - [`simbench`]: synthetic scenarios, Jensen-Shannon divergence by
//!   quadrature, Monte-Carlo oracles, and a seeded detection-delay benchmark.
//! - [`io`]: plain-text signal ingestion (stride + prefix normalization) and
//!   JSON/CSV reports.
//! - [`cli`]: the `ccpd` command line front end.
//!
//! ## Quick start
//!
//! ```
//! use contrastive_cpd::calibration::{CalibrationConfig, GaussianReference, calibrate};
//! use contrastive_cpd::detector::{Detector, DetectorConfig};
//! use contrastive_cpd::discriminator::DiscriminatorSpec;
//!
//! // Threshold from 4 short null streams (use the defaults for real work).
//! let spec = DiscriminatorSpec::parse("poly:1").unwrap();
//! let cal = CalibrationConfig {
//!     reference: GaussianReference { mean: 0.0, std: 0.1 },
//!     n: 60,
//!     reps: 4,
//!     rank: 2,
//!     spec: spec.clone(),
//!     ..CalibrationConfig::default()
//! };
//! let threshold = calibrate(&cal).unwrap();
//!
//! // Stream with a mean shift half way through.
//! let mut detector = Detector::new(DetectorConfig { threshold, spec, ..DetectorConfig::default() }).unwrap();
//! let stream = (0..80).map(|i| if i < 40 { 0.0 } else { 0.4 });
//! let result = detector.run_scalars(stream).unwrap();
//! assert!(result.stopping_time.is_some());
//! ```
//!
//! Every public entry point is deterministic given its seed; parallel and
//! serial schedules produce bit-identical results.
//!
//! ## Examples
//!
//! The `examples/` directory has one runnable program per capability:
//!
//! ```bash
//! cargo run --release --example streaming_detector
//! cargo run --release --example fit_discriminator
//! cargo run --release --example calibrate_threshold
//! cargo run --release --example simulate_mean_shift
//! cargo run --release --example detect_from_csv
//! cargo run --release --example divergence_oracle
//! cargo run --release --example benchmark_table
//! ```

pub mod buffer;
pub mod calibration;
pub mod cli;
pub mod contrast;
pub mod detector;
pub mod discriminator;
pub mod io;
pub mod simbench;

mod seed;

pub use buffer::ObservationBuffer;
pub use contrast::{SplitView, StatValue};
pub use detector::{Alarm, DetectionResult, Detector, DetectorConfig};
pub use discriminator::{DiscriminatorSpec, Family, FittedDiscriminator, OptimizerConfig};
