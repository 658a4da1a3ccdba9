//! The streaming detection loop.
//!
//! Each incoming observation is appended to the buffer. Once past warm-up,
//! every admissible split `tau` gets a freshly fitted discriminator on the
//! pre/post segments, the running statistic `S_t` is the largest fitted
//! contrast value, and the first crossing of the threshold raises an alarm
//! and freezes the state.
//!
//! Per-split fits are independent, so they run in parallel over an immutable
//! snapshot of the buffer. Each fit derives its seed from the configured base
//! seed and the global `(tau, t)` pair, which makes traces bit-identical
//! across repeated runs and across parallel and serial schedules.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;

use crate::buffer::{DimensionError, ObservationBuffer, Samples};
use crate::contrast::{max_statistic, StatValue};
use crate::discriminator::{self, DiscriminatorError, DiscriminatorSpec, FittedDiscriminator};
use crate::seed::{self, tag};

/// Errors from detector construction and stepping.
#[derive(Debug, thiserror::Error)]
pub enum DetectorError {
    #[error("invalid detector config: {0}")]
    InvalidConfig(String),
    #[error("detector is frozen after its alarm; start a new detector to re-arm")]
    AlreadyAlarmed,
    #[error(transparent)]
    Dimension(#[from] DimensionError),
    #[error(transparent)]
    Fit(#[from] DiscriminatorError),
}

/// Settings for a detection run.
#[derive(Debug, Clone)]
pub struct DetectorConfig {
    /// Alarm threshold; `f64::INFINITY` never alarms (used for calibration
    /// and monitoring-only runs).
    pub threshold: f64,
    pub spec: DiscriminatorSpec,
    /// No statistic is computed for the first `warmup` steps.
    pub warmup: usize,
    /// Splits keep at least `margin` samples on each side.
    pub margin: usize,
    /// When set, fits only consider the most recent `window_cap` samples;
    /// reported `t` and `tau` stay global. Must be at least `2*margin + 1`.
    pub window_cap: Option<usize>,
    /// Base seed for per-fit randomness (network initialization).
    pub seed: u64,
    /// Fit candidate splits on a thread pool. Traces do not depend on this.
    pub parallel: bool,
    /// Start each `(tau, t)` fit from the parameters fitted for `tau` at the
    /// previous step instead of from scratch. Off by default: the reference
    /// procedure refits cold, and warm starts change the trace.
    pub warm_start: bool,
}

impl Default for DetectorConfig {
    fn default() -> Self {
        Self {
            threshold: f64::INFINITY,
            spec: DiscriminatorSpec::default(),
            warmup: 20,
            margin: 10,
            window_cap: None,
            seed: 0,
            parallel: true,
            warm_start: false,
        }
    }
}

/// One evaluated step of the trace.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub t: usize,
    pub statistic: f64,
    pub tau_hat: usize,
}

/// Raised when the statistic first exceeds the threshold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Alarm {
    /// Step at which the threshold was crossed.
    pub t: usize,
    /// Split achieving the maximum. A diagnostic, not a calibrated
    /// change-point estimate.
    pub tau_hat: usize,
    pub statistic: f64,
}

/// Outcome of a full run: the trace plus the alarm, if any.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionResult {
    /// First step whose statistic exceeded the threshold.
    pub stopping_time: Option<usize>,
    pub argmax_split: Option<usize>,
    pub statistic: Option<f64>,
    pub trace: Vec<TracePoint>,
}

/// Streaming change detector; owns the buffer and trace.
#[derive(Debug, Clone)]
pub struct Detector {
    config: DetectorConfig,
    buffer: ObservationBuffer,
    trace: Vec<TracePoint>,
    alarm: Option<Alarm>,
    warm_params: HashMap<usize, Vec<f64>>,
}

impl Detector {
    pub fn new(config: DetectorConfig) -> Result<Self, DetectorError> {
        if config.threshold.is_nan() {
            return Err(DetectorError::InvalidConfig("threshold must not be NaN".into()));
        }
        if config.margin < 1 {
            return Err(DetectorError::InvalidConfig("margin must be at least 1".into()));
        }
        if let Some(cap) = config.window_cap {
            if cap < 2 * config.margin + 1 {
                return Err(DetectorError::InvalidConfig(format!(
                    "window_cap {cap} leaves no admissible split; need at least {}",
                    2 * config.margin + 1
                )));
            }
        }
        let dim = config.spec.family.input_dim();
        Ok(Self {
            config,
            buffer: ObservationBuffer::new(dim),
            trace: Vec::new(),
            alarm: None,
            warm_params: HashMap::new(),
        })
    }

    pub fn config(&self) -> &DetectorConfig {
        &self.config
    }

    /// Steps consumed so far.
    pub fn t(&self) -> usize {
        self.buffer.len()
    }

    pub fn trace(&self) -> &[TracePoint] {
        &self.trace
    }

    pub fn alarmed(&self) -> bool {
        self.alarm.is_some()
    }

    /// Consume one observation; `Some(alarm)` on the first threshold
    /// crossing. Errors on any step after that.
    pub fn step(&mut self, x: &[f64]) -> Result<Option<Alarm>, DetectorError> {
        if self.alarm.is_some() {
            return Err(DetectorError::AlreadyAlarmed);
        }
        self.buffer.push(x)?;
        let t = self.buffer.len();
        if t <= self.config.warmup || t < 2 * self.config.margin {
            return Ok(None);
        }

        let margin = self.config.margin;
        let start = match self.config.window_cap {
            Some(cap) if t > cap => t - cap,
            _ => 0,
        };
        let window = self.buffer.view(start, t);
        let lo = start + margin;
        let hi = t - margin;
        if lo > hi {
            return Ok(None);
        }
        let candidates: Vec<usize> = (lo..=hi).collect();
        let fitted = self.fit_candidates(&candidates, window, start, t)?;
        if self.config.warm_start {
            for (tau, f) in candidates.iter().zip(fitted.iter()) {
                self.warm_params.insert(*tau, f.params.clone());
            }
        }
        let values: Vec<(usize, f64)> = candidates
            .iter()
            .zip(fitted.iter())
            .map(|(&tau, f)| (tau, f.achieved_value))
            .collect();
        // The candidate range is non-empty, so the max always exists.
        let StatValue { value, tau } =
            max_statistic(&values, 1, usize::MAX).expect("non-empty candidate range");
        self.trace.push(TracePoint { t, statistic: value, tau_hat: tau });
        if value > self.config.threshold {
            let alarm = Alarm { t, tau_hat: tau, statistic: value };
            self.alarm = Some(alarm);
            return Ok(Some(alarm));
        }
        Ok(None)
    }

    fn fit_candidates(
        &self,
        candidates: &[usize],
        window: Samples<'_>,
        start: usize,
        t: usize,
    ) -> Result<Vec<FittedDiscriminator>, DetectorError> {
        let spec = &self.config.spec;
        let one = |&tau: &usize| -> Result<FittedDiscriminator, DiscriminatorError> {
            let local = tau - start;
            let pre = window.slice(0, local);
            let post = window.slice(local, window.len());
            let fit_seed = seed::derive(self.config.seed, &[tag::FIT, tau as u64, t as u64]);
            match self.warm_params.get(&tau) {
                Some(prev) if self.config.warm_start => {
                    discriminator::fit_from(spec, pre, post, prev.clone())
                }
                _ => discriminator::fit(spec, pre, post, fit_seed),
            }
        };
        let fitted = if self.config.parallel {
            candidates.par_iter().map(one).collect::<Result<Vec<_>, _>>()?
        } else {
            candidates.iter().map(one).collect::<Result<Vec<_>, _>>()?
        };
        Ok(fitted)
    }

    /// Run until the stream ends or the detector alarms, whichever is first.
    /// Observations after an alarm are not consumed.
    pub fn run<I, S>(&mut self, stream: I) -> Result<DetectionResult, DetectorError>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<[f64]>,
    {
        for x in stream {
            if self.step(x.as_ref())?.is_some() {
                break;
            }
        }
        Ok(self.result())
    }

    /// [`run`](Self::run) for scalar streams.
    pub fn run_scalars<I>(&mut self, stream: I) -> Result<DetectionResult, DetectorError>
    where
        I: IntoIterator<Item = f64>,
    {
        for x in stream {
            if self.step(&[x])?.is_some() {
                break;
            }
        }
        Ok(self.result())
    }

    /// Snapshot of the outcome so far.
    pub fn result(&self) -> DetectionResult {
        DetectionResult {
            stopping_time: self.alarm.map(|a| a.t),
            argmax_split: self.alarm.map(|a| a.tau_hat),
            statistic: self.alarm.map(|a| a.statistic),
            trace: self.trace.clone(),
        }
    }
}
