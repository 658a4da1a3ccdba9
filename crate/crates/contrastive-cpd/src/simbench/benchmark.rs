//! Seeded detection-delay benchmark over scenario/family grids.
//!
//! For each (scenario, family) cell the runner bootstraps a threshold from
//! the scenario's pre-change law, replays `reps` independent streams through
//! a fresh detector, and aggregates the detection delays. Streams are shared
//! between cells of the same scenario and calibration draws between cells
//! with the same pre-change law, so families compete on identical data and
//! one family keeps one threshold across scenarios with a common reference.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::io::{self, Write};

use crate::calibration::{calibrate, CalibrationConfig, CalibrationError, GaussianReference};
use crate::detector::{Detector, DetectorConfig, DetectorError};
use crate::discriminator::DiscriminatorSpec;
use crate::seed::{self, tag};

use super::dist::Dist;
use super::scenario::{self, ScenarioSpec};

/// Errors from a benchmark run.
#[derive(Debug, thiserror::Error)]
pub enum BenchmarkError {
    #[error("scenario {0:?} has a non-Gaussian pre-change law; calibration needs a Gaussian reference")]
    NonGaussianReference(String),
    #[error(transparent)]
    Calibration(#[from] CalibrationError),
    #[error(transparent)]
    Detector(#[from] DetectorError),
}

/// Settings shared by every cell of a benchmark run.
#[derive(Debug, Clone)]
pub struct BenchmarkConfig {
    /// Detection replications per cell.
    pub reps: usize,
    pub seed: u64,
    pub parallel: bool,
    /// Null-stream length for threshold calibration.
    pub calibration_n: usize,
    pub calibration_reps: usize,
    pub calibration_rank: usize,
    pub warmup: usize,
    pub margin: usize,
}

impl Default for BenchmarkConfig {
    fn default() -> Self {
        Self {
            reps: 10,
            seed: 0,
            parallel: true,
            calibration_n: 150,
            calibration_reps: 10,
            calibration_rank: 2,
            warmup: 20,
            margin: 10,
        }
    }
}

/// What happened on one replication.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RepOutcome {
    /// Alarm after the change; `delay` is the stopping time minus the
    /// change time.
    Detected { delay: usize },
    /// Alarm at or before the change time (a pre-change false alarm).
    Early { t: usize },
    /// No alarm by the end of the stream.
    Missed,
}

/// Aggregated result of one (scenario, family) cell.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkRow {
    pub scenario: String,
    pub family: String,
    pub threshold: f64,
    /// Mean over detected delays; absent when nothing was detected.
    pub mean_delay: Option<f64>,
    /// Sample standard deviation of detected delays (needs two detections).
    pub std_delay: Option<f64>,
    /// Replications with no alarm at all.
    pub misses: usize,
    pub outcomes: Vec<RepOutcome>,
}

impl BenchmarkRow {
    /// Detected delays in replication order.
    pub fn delays(&self) -> Vec<usize> {
        self.outcomes
            .iter()
            .filter_map(|o| match o {
                RepOutcome::Detected { delay } => Some(*delay),
                _ => None,
            })
            .collect()
    }
}

/// Mean, sample standard deviation, and miss count of a set of outcomes.
/// Early alarms count toward neither delays nor misses.
pub fn aggregate(outcomes: &[RepOutcome]) -> (Option<f64>, Option<f64>, usize) {
    let delays: Vec<f64> = outcomes
        .iter()
        .filter_map(|o| match o {
            RepOutcome::Detected { delay } => Some(*delay as f64),
            _ => None,
        })
        .collect();
    let misses = outcomes.iter().filter(|o| matches!(o, RepOutcome::Missed)).count();
    let mean = if delays.is_empty() {
        None
    } else {
        Some(delays.iter().sum::<f64>() / delays.len() as f64)
    };
    let std = if delays.len() >= 2 {
        let m = mean.unwrap();
        Some(
            (delays.iter().map(|d| (d - m) * (d - m)).sum::<f64>() / (delays.len() - 1) as f64)
                .sqrt(),
        )
    } else {
        None
    };
    (mean, std, misses)
}

/// Run every cell: calibrate, replay, aggregate.
///
/// Deterministic given `config.seed`, with or without parallelism. Cells
/// sharing a scenario name see identical streams; cells sharing a pre-change
/// law see identical calibration draws, so a family's threshold carries over
/// between such scenarios.
pub fn run_benchmark(
    cells: &[(ScenarioSpec, DiscriminatorSpec)],
    config: &BenchmarkConfig,
) -> Result<Vec<BenchmarkRow>, BenchmarkError> {
    let references: Vec<GaussianReference> = cells
        .iter()
        .map(|(sc, _)| match sc.pre {
            Dist::Gaussian { mean, std } => Ok(GaussianReference { mean, std }),
            _ => Err(BenchmarkError::NonGaussianReference(sc.name.clone())),
        })
        .collect::<Result<_, _>>()?;
    let scenario_keys: Vec<u64> = cells
        .iter()
        .map(|(sc, _)| {
            cells
                .iter()
                .position(|(other, _)| other.name == sc.name)
                .expect("scenario is in the list") as u64
        })
        .collect();
    let reference_keys: Vec<u64> = references
        .iter()
        .map(|r| references.iter().position(|other| other == r).expect("reference is in the list") as u64)
        .collect();
    let mut thresholds: HashMap<(u64, String), f64> = HashMap::new();
    let mut rows = Vec::with_capacity(cells.len());
    for (idx, ((scenario_spec, family), &key)) in
        cells.iter().zip(scenario_keys.iter()).enumerate()
    {
        let ref_key = reference_keys[idx];
        let threshold = match thresholds.entry((ref_key, family.label())) {
            std::collections::hash_map::Entry::Occupied(e) => *e.get(),
            std::collections::hash_map::Entry::Vacant(e) => *e.insert(calibrate(
                &CalibrationConfig {
                    reference: references[idx],
                    n: config.calibration_n,
                    reps: config.calibration_reps,
                    rank: config.calibration_rank,
                    spec: family.clone(),
                    warmup: config.warmup,
                    margin: config.margin,
                    seed: seed::derive(config.seed, &[tag::CALIBRATION, ref_key]),
                    parallel: config.parallel,
                },
            )?),
        };

        let seeded = scenario_spec
            .clone()
            .with_seed(seed::derive(config.seed, &[tag::SCENARIO, key]));
        let one_rep = |rep: usize| -> Result<RepOutcome, BenchmarkError> {
            let stream = scenario::generate(&seeded, rep);
            let mut det = Detector::new(DetectorConfig {
                threshold,
                spec: family.clone(),
                warmup: config.warmup,
                margin: config.margin,
                window_cap: None,
                seed: seed::derive(config.seed, &[tag::BENCHMARK_DETECTOR, key, rep as u64]),
                parallel: config.parallel,
                warm_start: false,
            })?;
            let res = det.run_scalars(stream)?;
            Ok(match res.stopping_time {
                Some(t_hat) if t_hat > seeded.change_time => {
                    RepOutcome::Detected { delay: t_hat - seeded.change_time }
                }
                Some(t_hat) => RepOutcome::Early { t: t_hat },
                None => RepOutcome::Missed,
            })
        };
        let outcomes: Vec<RepOutcome> = if config.parallel {
            (0..config.reps).into_par_iter().map(one_rep).collect::<Result<_, _>>()?
        } else {
            (0..config.reps).map(one_rep).collect::<Result<_, _>>()?
        };
        let (mean_delay, std_delay, misses) = aggregate(&outcomes);
        rows.push(BenchmarkRow {
            scenario: scenario_spec.name.clone(),
            family: family.label(),
            threshold,
            mean_delay,
            std_delay,
            misses,
            outcomes,
        });
    }
    Ok(rows)
}

/// The standard 3x3 grid: mean shift, variance change, and the uniform
/// switch, each under its matched polynomial and Fourier family plus the
/// default network.
pub fn standard_grid(narrow_uniform: bool) -> Vec<(ScenarioSpec, DiscriminatorSpec)> {
    let parse = |s: &str| DiscriminatorSpec::parse(s).expect("grid specs are valid");
    vec![
        (scenario::mean_shift(), parse("poly:1")),
        (scenario::mean_shift(), parse("fourier:2")),
        (scenario::mean_shift(), parse("mlp")),
        (scenario::variance_change(), parse("poly:2")),
        (scenario::variance_change(), parse("fourier:3")),
        (scenario::variance_change(), parse("mlp")),
        (scenario::gaussian_to_uniform(narrow_uniform), parse("poly:5")),
        (scenario::gaussian_to_uniform(narrow_uniform), parse("fourier:6")),
        (scenario::gaussian_to_uniform(narrow_uniform), parse("mlp")),
    ]
}

/// Quote a field when it contains a comma, quote, or newline.
fn csv_field(value: &str) -> String {
    if value.contains([',', '"', '\n']) {
        format!("\"{}\"", value.replace('"', "\"\""))
    } else {
        value.to_string()
    }
}

/// Write rows as CSV with a schema comment line.
///
/// Columns: `scenario,family,threshold,mean_delay,std_delay,misses,rep_delays`.
/// Replication outcomes are semicolon-joined: a bare number is a detection
/// delay, `miss` a missed change, `early@t` a pre-change alarm at step `t`.
/// Absent mean/std render as empty fields. Floats use six decimals, so equal
/// runs produce byte-identical files.
pub fn write_csv<W: Write>(rows: &[BenchmarkRow], out: &mut W) -> io::Result<()> {
    writeln!(out, "# schema_version=1")?;
    writeln!(out, "scenario,family,threshold,mean_delay,std_delay,misses,rep_delays")?;
    for row in rows {
        let mean = row.mean_delay.map(|v| format!("{v:.6}")).unwrap_or_default();
        let std = row.std_delay.map(|v| format!("{v:.6}")).unwrap_or_default();
        let reps: Vec<String> = row
            .outcomes
            .iter()
            .map(|o| match o {
                RepOutcome::Detected { delay } => delay.to_string(),
                RepOutcome::Early { t } => format!("early@{t}"),
                RepOutcome::Missed => "miss".to_string(),
            })
            .collect();
        writeln!(
            out,
            "{},{},{:.6},{},{},{},{}",
            csv_field(&row.scenario),
            csv_field(&row.family),
            row.threshold,
            mean,
            std,
            row.misses,
            reps.join(";")
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick_cell() -> (ScenarioSpec, DiscriminatorSpec) {
        // A blatant shift keeps delays short and the test fast.
        let sc = ScenarioSpec::new(
            "test-shift",
            Dist::gaussian(0.0, 0.1),
            Dist::gaussian(0.5, 0.1),
            25,
            45,
        );
        (sc, DiscriminatorSpec::parse("poly:1").unwrap())
    }

    fn quick_config() -> BenchmarkConfig {
        BenchmarkConfig {
            reps: 3,
            calibration_n: 40,
            calibration_reps: 4,
            calibration_rank: 1,
            ..BenchmarkConfig::default()
        }
    }

    #[test]
    fn detects_a_blatant_shift_in_every_replication() {
        let rows = run_benchmark(&[quick_cell()], &quick_config()).unwrap();
        assert_eq!(rows.len(), 1);
        let row = &rows[0];
        assert_eq!(row.scenario, "test-shift");
        assert_eq!(row.family, "poly:1");
        assert_eq!(row.misses, 0);
        assert_eq!(row.delays().len(), 3);
        assert!(row.mean_delay.unwrap() > 0.0 && row.mean_delay.unwrap() < 15.0);
    }

    #[test]
    fn rows_are_deterministic_across_runs_and_schedules() {
        let cells = [quick_cell()];
        let a = run_benchmark(&cells, &quick_config()).unwrap();
        let b = run_benchmark(&cells, &quick_config()).unwrap();
        assert_eq!(a, b);
        let mut serial = quick_config();
        serial.parallel = false;
        let c = run_benchmark(&cells, &serial).unwrap();
        assert_eq!(a, c);
    }

    #[test]
    fn equivalent_families_see_identical_streams() {
        // poly:1 and linear:1 span the same functions with permuted
        // parameters, and cells with one pre-change law share streams and
        // calibration draws, so their rows must agree except for the label.
        let (sc, _) = quick_cell();
        let cells = [
            (sc.clone(), DiscriminatorSpec::parse("poly:1").unwrap()),
            (sc, DiscriminatorSpec::parse("linear:1").unwrap()),
        ];
        let rows = run_benchmark(&cells, &quick_config()).unwrap();
        assert_eq!(rows[0].threshold, rows[1].threshold);
        assert_eq!(rows[0].outcomes, rows[1].outcomes);
    }

    #[test]
    fn one_family_keeps_one_threshold_per_reference() {
        // Both scenarios start from the same law, so the family is
        // calibrated once and the threshold carries over; a scenario with a
        // different pre-change law calibrates separately.
        let (shift, family) = quick_cell();
        let spread = ScenarioSpec::new(
            "test-spread",
            Dist::gaussian(0.0, 0.1),
            Dist::gaussian(0.0, 0.4),
            25,
            45,
        );
        let other = ScenarioSpec::new(
            "test-other-start",
            Dist::gaussian(1.0, 0.1),
            Dist::gaussian(1.5, 0.1),
            25,
            45,
        );
        let cells = [
            (shift, family.clone()),
            (spread, family.clone()),
            (other, family),
        ];
        let rows = run_benchmark(&cells, &quick_config()).unwrap();
        assert_eq!(rows[0].threshold, rows[1].threshold);
        assert_ne!(rows[0].threshold, rows[2].threshold);
    }

    #[test]
    fn aggregate_handles_mixed_outcomes() {
        use RepOutcome::*;
        let outcomes = [
            Detected { delay: 8 },
            Missed,
            Detected { delay: 12 },
            Early { t: 19 },
            Detected { delay: 10 },
        ];
        let (mean, std, misses) = aggregate(&outcomes);
        assert_eq!(mean, Some(10.0));
        assert_eq!(std, Some(2.0));
        assert_eq!(misses, 1);
    }

    #[test]
    fn aggregate_degenerate_cases() {
        use RepOutcome::*;
        assert_eq!(aggregate(&[Missed, Missed]), (None, None, 2));
        assert_eq!(aggregate(&[Detected { delay: 7 }]), (Some(7.0), None, 0));
        assert_eq!(aggregate(&[Early { t: 3 }]), (None, None, 0));
    }

    #[test]
    fn csv_layout_is_stable() {
        use RepOutcome::*;
        let rows = vec![
            BenchmarkRow {
                scenario: "mean-shift".into(),
                family: "poly:1".into(),
                threshold: 1.74,
                mean_delay: Some(9.1),
                std_delay: Some(2.2),
                misses: 0,
                outcomes: vec![Detected { delay: 8 }, Detected { delay: 10 }],
            },
            BenchmarkRow {
                scenario: "variance-change".into(),
                family: "mlp:1,2,3,1".into(),
                threshold: 3.27,
                mean_delay: None,
                std_delay: None,
                misses: 1,
                outcomes: vec![Missed, Early { t: 21 }],
            },
        ];
        let mut buf = Vec::new();
        write_csv(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let expected = "\
# schema_version=1
scenario,family,threshold,mean_delay,std_delay,misses,rep_delays
mean-shift,poly:1,1.740000,9.100000,2.200000,0,8;10
variance-change,\"mlp:1,2,3,1\",3.270000,,,1,miss;early@21
";
        assert_eq!(text, expected);
    }

    #[test]
    fn standard_grid_has_nine_cells_with_shared_scenarios() {
        let grid = standard_grid(false);
        assert_eq!(grid.len(), 9);
        let names: Vec<&str> = grid.iter().map(|(sc, _)| sc.name.as_str()).collect();
        assert_eq!(names.iter().filter(|n| **n == "mean-shift").count(), 3);
        assert_eq!(names.iter().filter(|n| **n == "variance-change").count(), 3);
        assert_eq!(names.iter().filter(|n| **n == "gaussian-to-uniform").count(), 3);
        let families: Vec<String> = grid.iter().map(|(_, f)| f.label()).collect();
        assert!(families.contains(&"poly:5".to_string()));
        assert!(families.contains(&"fourier:6".to_string()));
    }

    #[test]
    fn non_gaussian_reference_is_rejected() {
        let sc = ScenarioSpec::new(
            "uniform-pre",
            Dist::uniform(-1.0, 1.0),
            Dist::gaussian(0.0, 1.0),
            25,
            45,
        );
        let cells = [(sc, DiscriminatorSpec::parse("poly:1").unwrap())];
        assert!(matches!(
            run_benchmark(&cells, &quick_config()),
            Err(BenchmarkError::NonGaussianReference(_))
        ));
    }
}
