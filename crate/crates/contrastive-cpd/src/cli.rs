//! The `ccpd` command line front end.
//!
//! Four subcommands cover the full workflow: `calibrate` prints a threshold
//! for a Gaussian reference, `detect` monitors a text stream, `simulate`
//! runs a synthetic scenario end to end with auto-calibration, and
//! `benchmark` reproduces the standard scenario/family grid as CSV.
//!
//! A `--config FILE` of `key=value` lines supplies defaults; keys match the
//! long flag names of the invoked subcommand and explicit flags win. Exit
//! codes: 0 success (or no alarm), 2 alarm raised by `detect`, 1 any error.

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};
use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;
use std::time::Instant;

use crate::calibration::{calibrate, CalibrationConfig, GaussianReference};
use crate::detector::{Detector, DetectorConfig};
use crate::discriminator::DiscriminatorSpec;
use crate::io::{
    ingest, write_json, write_trace_csv, IngestSpec, RunReport, SimulationReport, Source,
    SCHEMA_VERSION,
};
use crate::simbench::{
    self, run_benchmark, standard_grid, write_csv, BenchmarkConfig, ScenarioSpec,
};

/// Exit code for a detection run that raised an alarm.
const EXIT_ALARM: i32 = 2;
const EXIT_ERROR: i32 = 1;

#[derive(Debug, Parser)]
#[command(
    name = "ccpd",
    version,
    about = "Streaming change point detection with fitted discriminators",
    after_help = "Config file: `--config FILE` reads key=value lines (# comments allowed); \
                  keys match the long flag names of the subcommand and explicit flags win.",
    args_override_self = true
)]
struct Cli {
    /// Defaults file of key=value lines; explicit flags override it.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print an alarm threshold bootstrapped from a Gaussian reference.
    Calibrate {
        /// Mean of the pre-change Gaussian.
        #[arg(long)]
        mean: f64,
        /// Standard deviation of the pre-change Gaussian.
        #[arg(long)]
        std: f64,
        /// Discriminator class: poly:D, fourier:Q, linear[:DIM], mlp[:W,W,...].
        #[arg(long)]
        class: String,
        /// Null stream length.
        #[arg(long, default_value_t = 150)]
        n: usize,
        /// Number of null streams.
        #[arg(long, default_value_t = 10)]
        reps: usize,
        /// The rank-th largest null maximum becomes the threshold.
        #[arg(long, default_value_t = 2)]
        rank: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 20)]
        warmup: usize,
        #[arg(long, default_value_t = 10)]
        margin: usize,
        /// Disable per-split fitting parallelism.
        #[arg(long)]
        serial: bool,
    },
    /// Monitor a text stream and exit 2 when an alarm fires.
    Detect {
        /// Input file of one sample per line; `-` reads standard input.
        #[arg(long)]
        input: String,
        /// Discriminator class: poly:D, fourier:Q, linear[:DIM], mlp[:W,W,...].
        #[arg(long)]
        class: String,
        /// Alarm threshold, e.g. from `calibrate`.
        #[arg(long)]
        threshold: f64,
        #[arg(long, default_value_t = 20)]
        warmup: usize,
        #[arg(long, default_value_t = 10)]
        margin: usize,
        /// Keep every stride-th row of the input.
        #[arg(long, default_value_t = 1)]
        stride: usize,
        /// Z-score the stream using statistics from the leading prefix.
        #[arg(long)]
        normalize: bool,
        /// Kept samples used to estimate the normalization reference.
        #[arg(long, default_value_t = 50)]
        prefix: usize,
        /// Cap on the number of recent samples searched for a split.
        #[arg(long)]
        window: Option<usize>,
        /// Write a JSON run report here.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Write the statistic trace as CSV here.
        #[arg(long)]
        trace_out: Option<PathBuf>,
        /// Zero-based input columns forming each sample, comma-separated.
        #[arg(long, value_delimiter = ',')]
        columns: Option<Vec<usize>>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Disable per-split fitting parallelism.
        #[arg(long)]
        serial: bool,
    },
    /// Run one synthetic scenario end to end with auto-calibration.
    Simulate {
        /// Scenario: 1 mean shift, 2 variance change, 3 switch to uniform.
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=3))]
        example: u8,
        /// Discriminator class: poly:D, fourier:Q, linear[:DIM], mlp[:W,W,...].
        #[arg(long)]
        class: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Detection replications.
        #[arg(long, default_value_t = 10)]
        reps: usize,
        /// Scenario 3 only: post-change uniform with matched support width
        /// instead of matched variance.
        #[arg(long)]
        narrow_uniform: bool,
        /// Write the JSON report here instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Disable per-split fitting parallelism.
        #[arg(long)]
        serial: bool,
    },
    /// Reproduce the standard scenario/family grid as CSV.
    Benchmark {
        /// Run the full 3x3 grid (required; reserved for future subsets).
        #[arg(long)]
        table1: bool,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Detection replications per cell.
        #[arg(long, default_value_t = 10)]
        reps: usize,
        /// Scenario 3 with matched support width instead of matched variance.
        #[arg(long)]
        narrow_uniform: bool,
        /// Write the CSV here instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Disable per-split fitting parallelism.
        #[arg(long)]
        serial: bool,
    },
}

/// Run the command line interface on `args` (without the program name),
/// returning the process exit code.
pub fn run<I: IntoIterator<Item = String>>(args: I) -> i32 {
    let argv: Vec<String> = args.into_iter().collect();
    let merged = match merge_config_args(argv) {
        Ok(m) => m,
        Err(msg) => {
            eprintln!("error: {msg}");
            return EXIT_ERROR;
        }
    };
    let cli = match Cli::try_parse_from(std::iter::once("ccpd".to_string()).chain(merged)) {
        Ok(cli) => cli,
        Err(err) => {
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => EXIT_ERROR,
            };
            let _ = err.print();
            return code;
        }
    };
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(msg) => {
            eprintln!("error: {msg}");
            EXIT_ERROR
        }
    }
}

/// Pull `--config FILE` out of `argv` and splice the file's key=value pairs
/// in as flags right after the subcommand, so explicit flags override them.
fn merge_config_args(argv: Vec<String>) -> Result<Vec<String>, String> {
    let (rest, config_path) = extract_config(argv)?;
    let Some(path) = config_path else {
        return Ok(rest);
    };
    let text = fs::read_to_string(&path)
        .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
    let pairs = parse_config(&text)?;
    let mut merged = rest;
    // The subcommand is the first non-flag token; without one, clap will
    // print usage anyway, so leave the arguments untouched.
    let Some(pos) = merged.iter().position(|a| !a.starts_with('-')) else {
        return Ok(merged);
    };
    let mut insert = Vec::new();
    for (key, value) in pairs {
        match value.as_str() {
            "true" => insert.push(format!("--{key}")),
            "false" => {}
            _ => {
                insert.push(format!("--{key}"));
                insert.push(value);
            }
        }
    }
    merged.splice(pos + 1..pos + 1, insert);
    Ok(merged)
}

/// Remove every `--config PATH` / `--config=PATH` pair; the last one wins.
fn extract_config(argv: Vec<String>) -> Result<(Vec<String>, Option<PathBuf>), String> {
    let mut rest = Vec::with_capacity(argv.len());
    let mut config = None;
    let mut it = argv.into_iter();
    while let Some(arg) = it.next() {
        if arg == "--config" {
            let path = it.next().ok_or("--config expects a file path")?;
            config = Some(PathBuf::from(path));
        } else if let Some(path) = arg.strip_prefix("--config=") {
            config = Some(PathBuf::from(path));
        } else {
            rest.push(arg);
        }
    }
    Ok((rest, config))
}

/// Parse `key=value` lines; `#` comments and blank lines are skipped.
fn parse_config(text: &str) -> Result<Vec<(String, String)>, String> {
    let mut pairs = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or(format!("config line {}: expected key=value, got {line:?}", idx + 1))?;
        let key = key.trim();
        if key.is_empty() || key.contains(char::is_whitespace) {
            return Err(format!("config line {}: bad key {key:?}", idx + 1));
        }
        pairs.push((key.to_string(), value.trim().to_string()));
    }
    Ok(pairs)
}

fn dispatch(command: Command) -> Result<i32, String> {
    match command {
        Command::Calibrate {
            mean,
            std,
            class,
            n,
            reps,
            rank,
            seed,
            warmup,
            margin,
            serial,
        } => {
            let spec = parse_class(&class)?;
            let threshold = calibrate(&CalibrationConfig {
                reference: GaussianReference { mean, std },
                n,
                reps,
                rank,
                spec,
                warmup,
                margin,
                seed,
                parallel: !serial,
            })
            .map_err(|e| e.to_string())?;
            println!("{threshold}");
            Ok(0)
        }
        Command::Detect {
            input,
            class,
            threshold,
            warmup,
            margin,
            stride,
            normalize,
            prefix,
            window,
            out,
            trace_out,
            columns,
            seed,
            serial,
        } => {
            let spec = parse_class(&class)?;
            let source = if input == "-" {
                Source::Stdin
            } else {
                Source::Path(PathBuf::from(input))
            };
            let started = Instant::now();
            let ingested = ingest(&IngestSpec {
                source,
                columns,
                stride,
                normalize,
                prefix_len: prefix,
            })
            .map_err(|e| e.to_string())?;
            let mut detector = Detector::new(DetectorConfig {
                threshold,
                spec: spec.clone(),
                warmup,
                margin,
                window_cap: window,
                seed,
                parallel: !serial,
                warm_start: false,
            })
            .map_err(|e| e.to_string())?;
            let result = detector.run(&ingested.samples).map_err(|e| e.to_string())?;
            let report = RunReport {
                schema_version: SCHEMA_VERSION,
                class: spec.label(),
                threshold,
                warmup,
                margin,
                window_cap: window,
                seed,
                stride,
                normalization: ingested.stats,
                stopping_time: result.stopping_time,
                argmax_split: result.argmax_split,
                statistic: result.statistic,
                trace: result.trace.clone(),
                wall_time_secs: started.elapsed().as_secs_f64(),
            };
            if let Some(path) = out {
                let mut file = create_file(&path)?;
                write_json(&report, &mut file).map_err(|e| e.to_string())?;
            }
            if let Some(path) = trace_out {
                let mut file = create_file(&path)?;
                write_trace_csv(&report.trace, &mut file).map_err(|e| e.to_string())?;
            }
            match (report.stopping_time, report.argmax_split, report.statistic) {
                (Some(t), Some(split), Some(value)) => {
                    println!(
                        "alarm at t={t} (split estimate {split}, statistic {value:.6}, \
                         {} samples read)",
                        ingested.samples.len()
                    );
                    Ok(EXIT_ALARM)
                }
                _ => {
                    println!(
                        "no alarm after {} samples ({} statistics computed)",
                        ingested.samples.len(),
                        report.trace.len()
                    );
                    Ok(0)
                }
            }
        }
        Command::Simulate {
            example,
            class,
            seed,
            reps,
            narrow_uniform,
            out,
            serial,
        } => {
            let spec = parse_class(&class)?;
            let scenario = scenario_for(example, narrow_uniform);
            let started = Instant::now();
            let config = BenchmarkConfig {
                reps,
                seed,
                parallel: !serial,
                ..BenchmarkConfig::default()
            };
            let rows = run_benchmark(&[(scenario, spec)], &config).map_err(|e| e.to_string())?;
            let row = rows.into_iter().next().expect("one cell yields one row");
            let report = SimulationReport {
                schema_version: SCHEMA_VERSION,
                scenario: row.scenario,
                class: row.family,
                seed,
                threshold: row.threshold,
                mean_delay: row.mean_delay,
                std_delay: row.std_delay,
                misses: row.misses,
                outcomes: row.outcomes,
                wall_time_secs: started.elapsed().as_secs_f64(),
            };
            match out {
                Some(path) => {
                    let mut file = create_file(&path)?;
                    write_json(&report, &mut file).map_err(|e| e.to_string())?;
                }
                None => {
                    let mut stdout = std::io::stdout().lock();
                    write_json(&report, &mut stdout).map_err(|e| e.to_string())?;
                }
            }
            Ok(0)
        }
        Command::Benchmark {
            table1,
            seed,
            reps,
            narrow_uniform,
            out,
            serial,
        } => {
            if !table1 {
                return Err("pass --table1 to run the standard grid".into());
            }
            let config = BenchmarkConfig {
                reps,
                seed,
                parallel: !serial,
                ..BenchmarkConfig::default()
            };
            let rows =
                run_benchmark(&standard_grid(narrow_uniform), &config).map_err(|e| e.to_string())?;
            match out {
                Some(path) => {
                    let mut file = create_file(&path)?;
                    write_csv(&rows, &mut file).map_err(|e| e.to_string())?;
                }
                None => {
                    let mut stdout = std::io::stdout().lock();
                    write_csv(&rows, &mut stdout).map_err(|e| e.to_string())?;
                }
            }
            Ok(0)
        }
    }
}

fn parse_class(class: &str) -> Result<DiscriminatorSpec, String> {
    DiscriminatorSpec::parse(class).map_err(|e| {
        let mut msg = String::new();
        let _ = write!(
            msg,
            "bad --class {class:?}: {e}; expected poly:D, fourier:Q, linear[:DIM], or mlp[:W,W,...]"
        );
        msg
    })
}

fn scenario_for(example: u8, narrow_uniform: bool) -> ScenarioSpec {
    match example {
        1 => simbench::mean_shift(),
        2 => simbench::variance_change(),
        3 => simbench::gaussian_to_uniform(narrow_uniform),
        _ => unreachable!("clap restricts --example to 1..=3"),
    }
}

fn create_file(path: &PathBuf) -> Result<fs::File, String> {
    fs::File::create(path).map_err(|e| format!("cannot create {}: {e}", path.display()))
}
