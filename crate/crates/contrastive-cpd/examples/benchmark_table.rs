//! A reduced version of the benchmark grid: every scenario/family cell with
//! fewer replications and a lighter calibration, printed as CSV.
//!
//! The full-size grid is `ccpd benchmark --table1` (or `run_benchmark` with
//! `BenchmarkConfig::default()`) and takes a few minutes.
//!
//! ```bash
//! cargo run --release --example benchmark_table
//! ```

use contrastive_cpd::simbench::{run_benchmark, standard_grid, write_csv, BenchmarkConfig};

fn main() {
    let config = BenchmarkConfig {
        reps: 3,
        calibration_n: 80,
        calibration_reps: 4,
        calibration_rank: 1,
        ..BenchmarkConfig::default()
    };
    let rows = run_benchmark(&standard_grid(false), &config).expect("grid runs");
    let mut stdout = std::io::stdout().lock();
    write_csv(&rows, &mut stdout).expect("stdout write");
}
