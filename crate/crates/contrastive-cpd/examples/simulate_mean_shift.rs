//! Run the standard mean-shift scenario end to end: calibrate a threshold,
//! replay seeded streams, and summarize the detection delays.
//!
//! ```bash
//! cargo run --release --example simulate_mean_shift
//! ```

use contrastive_cpd::discriminator::DiscriminatorSpec;
use contrastive_cpd::simbench::{self, run_benchmark, BenchmarkConfig, RepOutcome};

fn main() {
    let scenario = simbench::mean_shift();
    println!(
        "scenario {}: {:?} -> {:?} at step {} of {}",
        scenario.name, scenario.pre, scenario.post, scenario.change_time, scenario.length
    );

    let cells = [(scenario, DiscriminatorSpec::parse("poly:1").expect("valid class"))];
    // Smaller calibration than the production default (150 samples, 10
    // streams) keeps this example under half a minute.
    let config = BenchmarkConfig {
        reps: 5,
        calibration_n: 80,
        ..BenchmarkConfig::default()
    };
    let rows = run_benchmark(&cells, &config).expect("benchmark runs");
    let row = &rows[0];

    println!("calibrated threshold {:.3}", row.threshold);
    for (rep, outcome) in row.outcomes.iter().enumerate() {
        match outcome {
            RepOutcome::Detected { delay } => println!("  rep {rep}: detected {delay} steps late"),
            RepOutcome::Early { t } => println!("  rep {rep}: false alarm at t = {t}"),
            RepOutcome::Missed => println!("  rep {rep}: missed"),
        }
    }
    match (row.mean_delay, row.std_delay) {
        (Some(mean), Some(std)) => println!("mean delay {mean:.1} +- {std:.1}"),
        (Some(mean), None) => println!("mean delay {mean:.1}"),
        _ => println!("no detections"),
    }
}
