//! Ingest a text signal the way the `ccpd detect` subcommand does: pick a
//! column, keep every second row, z-score by a prefix, then monitor it.
//!
//! ```bash
//! cargo run --release --example detect_from_csv
//! ```

use contrastive_cpd::detector::{Detector, DetectorConfig};
use contrastive_cpd::discriminator::DiscriminatorSpec;
use contrastive_cpd::io::{ingest_reader, write_trace_csv, IngestSpec, Source};

fn main() {
    // A three-column file: timestamp, signal, sensor id. The signal hovers
    // around 12.0 and jumps to 12.9 at row 110.
    let mut csv = String::from("# time, level, sensor\n");
    for i in 0..220 {
        let level = if i < 110 { 12.0 } else { 12.9 };
        let wiggle = 0.15 * (i as f64 * 0.61).sin();
        csv.push_str(&format!("{i}, {:.4}, 7\n", level + wiggle));
    }

    let spec = IngestSpec {
        source: Source::Stdin, // ignored by ingest_reader; shown for shape
        columns: Some(vec![1]),
        stride: 2,
        normalize: true,
        prefix_len: 40,
    };
    let ingested = ingest_reader(csv.as_bytes(), &spec).expect("well-formed input");
    let stats = ingested.stats.as_ref().expect("normalization was requested");
    println!(
        "kept {} of 220 rows; prefix mean {:.3}, std {:.3}",
        ingested.samples.len(),
        stats.mean[0],
        stats.std[0]
    );

    let mut detector = Detector::new(DetectorConfig {
        threshold: 2.5,
        spec: DiscriminatorSpec::parse("poly:1").expect("valid class"),
        ..DetectorConfig::default()
    })
    .expect("valid config");
    let result = detector.run(&ingested.samples).expect("dimensions match");

    match result.stopping_time {
        Some(t) => println!(
            "alarm at kept-sample {} = input row {} (change was at row 110)",
            t,
            (t - 1) * 2 + 1
        ),
        None => println!("no alarm"),
    }

    let mut trace_csv = Vec::new();
    write_trace_csv(&result.trace, &mut trace_csv).expect("in-memory write");
    let text = String::from_utf8(trace_csv).unwrap();
    println!("first trace lines:");
    for line in text.lines().take(5) {
        println!("  {line}");
    }
}
