//! Feed a detector one sample at a time and react to the alarm as it fires.
//!
//! ```bash
//! cargo run --release --example streaming_detector
//! ```

use contrastive_cpd::detector::{Detector, DetectorConfig};
use contrastive_cpd::discriminator::DiscriminatorSpec;

fn main() {
    let spec = DiscriminatorSpec::parse("poly:1").expect("valid class");
    let mut detector = Detector::new(DetectorConfig {
        threshold: 2.0,
        spec,
        ..DetectorConfig::default()
    })
    .expect("valid config");

    // A deterministic stream: small wiggle around zero, then around 0.5.
    let stream = (0..90).map(|i| {
        let wiggle = 0.08 * (i as f64 * 0.7).sin();
        if i < 45 {
            wiggle
        } else {
            0.5 + wiggle
        }
    });

    for (i, x) in stream.enumerate() {
        let alarm = detector.step(&[x]).expect("scalar stream");
        if let Some(alarm) = alarm {
            println!(
                "alarm after sample {} (1-based t = {}): split estimate {}, statistic {:.3}",
                i + 1,
                alarm.t,
                alarm.tau_hat,
                alarm.statistic
            );
            break;
        }
    }
    if !detector.alarmed() {
        println!("no alarm in {} samples", detector.t());
    }

    println!("last five statistic evaluations:");
    let trace = detector.trace();
    for point in &trace[trace.len().saturating_sub(5)..] {
        println!("  t = {:3}  S_t = {:7.3}  split = {}", point.t, point.statistic, point.tau_hat);
    }
}
