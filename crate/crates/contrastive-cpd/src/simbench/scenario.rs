//! Synthetic change-point scenarios.
//!
//! Each scenario is a pre-change law, a post-change law, a change time and a
//! total length. The three ready-made constructors cover the standard test
//! grid: a small mean shift, a variance increase at constant mean, and a
//! switch from Gaussian to uniform with matched first and second moments.

use crate::seed::{self, tag};

use super::dist::Dist;

/// A synthetic stream description: `change_time` samples from `pre`, then
/// `length - change_time` from `post`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSpec {
    /// Stable identifier used in benchmark rows and filenames.
    pub name: String,
    pub pre: Dist,
    pub post: Dist,
    /// Index of the last pre-change sample (1-based count).
    pub change_time: usize,
    pub length: usize,
    pub seed: u64,
}

impl ScenarioSpec {
    pub fn new(name: &str, pre: Dist, post: Dist, change_time: usize, length: usize) -> Self {
        assert!(change_time >= 1 && change_time < length, "need 0 < change_time < length");
        Self { name: name.to_string(), pre, post, change_time, length, seed: 0 }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

/// Mean shift `N(0, 0.01) -> N(mu, 0.01)` at step 50 of 100.
pub fn mean_shift_with(mu: f64) -> ScenarioSpec {
    ScenarioSpec::new(
        "mean-shift",
        Dist::gaussian(0.0, 0.1),
        Dist::gaussian(mu, 0.1),
        50,
        100,
    )
}

/// The standard mean-shift grid point: `mu = 0.1` (one pre-change sigma).
pub fn mean_shift() -> ScenarioSpec {
    mean_shift_with(0.1)
}

/// Variance change `N(0, 0.01) -> N(0, 0.04)` at step 50 of 80; the mean
/// stays zero so first moments carry no signal.
pub fn variance_change() -> ScenarioSpec {
    ScenarioSpec::new(
        "variance-change",
        Dist::gaussian(0.0, 0.1),
        Dist::gaussian(0.0, 0.2),
        50,
        80,
    )
}

/// Distributional change `N(0, 0.01) -> Uniform[-a, a]` at step 50 of 100.
///
/// By default `a = 0.1 * sqrt(3)`, which matches the Gaussian's mean and
/// variance exactly. `narrow` selects `a = 0.1 / sqrt(3)` instead, a much
/// easier variant whose variance drops to a ninth of the pre-change one.
pub fn gaussian_to_uniform(narrow: bool) -> ScenarioSpec {
    let sigma = 0.1;
    let a = if narrow { sigma / 3.0f64.sqrt() } else { sigma * 3.0f64.sqrt() };
    ScenarioSpec::new(
        if narrow { "gaussian-to-uniform-narrow" } else { "gaussian-to-uniform" },
        Dist::gaussian(0.0, sigma),
        Dist::uniform(-a, a),
        50,
        100,
    )
}

/// Deterministic stream for replication `rep` of the scenario.
pub fn generate(scenario: &ScenarioSpec, rep: usize) -> Vec<f64> {
    let mut rng = seed::rng(scenario.seed, &[tag::SCENARIO, rep as u64]);
    (0..scenario.length)
        .map(|i| {
            if i < scenario.change_time {
                scenario.pre.sample(&mut rng)
            } else {
                scenario.post.sample(&mut rng)
            }
        })
        .collect()
}
