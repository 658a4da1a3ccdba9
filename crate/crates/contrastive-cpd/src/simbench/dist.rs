//! Scalar laws used by scenarios and divergence oracles.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

/// A scalar sampling distribution with a pointwise density.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Dist {
    Gaussian { mean: f64, std: f64 },
    /// Uniform on the closed interval `[a, b]`.
    Uniform { a: f64, b: f64 },
}

impl Dist {
    pub fn gaussian(mean: f64, std: f64) -> Self {
        assert!(std > 0.0, "gaussian std must be positive");
        Dist::Gaussian { mean, std }
    }

    pub fn uniform(a: f64, b: f64) -> Self {
        assert!(b > a, "uniform interval must have positive width");
        Dist::Uniform { a, b }
    }

    pub fn mean(&self) -> f64 {
        match self {
            Dist::Gaussian { mean, .. } => *mean,
            Dist::Uniform { a, b } => 0.5 * (a + b),
        }
    }

    pub fn variance(&self) -> f64 {
        match self {
            Dist::Gaussian { std, .. } => std * std,
            Dist::Uniform { a, b } => (b - a) * (b - a) / 12.0,
        }
    }

    pub fn std(&self) -> f64 {
        self.variance().sqrt()
    }

    pub fn pdf(&self, x: f64) -> f64 {
        match self {
            Dist::Gaussian { mean, std } => {
                let z = (x - mean) / std;
                (-0.5 * z * z).exp() / (std * (2.0 * std::f64::consts::PI).sqrt())
            }
            Dist::Uniform { a, b } => {
                if x >= *a && x <= *b {
                    1.0 / (b - a)
                } else {
                    0.0
                }
            }
        }
    }

    /// Natural log of the density; negative infinity off the support.
    pub fn log_pdf(&self, x: f64) -> f64 {
        match self {
            Dist::Gaussian { mean, std } => {
                let z = (x - mean) / std;
                -0.5 * z * z - std.ln() - 0.5 * (2.0 * std::f64::consts::PI).ln()
            }
            Dist::Uniform { a, b } => {
                if x >= *a && x <= *b {
                    -(b - a).ln()
                } else {
                    f64::NEG_INFINITY
                }
            }
        }
    }

    pub fn sample(&self, rng: &mut ChaCha8Rng) -> f64 {
        match self {
            Dist::Gaussian { mean, std } => {
                Normal::new(*mean, *std).expect("std checked on construction").sample(rng)
            }
            Dist::Uniform { a, b } => rng.random_range(*a..=*b),
        }
    }

    /// Left end of the numerically relevant range (10 standard deviations
    /// into a Gaussian tail, the exact endpoint for a uniform).
    pub fn range_lo(&self) -> f64 {
        match self {
            Dist::Gaussian { mean, std } => mean - 10.0 * std,
            Dist::Uniform { a, .. } => *a,
        }
    }

    pub fn range_hi(&self) -> f64 {
        match self {
            Dist::Gaussian { mean, std } => mean + 10.0 * std,
            Dist::Uniform { b, .. } => *b,
        }
    }

    /// Points where the density is discontinuous; quadrature splits panels
    /// there.
    pub fn breakpoints(&self) -> Vec<f64> {
        match self {
            Dist::Gaussian { .. } => Vec::new(),
            Dist::Uniform { a, b } => vec![*a, *b],
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed;
    use approx::assert_abs_diff_eq;

    #[test]
    fn gaussian_density_matches_closed_form() {
        let d = Dist::gaussian(0.0, 1.0);
        assert_abs_diff_eq!(d.pdf(0.0), 1.0 / (2.0 * std::f64::consts::PI).sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(d.log_pdf(0.0), d.pdf(0.0).ln(), epsilon = 1e-12);
        let shifted = Dist::gaussian(2.0, 0.5);
        assert_abs_diff_eq!(shifted.pdf(2.0), 1.0 / (0.5 * (2.0 * std::f64::consts::PI).sqrt()), epsilon = 1e-15);
    }

    #[test]
    fn uniform_density_is_flat_inside_and_zero_outside() {
        let d = Dist::uniform(-1.0, 3.0);
        assert_eq!(d.pdf(0.0), 0.25);
        assert_eq!(d.pdf(-1.0), 0.25);
        assert_eq!(d.pdf(3.0), 0.25);
        assert_eq!(d.pdf(3.0001), 0.0);
        assert_eq!(d.log_pdf(5.0), f64::NEG_INFINITY);
        assert_abs_diff_eq!(d.log_pdf(1.0), 0.25f64.ln(), epsilon = 1e-15);
    }

    #[test]
    fn moments() {
        assert_eq!(Dist::gaussian(1.5, 0.2).mean(), 1.5);
        assert_abs_diff_eq!(Dist::gaussian(1.5, 0.2).variance(), 0.04, epsilon = 1e-15);
        let u = Dist::uniform(-2.0, 4.0);
        assert_eq!(u.mean(), 1.0);
        assert_abs_diff_eq!(u.variance(), 3.0, epsilon = 1e-15);
    }

    #[test]
    fn sampling_respects_support_and_moments() {
        let mut rng = seed::rng(0, &[]);
        let u = Dist::uniform(-0.5, 0.5);
        let mut sum = 0.0;
        for _ in 0..20_000 {
            let x = u.sample(&mut rng);
            assert!((-0.5..=0.5).contains(&x));
            sum += x;
        }
        // Mean of 20k uniform draws: se = (1/sqrt(12))/sqrt(20000) ~ 0.002.
        assert!(sum.abs() / 20_000.0 < 0.01);

        let g = Dist::gaussian(0.3, 0.1);
        let mean: f64 = (0..20_000).map(|_| g.sample(&mut rng)).sum::<f64>() / 20_000.0;
        assert!((mean - 0.3).abs() < 0.01);
    }

    #[test]
    fn ranges_and_breakpoints() {
        let g = Dist::gaussian(1.0, 0.1);
        assert_eq!(g.range_lo(), 0.0);
        assert_eq!(g.range_hi(), 2.0);
        assert!(g.breakpoints().is_empty());
        let u = Dist::uniform(0.0, 1.0);
        assert_eq!((u.range_lo(), u.range_hi()), (0.0, 1.0));
        assert_eq!(u.breakpoints(), vec![0.0, 1.0]);
    }
}
