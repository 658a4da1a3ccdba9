//! The contrast functional, its output-space gradient, and the max statistic.
//!
//! For a stream of length `t` split at `tau`, the discriminator outputs
//! `f_1..f_t` are scored by
//!
//! ```text
//! T(f) = (t-tau)/t * sum_{s<=tau} [f_s - ln((1+e^{f_s})/2)]
//!        - tau/t  * sum_{s>tau}  ln((1+e^{f_s})/2)
//! ```
//!
//! which is the scaled logistic cross-entropy of classifying the two segments
//! against each other. `T` is concave in the outputs, zero at the zero
//! function, and its expectation under an actual distribution change grows
//! linearly with the post-change segment length (at the log density ratio it
//! equals `2*tau*(t-tau)/t` times the Jensen-Shannon divergence between the
//! two regimes). The detector's statistic is the maximum of fitted values of
//! `T` over admissible splits.
//!
//! Everything here is a pure function of its inputs.

use std::f64::consts::LN_2;

/// Discriminator outputs split at a candidate change point.
///
/// `pre` holds `f(X_1)..f(X_tau)`, `post` holds `f(X_{tau+1})..f(X_t)`.
/// Both segments are non-empty, so `1 <= tau <= t-1` and `t >= 2`.
#[derive(Debug, Clone, Copy)]
pub struct SplitView<'a> {
    pre: &'a [f64],
    post: &'a [f64],
}

impl<'a> SplitView<'a> {
    /// View over the two output segments. Panics if either is empty.
    pub fn new(pre: &'a [f64], post: &'a [f64]) -> Self {
        assert!(!pre.is_empty() && !post.is_empty(), "both segments must be non-empty");
        Self { pre, post }
    }

    pub fn pre(&self) -> &'a [f64] {
        self.pre
    }

    pub fn post(&self) -> &'a [f64] {
        self.post
    }

    /// Split index `tau = |pre|`.
    pub fn tau(&self) -> usize {
        self.pre.len()
    }

    /// Total length `t = |pre| + |post|`.
    pub fn t(&self) -> usize {
        self.pre.len() + self.post.len()
    }
}

/// Maximum of the contrast values over admissible splits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StatValue {
    /// The maximal contrast value.
    pub value: f64,
    /// The split achieving it (smallest such split on ties).
    pub tau: usize,
}

/// No admissible split: the range `{margin..=t-margin}` is empty.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("no admissible split for t={t}, margin={margin}")]
pub struct EmptyRange {
    pub t: usize,
    pub margin: usize,
}

/// `ln((1 + e^x) / 2)` without overflow.
///
/// Computed as `max(x, 0) + ln(1 + e^{-|x|}) - ln 2`; exact at 0 and accurate
/// through the whole `f64` range.
#[inline]
pub fn softplus_half(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p() - LN_2
}

/// Logistic function `1 / (1 + e^{-x})`, evaluated without overflow.
#[inline]
pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

// Pairwise (cascade) summation above this length; plain left fold below.
const PAIRWISE_CUTOFF: usize = 1024;

fn sum_by(values: &[f64], f: impl Fn(f64) -> f64 + Copy) -> f64 {
    if values.len() <= PAIRWISE_CUTOFF {
        values.iter().map(|&x| f(x)).sum()
    } else {
        let mid = values.len() / 2;
        sum_by(&values[..mid], f) + sum_by(&values[mid..], f)
    }
}

/// Value of the contrast functional at the given outputs.
pub fn contrastive_value(view: SplitView<'_>) -> f64 {
    let tau = view.tau() as f64;
    let t = view.t() as f64;
    let pre_sum = sum_by(view.pre, |f| f - softplus_half(f));
    let post_sum = sum_by(view.post, softplus_half);
    (t - tau) / t * pre_sum - tau / t * post_sum
}

/// Gradient of [`contrastive_value`] with respect to each output.
///
/// Pre-segment components are `(t-tau)/t * (1 - sigma(f_s))`, post-segment
/// components are `-tau/t * sigma(f_s)`; entries follow stream order. The
/// pre factor is computed as `sigma(-f_s)` so it stays positive for large
/// outputs instead of cancelling to zero.
pub fn contrastive_gradient(view: SplitView<'_>) -> Vec<f64> {
    let tau = view.tau() as f64;
    let t = view.t() as f64;
    let pre_w = (t - tau) / t;
    let post_w = tau / t;
    view.pre
        .iter()
        .map(|&f| pre_w * sigmoid(-f))
        .chain(view.post.iter().map(|&f| -post_w * sigmoid(f)))
        .collect()
}

/// In-place variant of [`contrastive_gradient`]; `out` must have length `t`.
pub fn contrastive_gradient_into(view: SplitView<'_>, out: &mut [f64]) {
    debug_assert_eq!(out.len(), view.t());
    let tau = view.tau();
    let t = view.t() as f64;
    let pre_w = (t - tau as f64) / t;
    let post_w = tau as f64 / t;
    for (o, &f) in out[..tau].iter_mut().zip(view.pre) {
        *o = pre_w * sigmoid(-f);
    }
    for (o, &f) in out[tau..].iter_mut().zip(view.post) {
        *o = -post_w * sigmoid(f);
    }
}

/// Maximum over the splits `tau in {margin, ..., t - margin}`.
///
/// `values` pairs each candidate split with its fitted contrast value; `t` is
/// the stream length the candidates refer to. Ties resolve to the smallest
/// split. With `margin = 1` every split `1..t-1` is admissible.
pub fn max_statistic(
    values: &[(usize, f64)],
    margin: usize,
    t: usize,
) -> Result<StatValue, EmptyRange> {
    assert!(margin >= 1, "margin must be at least 1");
    let hi = t.saturating_sub(margin);
    let mut best: Option<StatValue> = None;
    for &(tau, value) in values {
        if tau < margin || tau > hi {
            continue;
        }
        let better = match best {
            None => true,
            Some(b) => value > b.value || (value == b.value && tau < b.tau),
        };
        if better {
            best = Some(StatValue { value, tau });
        }
    }
    best.ok_or(EmptyRange { t, margin })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    /// Central finite difference of `contrastive_value` in every coordinate.
    fn fd_gradient(pre: &[f64], post: &[f64], h: f64) -> Vec<f64> {
        let tau = pre.len();
        let mut outputs: Vec<f64> = pre.iter().chain(post.iter()).copied().collect();
        (0..outputs.len())
            .map(|i| {
                let orig = outputs[i];
                outputs[i] = orig + h;
                let up = contrastive_value(SplitView::new(&outputs[..tau], &outputs[tau..]));
                outputs[i] = orig - h;
                let down = contrastive_value(SplitView::new(&outputs[..tau], &outputs[tau..]));
                outputs[i] = orig;
                (up - down) / (2.0 * h)
            })
            .collect()
    }

    fn assert_close(a: f64, b: f64, rel: f64, abs: f64) {
        let tol = abs + rel * a.abs().max(b.abs());
        assert!((a - b).abs() <= tol, "{a} vs {b} beyond tol {tol}");
    }

    #[test]
    fn softplus_half_at_zero_is_exact() {
        assert_eq!(softplus_half(0.0), 0.0);
    }

    #[test]
    fn softplus_half_large_positive() {
        // ln((1+e^50)/2) = 50 - ln 2 + ln(1 + e^-50); the last term is ~2e-22.
        assert_abs_diff_eq!(softplus_half(50.0), 50.0 - LN_2, epsilon = 1e-12);
    }

    #[test]
    fn softplus_half_large_negative() {
        // Series oracle: ln((1+e^x)/2) = -ln 2 + e^x - e^{2x}/2 + ...
        // At x = -50 the residual above -ln 2 is e^-50 ~ 1.9e-22, positive but
        // below 1e-20 and below the ulp of ln 2, so the correctly rounded f64
        // result is exactly -ln 2.
        let residual = (-50.0f64).exp();
        assert!(residual > 0.0 && residual < 1e-20);
        assert_eq!(softplus_half(-50.0), -LN_2);
    }

    #[test]
    fn softplus_half_matches_direct_evaluation_in_safe_range() {
        // Direct ln((1+e^x)/2) is trustworthy for |x| <= 30; the stable form
        // must agree to close to machine precision there.
        for i in -300..=300 {
            let x = i as f64 * 0.1;
            let direct = ((1.0 + x.exp()) / 2.0).ln();
            assert_abs_diff_eq!(softplus_half(x), direct, epsilon = 1e-13);
        }
    }

    #[test]
    fn softplus_half_no_overflow_at_700() {
        assert!(softplus_half(700.0).is_finite());
        assert!(softplus_half(-700.0).is_finite());
        assert_abs_diff_eq!(softplus_half(700.0), 700.0 - LN_2, epsilon = 1e-9);
    }

    #[test]
    fn value_zero_outputs_is_exactly_zero() {
        for (tau, t) in [(1usize, 2usize), (3, 7), (10, 100), (50, 51)] {
            let outputs = vec![0.0; t];
            let v = contrastive_value(SplitView::new(&outputs[..tau], &outputs[tau..]));
            assert_eq!(v, 0.0, "tau={tau}, t={t}");
        }
    }

    #[test]
    fn value_ln3_pair() {
        // tau=1, t=2, f=(ln 3, ln 3): (1/2)(ln 3 - 2 ln 2).
        let f = 3.0f64.ln();
        let v = contrastive_value(SplitView::new(&[f], &[f]));
        let expected = 0.5 * (3.0f64.ln() - 2.0 * LN_2);
        assert_abs_diff_eq!(v, expected, epsilon = 1e-15);
        assert_abs_diff_eq!(v, -0.14384, epsilon = 1e-5);
    }

    #[test]
    fn constant_outputs_maximised_at_zero() {
        // For f = c everywhere, T = tau*(t-tau)/t * (c - 2*softplus_half(c)),
        // whose scalar derivative 1 - 2*sigma(c) vanishes only at c = 0.
        for (tau, t) in [(1usize, 2usize), (4, 9), (25, 60)] {
            let mut best = f64::NEG_INFINITY;
            let mut best_c = f64::NAN;
            for i in -60..=60 {
                let c = i as f64 * 0.1;
                let outputs = vec![c; t];
                let v = contrastive_value(SplitView::new(&outputs[..tau], &outputs[tau..]));
                assert!(v <= 1e-15, "T({c}) = {v} must be <= 0");
                if v > best {
                    best = v;
                    best_c = c;
                }
            }
            assert_eq!(best_c, 0.0);
            assert_eq!(best, 0.0);
        }
    }

    #[test]
    fn gradient_simple_pair() {
        let g = contrastive_gradient(SplitView::new(&[0.0], &[0.0]));
        assert_eq!(g, vec![0.25, -0.25]);
        let fd = fd_gradient(&[0.0], &[0.0], 1e-6);
        assert_close(g[0], fd[0], 1e-6, 1e-9);
        assert_close(g[1], fd[1], 1e-6, 1e-9);
    }

    #[test]
    fn gradient_saturates_to_zero_from_above() {
        let g = contrastive_gradient(SplitView::new(&[40.0, 40.0], &[0.0]));
        assert!(g[0] > 0.0 && g[0] < 1e-15);
        assert!(g[1] > 0.0 && g[1] < 1e-15);
    }

    #[test]
    fn gradient_matches_fd_mixed_case() {
        let pre = [1.0, -1.0];
        let post = [0.5, -0.5];
        let g = contrastive_gradient(SplitView::new(&pre, &post));
        let fd = fd_gradient(&pre, &post, 1e-6);
        for (a, b) in g.iter().zip(&fd) {
            assert_close(*a, *b, 1e-6, 1e-9);
        }
    }

    #[test]
    fn gradient_into_matches_allocating_variant() {
        let pre = [0.3, -2.0, 5.0];
        let post = [1.5, 0.0];
        let view = SplitView::new(&pre, &post);
        let mut out = vec![0.0; 5];
        contrastive_gradient_into(view, &mut out);
        assert_eq!(out, contrastive_gradient(view));
    }

    #[test]
    fn max_statistic_basic() {
        let s = max_statistic(&[(10, -1.0), (11, 0.5), (12, 0.2)], 10, 22).unwrap();
        assert_eq!(s, StatValue { value: 0.5, tau: 11 });
    }

    #[test]
    fn max_statistic_tie_breaks_to_smallest_tau() {
        let s = max_statistic(&[(10, 0.3), (11, 0.3)], 10, 22).unwrap();
        assert_eq!(s.tau, 10);
        // Order of the input list must not matter for the tie-break.
        let s = max_statistic(&[(11, 0.3), (10, 0.3)], 10, 22).unwrap();
        assert_eq!(s.tau, 10);
    }

    #[test]
    fn max_statistic_empty_range() {
        let err = max_statistic(&[(10, 1.0)], 10, 15).unwrap_err();
        assert_eq!(err, EmptyRange { t: 15, margin: 10 });
    }

    #[test]
    fn max_statistic_margin_one_is_unrestricted() {
        let s = max_statistic(&[(1, 0.9), (2, 0.1)], 1, 3).unwrap();
        assert_eq!(s.tau, 1);
    }

    #[test]
    fn pairwise_sum_long_segment_matches_naive_sum() {
        let values: Vec<f64> = (0..5000).map(|i| ((i * 37) % 101) as f64 * 1e-3).collect();
        let naive: f64 = values.iter().sum();
        assert_abs_diff_eq!(sum_by(&values, |x| x), naive, epsilon = 1e-9);
    }

    proptest! {
        #[test]
        fn prop_permutation_invariance(
            mut pre in proptest::collection::vec(-10.0f64..10.0, 1..40),
            mut post in proptest::collection::vec(-10.0f64..10.0, 1..40),
        ) {
            let base = contrastive_value(SplitView::new(&pre, &post));
            pre.reverse();
            let half = post.len() / 2;
            post.rotate_left(half);
            let permuted = contrastive_value(SplitView::new(&pre, &post));
            prop_assert!((base - permuted).abs() <= 1e-12 * (1.0 + base.abs()));
        }

        #[test]
        fn prop_concavity_in_outputs(
            u in proptest::collection::vec(-10.0f64..10.0, 2..30),
            v_seed in proptest::collection::vec(-10.0f64..10.0, 2..30),
            lambda in 0.0f64..=1.0,
            tau_frac in 0.1f64..0.9,
        ) {
            let n = u.len().min(v_seed.len()).max(2);
            let u = &u[..n];
            let v = &v_seed[..n];
            let tau = ((n as f64 * tau_frac) as usize).clamp(1, n - 1);
            let mix: Vec<f64> = u.iter().zip(v).map(|(a, b)| lambda * a + (1.0 - lambda) * b).collect();
            let val_mix = contrastive_value(SplitView::new(&mix[..tau], &mix[tau..]));
            let val_u = contrastive_value(SplitView::new(&u[..tau], &u[tau..]));
            let val_v = contrastive_value(SplitView::new(&v[..tau], &v[tau..]));
            prop_assert!(val_mix >= lambda * val_u + (1.0 - lambda) * val_v - 1e-12);
        }

        #[test]
        fn prop_gradient_matches_finite_differences(
            pre in proptest::collection::vec(-10.0f64..10.0, 1..20),
            post in proptest::collection::vec(-10.0f64..10.0, 1..20),
        ) {
            let g = contrastive_gradient(SplitView::new(&pre, &post));
            // h balances truncation against the ~1e-14 rounding noise of the
            // two objective evaluations; the tolerance floor absorbs the rest.
            let fd = fd_gradient(&pre, &post, 1e-5);
            for (a, b) in g.iter().zip(&fd) {
                let tol = 1e-8 + 1e-6 * a.abs().max(b.abs());
                prop_assert!((a - b).abs() <= tol, "{} vs {}", a, b);
            }
        }

        #[test]
        fn prop_zero_outputs_zero_value(tau in 1usize..50, extra in 1usize..50) {
            let t = tau + extra;
            let outputs = vec![0.0; t];
            prop_assert_eq!(contrastive_value(SplitView::new(&outputs[..tau], &outputs[tau..])), 0.0);
        }
    }
}
