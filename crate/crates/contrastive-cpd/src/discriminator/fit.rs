//! Full-batch Adam ascent of the contrast functional.
//!
//! The objective for a candidate split with `tau` pre samples out of `t` is
//!
//! ```text
//! T(theta) = ((t - tau)/t) * sum_pre [f - ln((1 + e^f)/2)]
//!          - (tau/t)       * sum_post  ln((1 + e^f)/2)
//! ```
//!
//! where `f` is the discriminator output truncated to the clamp interval.
//! Truncated outputs contribute zero gradient, so a run that saturates every
//! sample stops moving. Every epoch's parameter vector is scored, including
//! the starting point, and the best one seen is returned.

use crate::buffer::Samples;
use crate::contrast::{contrastive_gradient_into, contrastive_value, SplitView};
use crate::seed;

use super::{
    check_dim, features_into, mlp, project_linear_constraints, DiscriminatorError,
    DiscriminatorSpec, Family, FittedDiscriminator,
};

/// Starting parameters used by [`fit`]: zeros for linear-in-parameter
/// families, seeded per-layer uniform draws for the network.
pub fn initial_params(spec: &DiscriminatorSpec, seed: u64) -> Vec<f64> {
    match &spec.family {
        Family::Mlp { layers } => mlp::init_params(layers, &mut seed::rng(seed, &[])),
        family => vec![0.0; family.param_count()],
    }
}

/// Fit a discriminator to the two segments by maximizing the contrast value.
///
/// `seed` only influences families with random initialization. Runs are
/// deterministic: the same inputs always return bitwise identical results.
pub fn fit(
    spec: &DiscriminatorSpec,
    pre: Samples<'_>,
    post: Samples<'_>,
    seed: u64,
) -> Result<FittedDiscriminator, DiscriminatorError> {
    fit_from(spec, pre, post, initial_params(spec, seed))
}

/// Like [`fit`] but starting from explicit parameters (warm starts, tests).
pub fn fit_from(
    spec: &DiscriminatorSpec,
    pre: Samples<'_>,
    post: Samples<'_>,
    init: Vec<f64>,
) -> Result<FittedDiscriminator, DiscriminatorError> {
    let num_params = spec.family.param_count();
    if init.len() != num_params {
        return Err(DiscriminatorError::ParamCountMismatch {
            expected: num_params,
            got: init.len(),
        });
    }
    let mut eval = Evaluator::new(spec, pre, post)?;
    let opt = &spec.optimizer;

    let mut params = init;
    if let Family::Linear { input_dim, constraint: Some(c) } = &spec.family {
        project_linear_constraints(&mut params, c, *input_dim);
    }
    let mut grad = vec![0.0; num_params];
    let mut value = eval.eval(&params, Some(&mut grad))?;
    if !value.is_finite() {
        return Err(DiscriminatorError::NonFiniteObjective { epoch: 0 });
    }
    let mut best_params = params.clone();
    let mut best_value = value;

    let mut m = vec![0.0; num_params];
    let mut v = vec![0.0; num_params];
    let mut beta1_pow = 1.0;
    let mut beta2_pow = 1.0;
    for epoch in 1..=opt.epochs {
        beta1_pow *= opt.beta1;
        beta2_pow *= opt.beta2;
        for k in 0..num_params {
            let g = grad[k];
            m[k] = opt.beta1 * m[k] + (1.0 - opt.beta1) * g;
            v[k] = opt.beta2 * v[k] + (1.0 - opt.beta2) * g * g;
            let m_hat = m[k] / (1.0 - beta1_pow);
            let v_hat = v[k] / (1.0 - beta2_pow);
            params[k] += opt.learning_rate * m_hat / (v_hat.sqrt() + opt.epsilon);
        }
        if let Family::Linear { input_dim, constraint: Some(c) } = &spec.family {
            project_linear_constraints(&mut params, c, *input_dim);
        }
        value = eval.eval(&params, Some(&mut grad))?;
        if !value.is_finite() {
            return Err(DiscriminatorError::NonFiniteObjective { epoch });
        }
        if value > best_value {
            best_value = value;
            best_params.copy_from_slice(&params);
        }
    }

    Ok(FittedDiscriminator { spec: spec.clone(), params: best_params, achieved_value: best_value })
}

/// Contrast value of `params` on the two segments (truncated outputs).
pub fn objective(
    spec: &DiscriminatorSpec,
    params: &[f64],
    pre: Samples<'_>,
    post: Samples<'_>,
) -> Result<f64, DiscriminatorError> {
    Evaluator::new(spec, pre, post)?.eval(params, None)
}

/// Contrast value together with its gradient in the parameters.
///
/// Samples whose raw output lies on or past the clamp boundary contribute
/// zero gradient.
pub fn objective_and_gradient(
    spec: &DiscriminatorSpec,
    params: &[f64],
    pre: Samples<'_>,
    post: Samples<'_>,
) -> Result<(f64, Vec<f64>), DiscriminatorError> {
    let mut eval = Evaluator::new(spec, pre, post)?;
    let mut grad = vec![0.0; spec.family.param_count()];
    let value = eval.eval(params, Some(&mut grad))?;
    Ok((value, grad))
}

/// Untruncated discriminator output at `x`.
pub fn raw_output(
    spec: &DiscriminatorSpec,
    params: &[f64],
    x: &[f64],
) -> Result<f64, DiscriminatorError> {
    let num_params = spec.family.param_count();
    if params.len() != num_params {
        return Err(DiscriminatorError::ParamCountMismatch {
            expected: num_params,
            got: params.len(),
        });
    }
    match &spec.family {
        Family::Mlp { layers } => {
            if x.len() != layers[0] {
                return Err(DiscriminatorError::DimensionMismatch {
                    expected: layers[0],
                    got: x.len(),
                });
            }
            let mut ws = mlp::Workspace::new(layers);
            Ok(mlp::forward(layers, params, x, &mut ws))
        }
        family => {
            let mut feats = vec![0.0; num_params];
            features_into(family, x, &mut feats)?;
            Ok(feats.iter().zip(params.iter()).map(|(a, b)| a * b).sum())
        }
    }
}

/// Smallest distance from a hidden preactivation to the ReLU kink at `x`.
///
/// Central finite differences of the output are unreliable within the step
/// size of a kink; gradient checks use this to reject such points. Families
/// without hidden units return infinity.
pub fn relu_kink_margin(
    spec: &DiscriminatorSpec,
    params: &[f64],
    x: &[f64],
) -> Result<f64, DiscriminatorError> {
    match &spec.family {
        Family::Mlp { layers } => {
            let num_params = spec.family.param_count();
            if params.len() != num_params {
                return Err(DiscriminatorError::ParamCountMismatch {
                    expected: num_params,
                    got: params.len(),
                });
            }
            if x.len() != layers[0] {
                return Err(DiscriminatorError::DimensionMismatch {
                    expected: layers[0],
                    got: x.len(),
                });
            }
            let mut ws = mlp::Workspace::new(layers);
            mlp::forward(layers, params, x, &mut ws);
            Ok(ws.min_hidden_preact_magnitude())
        }
        _ => Ok(f64::INFINITY),
    }
}

// ---- shared evaluation state ----

/// Caches per-fit state: the feature matrix for linear-in-parameter families
/// and scratch buffers for outputs and the per-sample contrast gradient.
struct Evaluator<'a> {
    spec: &'a DiscriminatorSpec,
    pre: Samples<'a>,
    post: Samples<'a>,
    tau: usize,
    total: usize,
    /// Row-major `total x param_count` feature matrix (linear families only).
    feats: Option<Vec<f64>>,
    ws: mlp::Workspace,
    raw: Vec<f64>,
    clamped: Vec<f64>,
    sample_grad: Vec<f64>,
}

impl<'a> Evaluator<'a> {
    fn new(
        spec: &'a DiscriminatorSpec,
        pre: Samples<'a>,
        post: Samples<'a>,
    ) -> Result<Self, DiscriminatorError> {
        assert!(!pre.is_empty() && !post.is_empty(), "both segments must be non-empty");
        check_dim(&spec.family, pre)?;
        check_dim(&spec.family, post)?;
        let tau = pre.len();
        let total = tau + post.len();
        let num_params = spec.family.param_count();
        let feats = if spec.family.is_linear_in_params() {
            let mut m = vec![0.0; total * num_params];
            for (i, x) in pre.iter().chain(post.iter()).enumerate() {
                features_into(&spec.family, x, &mut m[i * num_params..(i + 1) * num_params])?;
            }
            Some(m)
        } else {
            None
        };
        let ws = match &spec.family {
            Family::Mlp { layers } => mlp::Workspace::new(layers),
            _ => mlp::Workspace::default(),
        };
        Ok(Self {
            spec,
            pre,
            post,
            tau,
            total,
            feats,
            ws,
            raw: vec![0.0; total],
            clamped: vec![0.0; total],
            sample_grad: vec![0.0; total],
        })
    }

    /// Objective value at `params`; fills `grad` with the parameter gradient
    /// when given. `grad` must have the family's parameter count.
    fn eval(&mut self, params: &[f64], grad: Option<&mut [f64]>) -> Result<f64, DiscriminatorError> {
        let num_params = self.spec.family.param_count();
        if params.len() != num_params {
            return Err(DiscriminatorError::ParamCountMismatch {
                expected: num_params,
                got: params.len(),
            });
        }
        let pre = self.pre;
        let post = self.post;
        match (&self.spec.family, &self.feats) {
            (Family::Mlp { layers }, _) => {
                for (i, x) in pre.iter().chain(post.iter()).enumerate() {
                    self.raw[i] = mlp::forward(layers, params, x, &mut self.ws);
                }
            }
            (_, Some(feats)) => {
                for i in 0..self.total {
                    let row = &feats[i * num_params..(i + 1) * num_params];
                    self.raw[i] = row.iter().zip(params.iter()).map(|(a, b)| a * b).sum();
                }
            }
            _ => unreachable!("linear families always cache features"),
        }
        let bound = self.spec.clamp_bound;
        for i in 0..self.total {
            self.clamped[i] = self.raw[i].clamp(-bound, bound);
        }
        let (pre_vals, post_vals) = self.clamped.split_at(self.tau);
        let view = SplitView::new(pre_vals, post_vals);
        let value = contrastive_value(view);

        if let Some(out) = grad {
            debug_assert_eq!(out.len(), num_params);
            contrastive_gradient_into(view, &mut self.sample_grad);
            for i in 0..self.total {
                if self.raw[i].abs() >= bound {
                    self.sample_grad[i] = 0.0;
                }
            }
            out.fill(0.0);
            match (&self.spec.family, &self.feats) {
                (Family::Mlp { layers }, _) => {
                    for (i, x) in pre.iter().chain(post.iter()).enumerate() {
                        let g = self.sample_grad[i];
                        if g == 0.0 {
                            continue;
                        }
                        mlp::forward(layers, params, x, &mut self.ws);
                        mlp::accumulate_gradient(layers, params, g, &mut self.ws, out);
                    }
                }
                (_, Some(feats)) => {
                    for i in 0..self.total {
                        let g = self.sample_grad[i];
                        if g == 0.0 {
                            continue;
                        }
                        let row = &feats[i * num_params..(i + 1) * num_params];
                        for (o, phi) in out.iter_mut().zip(row.iter()) {
                            *o += g * phi;
                        }
                    }
                }
                _ => unreachable!(),
            }
        }
        Ok(value)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed;
    use rand::Rng;
    use rand_distr::{Distribution, Normal};

    fn gaussian_samples(rng: &mut rand_chacha::ChaCha8Rng, n: usize, mean: f64, std: f64) -> Vec<f64> {
        let normal = Normal::new(mean, std).unwrap();
        (0..n).map(|_| normal.sample(rng)).collect()
    }

    /// Exhaustive search over a square grid in two parameters, refined once
    /// around the best cell.
    fn grid_max_2d(
        spec: &DiscriminatorSpec,
        pre: Samples<'_>,
        post: Samples<'_>,
        lo: f64,
        hi: f64,
        steps: usize,
    ) -> f64 {
        let sweep = |alo: f64, ahi: f64, blo: f64, bhi: f64| -> (f64, f64, f64) {
            let mut best = (f64::NEG_INFINITY, alo, blo);
            for i in 0..steps {
                let a = alo + (ahi - alo) * i as f64 / (steps - 1) as f64;
                for j in 0..steps {
                    let b = blo + (bhi - blo) * j as f64 / (steps - 1) as f64;
                    let v = objective(spec, &[a, b], pre, post).unwrap();
                    if v > best.0 {
                        best = (v, a, b);
                    }
                }
            }
            best
        };
        let cell = (hi - lo) / (steps - 1) as f64;
        let (_, a0, b0) = sweep(lo, hi, lo, hi);
        let (refined, _, _) = sweep(a0 - cell, a0 + cell, b0 - cell, b0 + cell);
        refined
    }

    #[test]
    fn fit_on_same_distribution_stays_below_grid_maximum() {
        let mut rng = seed::rng(42, &[]);
        let values = gaussian_samples(&mut rng, 40, 0.0, 0.1);
        let pre = Samples::from_scalars(&values[..20]);
        let post = Samples::from_scalars(&values[20..]);
        let spec = DiscriminatorSpec::parse("poly:1").unwrap();
        let fitted = fit(&spec, pre, post, 0).unwrap();
        let grid = grid_max_2d(&spec, pre, post, -5.0, 5.0, 201);
        assert!(fitted.achieved_value >= 0.0, "best seen includes the zero start");
        assert!(
            fitted.achieved_value <= grid + 1e-3,
            "achieved {} exceeds grid maximum {}",
            fitted.achieved_value,
            grid
        );
    }

    #[test]
    fn fit_on_separated_data_approaches_grid_maximum() {
        let pre_vals = vec![1.0; 20];
        let post_vals = vec![-1.0; 20];
        let pre = Samples::from_scalars(&pre_vals);
        let post = Samples::from_scalars(&post_vals);
        let mut spec = DiscriminatorSpec::parse("linear:1").unwrap();
        spec.optimizer.epochs = 150;
        let fitted = fit(&spec, pre, post, 0).unwrap();
        let grid = grid_max_2d(&spec, pre, post, -5.0, 5.0, 201);
        let rel = (fitted.achieved_value - grid).abs() / grid;
        assert!(rel <= 0.05, "achieved {} vs grid {} (rel {})", fitted.achieved_value, grid, rel);
    }

    #[test]
    fn zero_learning_rate_returns_initial_params() {
        let pre_vals = vec![0.5; 10];
        let post_vals = vec![-0.5; 10];
        let pre = Samples::from_scalars(&pre_vals);
        let post = Samples::from_scalars(&post_vals);
        let mut spec = DiscriminatorSpec::parse("poly:1").unwrap();
        spec.optimizer.learning_rate = 0.0;
        let fitted = fit(&spec, pre, post, 0).unwrap();
        assert_eq!(fitted.params, vec![0.0, 0.0]);
        assert_eq!(fitted.achieved_value, 0.0);
    }

    #[test]
    fn zero_epochs_returns_scored_initial_params() {
        let pre_vals = vec![0.2; 8];
        let post_vals = vec![-0.2; 8];
        let pre = Samples::from_scalars(&pre_vals);
        let post = Samples::from_scalars(&post_vals);
        let mut spec = DiscriminatorSpec::parse("mlp").unwrap();
        spec.optimizer.epochs = 0;
        let init = initial_params(&spec, 9);
        let fitted = fit(&spec, pre, post, 9).unwrap();
        assert_eq!(fitted.params, init);
        assert_eq!(
            fitted.achieved_value,
            objective(&spec, &init, pre, post).unwrap()
        );
    }

    #[test]
    fn doubling_epochs_never_hurts() {
        let mut rng = seed::rng(7, &[]);
        let pre_vals = gaussian_samples(&mut rng, 25, 0.0, 0.1);
        let post_vals = gaussian_samples(&mut rng, 25, 0.1, 0.1);
        let pre = Samples::from_scalars(&pre_vals);
        let post = Samples::from_scalars(&post_vals);
        let mut short = DiscriminatorSpec::parse("poly:1").unwrap();
        short.optimizer.epochs = 25;
        let mut long = short.clone();
        long.optimizer.epochs = 50;
        let a = fit(&short, pre, post, 0).unwrap().achieved_value;
        let b = fit(&long, pre, post, 0).unwrap().achieved_value;
        assert!(b >= a, "more epochs lowered the best value: {b} < {a}");
    }

    #[test]
    fn fits_are_bitwise_deterministic() {
        let mut rng = seed::rng(3, &[]);
        let pre_vals = gaussian_samples(&mut rng, 15, 0.0, 0.1);
        let post_vals = gaussian_samples(&mut rng, 15, 0.2, 0.1);
        let pre = Samples::from_scalars(&pre_vals);
        let post = Samples::from_scalars(&post_vals);
        let spec = DiscriminatorSpec::parse("mlp").unwrap();
        let a = fit(&spec, pre, post, 17).unwrap();
        let b = fit(&spec, pre, post, 17).unwrap();
        assert_eq!(a.params, b.params);
        assert_eq!(a.achieved_value, b.achieved_value);
        let c = fit(&spec, pre, post, 18).unwrap();
        assert_ne!(a.params, c.params, "different seeds should give different inits");
    }

    #[test]
    fn constrained_fit_respects_radii() {
        let pre_vals = vec![1.0; 15];
        let post_vals = vec![-1.0; 15];
        let pre = Samples::from_scalars(&pre_vals);
        let post = Samples::from_scalars(&post_vals);
        let constraint = super::super::LinearConstraint {
            weight_radius: 0.5,
            bias_radius: 0.3,
            sigma: None,
        };
        let family = Family::Linear { input_dim: 1, constraint: Some(constraint) };
        let spec = DiscriminatorSpec::new(family).unwrap();
        let fitted = fit(&spec, pre, post, 0).unwrap();
        assert!(fitted.params[0].abs() <= 0.5 + 1e-12);
        assert!(fitted.params[1].abs() <= 0.3 + 1e-12);
        assert!(fitted.achieved_value > 0.0);
    }

    #[test]
    fn non_finite_start_is_reported() {
        let pre_vals = vec![1.0; 5];
        let post_vals = vec![-1.0; 5];
        let pre = Samples::from_scalars(&pre_vals);
        let post = Samples::from_scalars(&post_vals);
        let spec = DiscriminatorSpec::parse("poly:1").unwrap();
        let err = fit_from(&spec, pre, post, vec![f64::NAN, 0.0]).unwrap_err();
        assert_eq!(err, DiscriminatorError::NonFiniteObjective { epoch: 0 });
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let vals = vec![1.0, 2.0, 3.0, 4.0];
        let pre = Samples::new(&vals, 2);
        let post = Samples::new(&vals, 2);
        let spec = DiscriminatorSpec::parse("poly:1").unwrap();
        assert_eq!(
            fit(&spec, pre, post, 0).unwrap_err(),
            DiscriminatorError::DimensionMismatch { expected: 1, got: 2 }
        );
    }

    #[test]
    fn saturated_samples_freeze_their_gradient() {
        let pre_vals = vec![1.0; 4];
        let post_vals = vec![-1.0; 4];
        let pre = Samples::from_scalars(&pre_vals);
        let post = Samples::from_scalars(&post_vals);
        let spec = DiscriminatorSpec::parse("linear:1").unwrap();
        // w = 20 drives every output past the bound.
        let (_, grad) = objective_and_gradient(&spec, &[20.0, 0.0], pre, post).unwrap();
        assert_eq!(grad, vec![0.0, 0.0]);
        // Just inside the bound the gradient is alive.
        let (_, grad) = objective_and_gradient(&spec, &[9.9, 0.0], pre, post).unwrap();
        assert!(grad[0] != 0.0);
    }

    /// Central finite differences of the objective in each parameter.
    fn fd_param_gradient(
        spec: &DiscriminatorSpec,
        params: &[f64],
        pre: Samples<'_>,
        post: Samples<'_>,
        h: f64,
    ) -> Vec<f64> {
        (0..params.len())
            .map(|k| {
                let mut plus = params.to_vec();
                plus[k] += h;
                let mut minus = params.to_vec();
                minus[k] -= h;
                (objective(spec, &plus, pre, post).unwrap()
                    - objective(spec, &minus, pre, post).unwrap())
                    / (2.0 * h)
            })
            .collect()
    }

    #[test]
    fn analytic_gradient_matches_finite_differences_for_all_families() {
        let h = 1e-6;
        for family in ["poly:2", "fourier:3", "linear:1", "mlp"] {
            let spec = DiscriminatorSpec::parse(family).unwrap();
            let num_params = spec.family.param_count();
            'config: for config in 0..5u64 {
                let mut rng = seed::rng(config, &[seed::tag::MONTE_CARLO]);
                for attempt in 0..50 {
                    let params: Vec<f64> =
                        (0..num_params).map(|_| rng.random_range(-0.8..0.8)).collect();
                    let pre_vals = gaussian_samples(&mut rng, 8, 0.0, 0.8);
                    let post_vals = gaussian_samples(&mut rng, 7, 0.3, 0.8);
                    let pre = Samples::from_scalars(&pre_vals);
                    let post = Samples::from_scalars(&post_vals);
                    // Reject configurations where finite differences straddle
                    // a ReLU kink or the clamp boundary.
                    let clean = pre_vals.iter().chain(post_vals.iter()).all(|&x| {
                        let raw = raw_output(&spec, &params, &[x]).unwrap();
                        let margin = relu_kink_margin(&spec, &params, &[x]).unwrap();
                        (raw.abs() - spec.clamp_bound).abs() > 1e-3 && margin > 1e-4
                    });
                    if !clean {
                        assert!(attempt < 49, "could not find a clean config for {family}");
                        continue;
                    }
                    let (_, grad) =
                        objective_and_gradient(&spec, &params, pre, post).unwrap();
                    let fd = fd_param_gradient(&spec, &params, pre, post, h);
                    for (k, (&a, &b)) in grad.iter().zip(fd.iter()).enumerate() {
                        let tol = 1e-8 + 1e-5 * a.abs().max(b.abs());
                        assert!(
                            (a - b).abs() <= tol,
                            "{family} config {config} param {k}: analytic {a} vs fd {b}"
                        );
                    }
                    continue 'config;
                }
            }
        }
    }
}
