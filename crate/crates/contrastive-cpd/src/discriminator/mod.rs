//! Discriminator families and their fitting.
//!
//! Four families score how much an observation looks pre-change: polynomials
//! of a fixed degree, the leading terms of the Fourier basis, affine
//! functions (optionally norm-constrained), and a small fully connected ReLU
//! network. The first three are linear in their parameters; all are trained by
//! full-batch Adam ascent on the contrast functional and evaluated with a
//! hard truncation of the output to `[-clamp_bound, clamp_bound]`.

use std::f64::consts::PI;
use std::fmt;

use crate::buffer::Samples;

mod fit;
mod mlp;

pub use fit::{
    fit, fit_from, initial_params, objective, objective_and_gradient, raw_output,
    relu_kink_margin,
};

/// Errors from discriminator construction, evaluation, and fitting.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DiscriminatorError {
    /// The operation is defined only for linear-in-parameter families.
    #[error("unsupported family for this operation: {0}")]
    UnsupportedFamily(String),
    /// The input's dimension does not match the family's.
    #[error("dimension mismatch: family expects {expected}, sample has {got}")]
    DimensionMismatch { expected: usize, got: usize },
    /// Parameter vector length does not match the family.
    #[error("parameter count mismatch: family expects {expected}, got {got}")]
    ParamCountMismatch { expected: usize, got: usize },
    /// The objective became NaN or infinite during fitting.
    #[error("objective became non-finite at epoch {epoch} (divergent learning rate?)")]
    NonFiniteObjective { epoch: usize },
    /// Malformed family string or invalid structural parameters.
    #[error("invalid discriminator spec: {0}")]
    InvalidSpec(String),
}

/// Norm constraints for the affine family: `||w||_Sigma <= weight_radius`
/// and `|b| <= bias_radius`, with `||w||_Sigma = sqrt(w' Sigma w)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearConstraint {
    pub weight_radius: f64,
    pub bias_radius: f64,
    /// Row-major `d x d` covariance defining the weight norm; identity when
    /// absent.
    pub sigma: Option<Vec<f64>>,
}

/// A discriminator function family.
#[derive(Debug, Clone, PartialEq)]
pub enum Family {
    /// Polynomials of the given degree in a scalar input: `(1, x, ..., x^p)`.
    Polynomial { degree: usize },
    /// Span of the first `num_terms` Fourier basis elements
    /// `1, sin(2 pi x), cos(2 pi x), sin(4 pi x), ...` in a scalar input.
    Fourier { num_terms: usize },
    /// Affine functions `w' x + b` of a `input_dim`-dimensional input.
    Linear { input_dim: usize, constraint: Option<LinearConstraint> },
    /// Fully connected ReLU network; `layers` lists the widths from input to
    /// output, and the output width must be 1.
    Mlp { layers: Vec<usize> },
}

impl Family {
    /// Expected input dimension.
    pub fn input_dim(&self) -> usize {
        match self {
            Family::Polynomial { .. } | Family::Fourier { .. } => 1,
            Family::Linear { input_dim, .. } => *input_dim,
            Family::Mlp { layers } => layers[0],
        }
    }

    /// Length of the flat parameter vector.
    pub fn param_count(&self) -> usize {
        match self {
            Family::Polynomial { degree } => degree + 1,
            Family::Fourier { num_terms } => *num_terms,
            Family::Linear { input_dim, .. } => input_dim + 1,
            Family::Mlp { layers } => mlp::param_count(layers),
        }
    }

    /// Whether the raw output is a dot product of parameters with a feature
    /// map (everything except [`Family::Mlp`]).
    pub fn is_linear_in_params(&self) -> bool {
        !matches!(self, Family::Mlp { .. })
    }

    fn validate(&self) -> Result<(), DiscriminatorError> {
        match self {
            Family::Polynomial { .. } => Ok(()),
            Family::Fourier { num_terms } => {
                if *num_terms == 0 {
                    return Err(DiscriminatorError::InvalidSpec(
                        "fourier needs at least one term".into(),
                    ));
                }
                Ok(())
            }
            Family::Linear { input_dim, constraint } => {
                if *input_dim == 0 {
                    return Err(DiscriminatorError::InvalidSpec(
                        "linear input dimension must be positive".into(),
                    ));
                }
                if let Some(c) = constraint {
                    if !(c.weight_radius > 0.0) || !(c.bias_radius > 0.0) {
                        return Err(DiscriminatorError::InvalidSpec(
                            "constraint radii must be positive".into(),
                        ));
                    }
                    if let Some(sigma) = &c.sigma {
                        if sigma.len() != input_dim * input_dim {
                            return Err(DiscriminatorError::InvalidSpec(format!(
                                "sigma must be {input_dim}x{input_dim} row-major"
                            )));
                        }
                    }
                }
                Ok(())
            }
            Family::Mlp { layers } => {
                if layers.len() < 2 {
                    return Err(DiscriminatorError::InvalidSpec(
                        "mlp needs at least input and output widths".into(),
                    ));
                }
                if layers.iter().any(|&w| w == 0) {
                    return Err(DiscriminatorError::InvalidSpec(
                        "mlp widths must be positive".into(),
                    ));
                }
                if *layers.last().unwrap() != 1 {
                    return Err(DiscriminatorError::InvalidSpec(
                        "mlp output width must be 1".into(),
                    ));
                }
                Ok(())
            }
        }
    }
}

impl Default for Family {
    /// Degree-one polynomials, the smallest family used in practice.
    fn default() -> Self {
        Family::Polynomial { degree: 1 }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Family::Polynomial { degree } => write!(f, "poly:{degree}"),
            Family::Fourier { num_terms } => write!(f, "fourier:{num_terms}"),
            Family::Linear { input_dim, .. } => write!(f, "linear:{input_dim}"),
            Family::Mlp { layers } => {
                write!(f, "mlp:")?;
                for (i, w) in layers.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{w}")?;
                }
                Ok(())
            }
        }
    }
}

/// Full-batch Adam settings used by [`fit`].
#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerConfig {
    pub epochs: usize,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self { epochs: 50, learning_rate: 0.1, beta1: 0.9, beta2: 0.999, epsilon: 1e-8 }
    }
}

/// A function family plus truncation bound and optimizer settings.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscriminatorSpec {
    pub family: Family,
    /// Outputs are truncated to `[-clamp_bound, clamp_bound]`.
    pub clamp_bound: f64,
    pub optimizer: OptimizerConfig,
}

impl Default for DiscriminatorSpec {
    fn default() -> Self {
        Self { family: Family::default(), clamp_bound: 10.0, optimizer: OptimizerConfig::default() }
    }
}

impl DiscriminatorSpec {
    /// Spec with the default clamp bound (10) and optimizer settings.
    pub fn new(family: Family) -> Result<Self, DiscriminatorError> {
        family.validate()?;
        Ok(Self { family, clamp_bound: 10.0, optimizer: OptimizerConfig::default() })
    }

    /// Parse a family string: `poly:<degree>`, `fourier:<q>`, `linear[:dim]`,
    /// `mlp[:<w1>,<w2>,...]` (bare `mlp` means `mlp:1,2,3,1`).
    pub fn parse(s: &str) -> Result<Self, DiscriminatorError> {
        let bad = |msg: String| DiscriminatorError::InvalidSpec(msg);
        let (name, arg) = match s.split_once(':') {
            Some((n, a)) => (n, Some(a)),
            None => (s, None),
        };
        let family = match name {
            "poly" => {
                let a = arg.ok_or_else(|| bad("poly needs a degree, e.g. poly:1".into()))?;
                let degree = a.parse().map_err(|_| bad(format!("bad poly degree {a:?}")))?;
                Family::Polynomial { degree }
            }
            "fourier" => {
                let a = arg.ok_or_else(|| bad("fourier needs a term count, e.g. fourier:2".into()))?;
                let num_terms = a.parse().map_err(|_| bad(format!("bad fourier term count {a:?}")))?;
                Family::Fourier { num_terms }
            }
            "linear" => {
                let input_dim = match arg {
                    None => 1,
                    Some(a) => a.parse().map_err(|_| bad(format!("bad linear dimension {a:?}")))?,
                };
                Family::Linear { input_dim, constraint: None }
            }
            "mlp" => {
                let layers: Vec<usize> = match arg {
                    None => vec![1, 2, 3, 1],
                    Some(a) => a
                        .split(',')
                        .map(|w| w.trim().parse().map_err(|_| bad(format!("bad mlp width {w:?}"))))
                        .collect::<Result<_, _>>()?,
                };
                Family::Mlp { layers }
            }
            other => return Err(bad(format!("unknown family {other:?}"))),
        };
        Self::new(family)
    }

    /// Canonical family label (`poly:1`, `mlp:1,2,3,1`, ...).
    pub fn label(&self) -> String {
        self.family.to_string()
    }
}

/// A fitted member of a family: flat parameters plus the contrast value the
/// fit achieved.
#[derive(Debug, Clone, PartialEq)]
pub struct FittedDiscriminator {
    pub spec: DiscriminatorSpec,
    pub params: Vec<f64>,
    /// Final objective value (best seen across epochs).
    pub achieved_value: f64,
}

impl FittedDiscriminator {
    /// Truncated output at `x`.
    pub fn evaluate(&self, x: &[f64]) -> Result<f64, DiscriminatorError> {
        let raw = raw_output(&self.spec, &self.params, x)?;
        Ok(raw.clamp(-self.spec.clamp_bound, self.spec.clamp_bound))
    }
}

/// Feature map of a linear-in-parameter family at `x`.
///
/// `Polynomial(p)` gives `(1, x, ..., x^p)`, `Fourier(q)` the first `q` of
/// `(1, sin 2 pi x, cos 2 pi x, sin 4 pi x, ...)`, `Linear(d)`
/// `(x_1, ..., x_d, 1)`. The network family has no feature map.
pub fn features(family: &Family, x: &[f64]) -> Result<Vec<f64>, DiscriminatorError> {
    let mut out = vec![0.0; family.param_count()];
    features_into(family, x, &mut out)?;
    Ok(out)
}

pub(crate) fn features_into(
    family: &Family,
    x: &[f64],
    out: &mut [f64],
) -> Result<(), DiscriminatorError> {
    let expected = family.input_dim();
    if x.len() != expected {
        return Err(DiscriminatorError::DimensionMismatch { expected, got: x.len() });
    }
    match family {
        Family::Polynomial { degree } => {
            let mut pow = 1.0;
            for k in 0..=*degree {
                out[k] = pow;
                pow *= x[0];
            }
        }
        Family::Fourier { num_terms } => {
            out[0] = 1.0;
            for k in 1..*num_terms {
                let harmonic = (k + 1) / 2;
                let angle = 2.0 * PI * harmonic as f64 * x[0];
                out[k] = if k % 2 == 1 { angle.sin() } else { angle.cos() };
            }
        }
        Family::Linear { input_dim, .. } => {
            out[..*input_dim].copy_from_slice(x);
            out[*input_dim] = 1.0;
        }
        Family::Mlp { .. } => {
            return Err(DiscriminatorError::UnsupportedFamily(family.to_string()));
        }
    }
    Ok(())
}

/// Project affine parameters `(w, b)` onto the constraint set.
///
/// `w` is scaled radially (in the `Sigma`-weighted norm) onto the ball of
/// radius `weight_radius` when outside it; `b` is clipped to
/// `[-bias_radius, bias_radius]`. Interior points are untouched.
pub fn project_linear_constraints(params: &mut [f64], constraint: &LinearConstraint, input_dim: usize) {
    debug_assert_eq!(params.len(), input_dim + 1);
    let (w, b) = params.split_at_mut(input_dim);
    let norm_sq = match &constraint.sigma {
        None => w.iter().map(|v| v * v).sum::<f64>(),
        Some(sigma) => {
            let mut acc = 0.0;
            for i in 0..input_dim {
                let row = &sigma[i * input_dim..(i + 1) * input_dim];
                let si: f64 = row.iter().zip(w.iter()).map(|(a, b)| a * b).sum();
                acc += w[i] * si;
            }
            acc
        }
    };
    let norm = norm_sq.sqrt();
    if norm > constraint.weight_radius {
        let scale = constraint.weight_radius / norm;
        for v in w.iter_mut() {
            *v *= scale;
        }
    }
    b[0] = b[0].clamp(-constraint.bias_radius, constraint.bias_radius);
}

/// Iterate samples of a [`Samples`] view checking the family dimension once.
pub(crate) fn check_dim(family: &Family, samples: Samples<'_>) -> Result<(), DiscriminatorError> {
    let expected = family.input_dim();
    if samples.dim() != expected {
        return Err(DiscriminatorError::DimensionMismatch { expected, got: samples.dim() });
    }
    Ok(())
}
