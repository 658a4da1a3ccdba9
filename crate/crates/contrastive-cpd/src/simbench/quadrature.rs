//! Adaptive Simpson integration for the divergence oracles.
//!
//! The integrands here (Gaussian and uniform mixtures and their log ratios)
//! are smooth away from uniform-support endpoints, so the integrator takes
//! explicit breakpoints and runs Simpson's rule with local Richardson error
//! control on each panel.

/// The requested tolerance could not be met.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("quadrature failed on [{lo}, {hi}]: recursion depth exhausted (estimate {estimate})")]
pub struct QuadratureFailure {
    pub lo: f64,
    pub hi: f64,
    pub estimate: f64,
}

const MAX_DEPTH: u32 = 48;

/// Subdivisions forced before the error test may accept. With only five
/// initial sample points, an integrand with cancelling lobes can look
/// converged when every sample happens to sit near a zero crossing; a few
/// mandatory splits rule that out.
const MIN_SPLITS: u32 = 6;

/// Integrate `f` over `[lo, hi]` to absolute tolerance `tol`.
///
/// `breakpoints` lists points where `f` or its derivatives jump; points
/// outside the interval are ignored. The tolerance is split evenly over the
/// resulting panels. A jump at a panel edge can defeat Richardson control no
/// matter how deep the recursion goes, so once depth is exhausted a sliver is
/// accepted anyway when its crudest bound, width times the largest sampled
/// `|f|`, is already below the panel tolerance.
pub fn integrate<F: Fn(f64) -> f64>(
    f: F,
    lo: f64,
    hi: f64,
    breakpoints: &[f64],
    tol: f64,
) -> Result<f64, QuadratureFailure> {
    assert!(lo.is_finite() && hi.is_finite() && hi > lo, "need a finite, ordered interval");
    assert!(tol > 0.0, "tolerance must be positive");
    let mut edges: Vec<f64> = std::iter::once(lo)
        .chain(breakpoints.iter().copied().filter(|x| *x > lo && *x < hi))
        .chain(std::iter::once(hi))
        .collect();
    edges.sort_by(|a, b| a.partial_cmp(b).expect("finite edges"));
    edges.dedup();
    let panels = edges.len() - 1;
    let panel_tol = tol / panels as f64;
    let mut total = 0.0;
    for pair in edges.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        let m = 0.5 * (a + b);
        let (fa, fm, fb) = (f(a), f(m), f(b));
        let whole = simpson(a, b, fa, fm, fb);
        total += adapt(&f, a, b, fa, fm, fb, whole, panel_tol, panel_tol, MAX_DEPTH)?;
    }
    Ok(total)
}

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn adapt<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    sliver_tol: f64,
    depth: u32,
) -> Result<f64, QuadratureFailure> {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let (flm, frm) = (f(lm), f(rm));
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let delta = left + right - whole;
    if depth <= MAX_DEPTH - MIN_SPLITS && delta.abs() <= 15.0 * tol {
        return Ok(left + right + delta / 15.0);
    }
    if depth == 0 {
        let bound =
            (b - a) * fa.abs().max(flm.abs()).max(fm.abs()).max(frm.abs()).max(fb.abs());
        if bound <= sliver_tol {
            return Ok(left + right + delta / 15.0);
        }
        return Err(QuadratureFailure { lo: a, hi: b, estimate: left + right });
    }
    Ok(adapt(f, a, m, fa, flm, fm, left, 0.5 * tol, sliver_tol, depth - 1)?
        + adapt(f, m, b, fm, frm, fb, right, 0.5 * tol, sliver_tol, depth - 1)?)
}
