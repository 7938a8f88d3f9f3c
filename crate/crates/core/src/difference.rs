//! Densities and distribution functions of `Z = X - Y` for two positive
//! combinations.
//!
//! The two-sided transform is
//! `f_Z(z) = kappa kappa' (1/2 pi i) int g(t) g'(-t) e^{zt} dt` over a
//! vertical line inside the strip `-min(theta) < Re t < min(theta')`, so for
//! `z >= 0` the contour closes onto the branch cuts of `g` alone and
//! `g'(-t)` rides along as an analytic multiplier; `z < 0` swaps the roles
//! of `X` and `Y`. The distribution function augments `Z` exactly as in the
//! one-sided case, with every negative-part theta shifted by `-theta0`,
//! `0 < theta0 < min(theta')`.

use crate::contour::{integrate_contour, NegatedPart};
use crate::error::{Error, Result};
use crate::integrand::IntegrandContext;
use crate::inversion::{pdf_with, EvalOptions, EvalResult, Route};
use crate::model::{ChiSquareTerm, QuadraticFormSpec};

/// Density of `X - Y` at `z`. Falls back to the one-sided density when the
/// negative list is empty.
pub fn pdf_diff(spec: &QuadraticFormSpec, z: f64) -> Result<EvalResult> {
    pdf_diff_with(spec, z, &EvalOptions::default())
}

pub fn pdf_diff_with(spec: &QuadraticFormSpec, z: f64, opts: &EvalOptions) -> Result<EvalResult> {
    if spec.is_positive_combination() {
        return pdf_with(spec, z, opts);
    }
    if z < 0.0 {
        return pdf_diff_with(&spec.swapped()?, -z, opts);
    }
    let ctx_x = IntegrandContext::new(spec);
    let ctx_y = IntegrandContext::from_terms(spec.negative().to_vec());
    let layout = spec.branch_layout();
    let mult = NegatedPart(&ctx_y);
    let out = integrate_contour(&ctx_x, &layout, &mult, z, opts.rel_tol)?;
    let scale = ctx_x.kappa() * ctx_y.kappa();
    Ok(EvalResult {
        value: scale * out.value,
        abs_err: scale * out.abs_err,
        route: if out.closed_form_only { Route::ClosedForm } else { Route::GeneralContour },
        n_evals: out.n_evals,
        contour: out.description,
    })
}

/// The augmented difference whose density encodes `P(Z <= z)` for `z >= 0`,
/// and the matching prefactor.
pub(crate) fn cdf_augmented(
    spec: &QuadraticFormSpec,
    z: f64,
    theta0: f64,
) -> Result<(QuadraticFormSpec, f64)> {
    let mut pos: Vec<ChiSquareTerm> = Vec::with_capacity(spec.positive().len() + 1);
    pos.push(ChiSquareTerm::new(theta0, 2, 0.0)?);
    let mut log_pref = z * theta0 - theta0.ln();
    for t in spec.positive() {
        pos.push(ChiSquareTerm::new(t.theta + theta0, t.n, t.gamma2)?);
        log_pref += 0.5 * t.n as f64 * (t.theta / (t.theta + theta0)).ln();
        log_pref += t.gamma2 / (4.0 * (t.theta + theta0)) - t.gamma2 / (4.0 * t.theta);
    }
    let mut neg = Vec::with_capacity(spec.negative().len());
    for t in spec.negative() {
        neg.push(ChiSquareTerm::new(t.theta - theta0, t.n, t.gamma2)?);
        log_pref += 0.5 * t.n as f64 * (t.theta / (t.theta - theta0)).ln();
        log_pref += t.gamma2 / (4.0 * (t.theta - theta0)) - t.gamma2 / (4.0 * t.theta);
    }
    Ok((QuadraticFormSpec::new(pos, neg)?, log_pref.exp()))
}

/// `P(X - Y <= z)`. `theta0` must lie in `(0, min theta')`; the default picks
/// the midpoint capped by the evaluation scale.
pub fn cdf_diff(spec: &QuadraticFormSpec, z: f64, theta0: Option<f64>) -> Result<EvalResult> {
    cdf_diff_with(spec, z, theta0, &EvalOptions::default())
}

pub fn cdf_diff_with(
    spec: &QuadraticFormSpec,
    z: f64,
    theta0: Option<f64>,
    opts: &EvalOptions,
) -> Result<EvalResult> {
    if spec.is_positive_combination() {
        return crate::inversion::cdf_with(spec, z, theta0, opts);
    }
    if z < 0.0 {
        // P(Z <= z) = 1 - P(Y - X <= -z) for a continuous Z
        let mut r = cdf_diff_with(&spec.swapped()?, -z, theta0, opts)?;
        r.value = 1.0 - r.value;
        return Ok(r);
    }
    let max0 = spec.min_theta_negative();
    let theta0 = theta0.unwrap_or_else(|| (0.5 * max0).min(1.0 / z.max(1.0)));
    if !(theta0 > 0.0) || !(theta0 < max0) {
        return Err(Error::Theta0OutOfRange(theta0));
    }
    let (aug, pref) = cdf_augmented(spec, z, theta0)?;
    let mut r = pdf_diff_with(&aug, z, opts)?;
    r.value *= pref;
    r.abs_err *= pref;
    Ok(r)
}

/// `P(X - Y > z) = 1 - cdf`.
pub fn survivor_diff(spec: &QuadraticFormSpec, z: f64) -> Result<EvalResult> {
    let mut r = cdf_diff(spec, z, None)?;
    r.value = 1.0 - r.value;
    Ok(r)
}

/// Closed form for all multiplicities equal to two and everything central:
/// `Z` is a difference of independent exponential sums with rates `theta`
/// and `theta'`, and for `z >= 0` the residues at the simple poles give
///
/// `f_Z(z) = prod theta prod theta' * sum_i e^{-theta_i z}
///           / (prod_{j != i} (theta_j - theta_i) prod_k (theta'_k + theta_i))`.
///
/// The cross products couple through `theta'_k + theta_i`, which never
/// vanishes for positive rates; duplicates within a list are rejected.
pub fn hypoexp_diff_closed_form(thetas: &[f64], thetas_prime: &[f64], z: f64) -> Result<f64> {
    if z < 0.0 {
        return hypoexp_diff_closed_form(thetas_prime, thetas, -z);
    }
    if thetas.is_empty() {
        return Err(Error::EmptyPositiveList);
    }
    for list in [thetas, thetas_prime] {
        for (i, &a) in list.iter().enumerate() {
            if !(a > 0.0) {
                return Err(Error::NonPositiveTheta(a));
            }
            for &b in &list[i + 1..] {
                if (a - b).abs() <= 1e-12 * a.abs().max(b.abs()) {
                    return Err(Error::DuplicateRates(format!("{a} repeated within a list")));
                }
            }
        }
    }
    let scale: f64 = thetas.iter().chain(thetas_prime).product();
    let mut sum = 0.0;
    for (i, &ti) in thetas.iter().enumerate() {
        let mut denom = 1.0;
        for (j, &tj) in thetas.iter().enumerate() {
            if j != i {
                denom *= tj - ti;
            }
        }
        for &tk in thetas_prime {
            denom *= tk + ti;
        }
        sum += (-ti * z).exp() / denom;
    }
    Ok(scale * sum)
}
