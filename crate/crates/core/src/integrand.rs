//! The multivalued inversion integrand
//! `g(t) = exp(sum gamma2_i / (4 (theta_i + t))) / prod (theta_i + t)^{n_i/2}`
//! with per-factor principal branches, and the product form `g(t) g'(-t)`
//! used for differences.
//!
//! Each factor `(theta_i + t)^{n_i/2}` is taken on the principal branch
//! `arg in (-pi, pi]`, factors multiplied in ascending-theta order. The sign
//! of zero matters on the cuts: `Complex64::new(x, 0.0)` with `x < 0` lands
//! on the upper side, `new(x, -0.0)` on the lower side.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::{ChiSquareTerm, QuadraticFormSpec};

/// Largest real exponent the essential-singularity factor may reach before
/// evaluation is refused; contour plans must keep enough distance from
/// non-central poles to stay below it.
pub const EXP_CLAMP: f64 = 700.0;

/// Positive-part integrand context: the term list and the constant
/// `kappa = prod theta_i^{n_i/2} * exp(-sum gamma2_i/(4 theta_i))`.
#[derive(Debug, Clone)]
pub struct IntegrandContext {
    terms: Vec<ChiSquareTerm>,
    kappa: f64,
}

pub(crate) fn kappa_of(terms: &[ChiSquareTerm]) -> f64 {
    let mut log_kappa = 0.0;
    for t in terms {
        log_kappa += 0.5 * t.n as f64 * t.theta.ln() - t.gamma2 / (4.0 * t.theta);
    }
    log_kappa.exp()
}

/// One principal-branch factor `(theta + t)^(-n/2)`.
#[inline]
fn inv_power_factor(z: Complex64, n: u32) -> Complex64 {
    match n {
        1 => z.sqrt().inv(),
        2 => z.inv(),
        _ => z.powf(-0.5 * n as f64),
    }
}

impl IntegrandContext {
    /// Context over the positive part of `spec`.
    pub fn new(spec: &QuadraticFormSpec) -> Self {
        Self::from_terms(spec.positive().to_vec())
    }

    pub(crate) fn from_terms(terms: Vec<ChiSquareTerm>) -> Self {
        let kappa = kappa_of(&terms);
        Self { terms, kappa }
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn terms(&self) -> &[ChiSquareTerm] {
        &self.terms
    }

    /// Evaluate `g(t)`, refusing points unusably close to a pole or inside
    /// the overflow region of an essential singularity.
    pub fn g(&self, t: Complex64) -> Result<Complex64> {
        let mut exponent = Complex64::new(0.0, 0.0);
        let mut product = Complex64::new(1.0, 0.0);
        for term in &self.terms {
            let z = t + term.theta;
            if z.norm_sqr() < 1e-300 {
                return Err(Error::PoleEvaluation);
            }
            product *= inv_power_factor(z, term.n);
            if term.gamma2 != 0.0 {
                exponent += z.inv() * (term.gamma2 / 4.0);
            }
        }
        if exponent.re > EXP_CLAMP {
            return Err(Error::PoleEvaluation);
        }
        Ok(product * exponent.exp())
    }

    /// Like [`Self::g`] but without pole checks; poles surface as `inf`/`nan`
    /// and are caught by the quadrature layer.
    pub(crate) fn g_unchecked(&self, t: Complex64) -> Complex64 {
        self.g_excluding(t, &[])
    }

    /// `g(t)` with the listed term indices divided out entirely (both the
    /// power factor and any exponential part).
    pub(crate) fn g_excluding(&self, t: Complex64, skip: &[usize]) -> Complex64 {
        let mut exponent = Complex64::new(0.0, 0.0);
        let mut product = Complex64::new(1.0, 0.0);
        for (i, term) in self.terms.iter().enumerate() {
            if skip.contains(&i) {
                continue;
            }
            let z = t + term.theta;
            product *= inv_power_factor(z, term.n);
            if term.gamma2 != 0.0 {
                exponent += z.inv() * (term.gamma2 / 4.0);
            }
        }
        product * exponent.exp()
    }

    /// Scaled logarithmic derivative `d^order/dt^order ln g(t) / (order-1)!`
    /// with the listed terms excluded, for the residue recursion; the scaling
    /// keeps high orders inside the exponent range of doubles. `order >= 1`.
    ///
    /// From `d^r ln(theta+t) = (-1)^(r-1) (r-1)! (theta+t)^(-r)` and
    /// `d^r (theta+t)^(-1) = (-1)^r r! (theta+t)^(-r-1)`.
    pub(crate) fn log_deriv_scaled_excluding(
        &self,
        t: Complex64,
        order: u32,
        skip: &[usize],
    ) -> Complex64 {
        debug_assert!(order >= 1);
        let r = order as i32;
        let mut acc = Complex64::new(0.0, 0.0);
        let sign_ln = if r % 2 == 1 { 1.0 } else { -1.0 };
        for (i, term) in self.terms.iter().enumerate() {
            if skip.contains(&i) {
                continue;
            }
            let z = t + term.theta;
            acc += z.powi(-r) * (-0.5 * term.n as f64 * sign_ln);
            if term.gamma2 != 0.0 {
                acc += z.powi(-r - 1) * (term.gamma2 / 4.0 * (-sign_ln) * r as f64);
            }
        }
        acc
    }
}

/// Product integrand `g(t) * g'(-t)` of a difference spec: `ctx_x` holds the
/// positive part, `ctx_y` the negated part whose poles sit at `+theta'`.
pub fn g_diff(ctx_x: &IntegrandContext, ctx_y: &IntegrandContext, t: Complex64) -> Result<Complex64> {
    Ok(ctx_x.g(t)? * ctx_y.g(-t)?)
}
