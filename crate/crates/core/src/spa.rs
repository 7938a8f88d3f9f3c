//! Saddlepoint approximations of the density and distribution function, used
//! for comparison grids and tail cross-checks against the exact inversion.

use crate::error::{Error, Result};
use crate::model::QuadraticFormSpec;

/// Cumulant generating function of `X - Y` and its derivatives, finite and
/// strictly convex on `(-min theta', min theta)`.
#[derive(Debug, Clone)]
pub struct CgfContext {
    spec: QuadraticFormSpec,
    lo: f64,
    hi: f64,
}

impl CgfContext {
    pub fn new(spec: &QuadraticFormSpec) -> Self {
        let hi = spec.min_theta();
        let lo = -spec.min_theta_negative();
        Self { spec: spec.clone(), lo, hi }
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }

    /// `K(t) = sum [-(n/2) ln(1 - t/theta) + gamma2 t / (4 theta (theta - t))]`
    /// over the positive part, plus the mirrored terms of the negative part.
    pub fn k(&self, t: f64) -> f64 {
        let mut acc = 0.0;
        for term in self.spec.positive() {
            acc += -(0.5 * term.n as f64) * (1.0 - t / term.theta).ln()
                + term.gamma2 * t / (4.0 * term.theta * (term.theta - t));
        }
        for term in self.spec.negative() {
            acc += -(0.5 * term.n as f64) * (1.0 + t / term.theta).ln()
                - term.gamma2 * t / (4.0 * term.theta * (term.theta + t));
        }
        acc
    }

    pub fn k1(&self, t: f64) -> f64 {
        let mut acc = 0.0;
        for term in self.spec.positive() {
            let d = term.theta - t;
            acc += 0.5 * term.n as f64 / d + term.gamma2 / (4.0 * d * d);
        }
        for term in self.spec.negative() {
            let d = term.theta + t;
            acc -= 0.5 * term.n as f64 / d + term.gamma2 / (4.0 * d * d);
        }
        acc
    }

    pub fn k2(&self, t: f64) -> f64 {
        let mut acc = 0.0;
        for term in self.spec.positive() {
            let d = term.theta - t;
            acc += 0.5 * term.n as f64 / (d * d) + term.gamma2 / (2.0 * d * d * d);
        }
        for term in self.spec.negative() {
            let d = term.theta + t;
            acc += 0.5 * term.n as f64 / (d * d) + term.gamma2 / (2.0 * d * d * d);
        }
        acc
    }

    pub fn k3(&self, t: f64) -> f64 {
        let mut acc = 0.0;
        for term in self.spec.positive() {
            let d = term.theta - t;
            acc += term.n as f64 / (d * d * d) + 1.5 * term.gamma2 / (d * d * d * d);
        }
        for term in self.spec.negative() {
            let d = term.theta + t;
            acc -= term.n as f64 / (d * d * d) + 1.5 * term.gamma2 / (d * d * d * d);
        }
        acc
    }
}

/// Solve `K'(t) = s` by safeguarded Newton; `K'` is strictly increasing so a
/// bracket always pins the root once found.
pub fn solve_saddle(ctx: &CgfContext, s: f64) -> Result<f64> {
    let eps = 1e-9 * ctx.hi.min(ctx.lo.abs().max(ctx.hi));
    let hi = ctx.hi - eps;
    let mut lo = if ctx.lo.is_finite() { ctx.lo + eps } else { f64::NEG_INFINITY };
    if !lo.is_finite() {
        // positive combination: K' sweeps (0, inf), so walk left until below s
        if s <= 0.0 {
            return Err(Error::SaddleOutOfRange(format!(
                "argument {s} at or below the left edge of the mean range"
            )));
        }
        let mut step = 1.0;
        lo = hi.min(0.0);
        while ctx.k1(lo) > s {
            lo -= step;
            step *= 2.0;
            if !lo.is_finite() {
                return Err(Error::SaddleOutOfRange("bracket walk diverged".into()));
            }
        }
    }
    let (mut lo, mut hi) = (lo, hi);
    if ctx.k1(lo) > s || ctx.k1(hi) < s {
        return Err(Error::SaddleOutOfRange(format!(
            "argument {s} outside the attainable mean range"
        )));
    }
    let mut t = 0.5 * (lo + hi);
    for _ in 0..200 {
        let err = ctx.k1(t) - s;
        if err.abs() <= 1e-12 * (1.0 + s.abs()) {
            return Ok(t);
        }
        if err > 0.0 {
            hi = t;
        } else {
            lo = t;
        }
        let newton = t - err / ctx.k2(t);
        t = if newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
    }
    Err(Error::NoConvergence("saddle iteration stalled".into()))
}

/// First-order density approximation
/// `exp(K(t) - t s) / sqrt(2 pi K''(t))` at the saddle.
pub fn spa_pdf(ctx: &CgfContext, s: f64) -> Result<f64> {
    let t = solve_saddle(ctx, s)?;
    Ok((ctx.k(t) - t * s).exp() / (2.0 * std::f64::consts::PI * ctx.k2(t)).sqrt())
}

fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

fn normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// Tail-area approximation `Phi(w) + phi(w) (1/w - 1/u)` with
/// `w = sgn(t) sqrt(2 (t s - K(t)))`, `u = t sqrt(K''(t))`; near the mean the
/// removable singularity is replaced by its limit
/// `1/2 + K'''/(6 sqrt(2 pi) K''^{3/2})`.
pub fn spa_cdf(ctx: &CgfContext, s: f64) -> Result<f64> {
    let t = solve_saddle(ctx, s)?;
    let w2 = 2.0 * (t * s - ctx.k(t));
    let w = w2.max(0.0).sqrt().copysign(t);
    let u = t * ctx.k2(t).sqrt();
    if w.abs() < 1e-5 {
        return Ok(0.5 + ctx.k3(t) / (6.0 * (2.0 * std::f64::consts::PI).sqrt() * ctx.k2(t).powf(1.5)));
    }
    Ok(normal_cdf(w) + normal_pdf(w) * (1.0 / w - 1.0 / u))
}

/// Distribution function through the density approximation of the augmented
/// combination: apply [`spa_pdf`] to the same spec the exact route uses for
/// the distribution function and multiply by the same prefactor.
pub fn spa_cdf_via_pdf(spec: &QuadraticFormSpec, x: f64, theta0: Option<f64>) -> Result<f64> {
    if x <= 0.0 && spec.is_positive_combination() {
        return Ok(0.0);
    }
    if spec.is_positive_combination() {
        let theta0 = theta0.unwrap_or(1.0 / x);
        let (aug, pref) = crate::inversion::cdf_augmented_spec(spec, x, theta0)?;
        let ctx = CgfContext::new(&aug);
        return Ok(pref * spa_pdf(&ctx, x)?);
    }
    // difference: same augmentation as the exact distribution identity
    if x < 0.0 {
        return Ok(1.0 - spa_cdf_via_pdf(&spec.swapped()?, -x, theta0)?);
    }
    let max0 = spec.min_theta_negative();
    let theta0 = theta0.unwrap_or_else(|| (0.5 * max0).min(1.0 / x.max(1.0)));
    if !(theta0 > 0.0) || !(theta0 < max0) {
        return Err(Error::Theta0OutOfRange(theta0));
    }
    let (aug, pref) = crate::difference::cdf_augmented(spec, x, theta0)?;
    let ctx = CgfContext::new(&aug);
    Ok(pref * spa_pdf(&ctx, x)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn exp1() -> QuadraticFormSpec {
        QuadraticFormSpec::from_triples(&[(1.0, 2, 0.0)], &[]).unwrap()
    }

    #[test]
    fn saddle_closed_form_for_exponential() {
        // K'(t) = 1/(1-t): saddle at 1 - 1/s
        let ctx = CgfContext::new(&exp1());
        let t = solve_saddle(&ctx, 2.0).unwrap();
        assert!((t - 0.5).abs() < 1e-12);
        let t0 = solve_saddle(&ctx, 1.0).unwrap();
        assert!(t0.abs() < 1e-12);
        assert!(matches!(
            solve_saddle(&ctx, 0.0),
            Err(Error::SaddleOutOfRange(_))
        ));
    }

    #[test]
    fn exponential_density_ratio_is_constant() {
        // unnormalized approximation overshoots the exponential by exactly
        // e/sqrt(2 pi) at every argument
        let ctx = CgfContext::new(&exp1());
        let ratio = std::f64::consts::E / (2.0 * std::f64::consts::PI).sqrt();
        for s in [0.2, 1.0, 3.0, 8.0] {
            let approx = spa_pdf(&ctx, s).unwrap();
            let exact = (-s).exp();
            assert!(
                ((approx / exact) - ratio).abs() < 1e-10 * ratio,
                "s={s}: ratio {}",
                approx / exact
            );
        }
    }

    #[test]
    fn renormalized_density_is_exact_for_exponential() {
        let ctx = CgfContext::new(&exp1());
        let mass = crate::quad::integrate_semi_infinite(
            |s| if s > 1e-12 { spa_pdf(&ctx, s).unwrap() } else { 0.0 },
            0.0,
            1e-11,
        )
        .unwrap()
        .value;
        for s in [0.5, 1.0, 2.0] {
            let renorm = spa_pdf(&ctx, s).unwrap() / mass;
            let exact = (-s).exp();
            assert!((renorm - exact).abs() < 1e-10 * exact, "s={s}: {renorm}");
        }
    }

    #[test]
    fn tail_area_accuracy_for_exponential() {
        let spec = exp1();
        let ctx = CgfContext::new(&spec);
        let exact = 1.0 - (-1.0_f64).exp();
        let lr = spa_cdf(&ctx, 1.0).unwrap();
        assert!((lr - exact).abs() < 0.02, "lr {lr}");
        let via = spa_cdf_via_pdf(&spec, 1.0, None).unwrap();
        assert!((via - exact).abs() < 0.025, "via {via}");
        // and in the right tail the relative error stays small
        let s = 5.0;
        let lr_tail = 1.0 - spa_cdf(&ctx, s).unwrap();
        let exact_tail = (-s as f64).exp();
        assert!((lr_tail / exact_tail - 1.0).abs() < 0.02, "{lr_tail} vs {exact_tail}");
    }

    #[test]
    fn mean_limit_is_continuous() {
        let spec = QuadraticFormSpec::from_triples(&[(0.8, 2, 0.5), (2.0, 1, 0.0)], &[]).unwrap();
        let ctx = CgfContext::new(&spec);
        let mean = spec.mean();
        let at_mean = spa_cdf(&ctx, mean).unwrap();
        for d in [-1e-6, 1e-6] {
            let near = spa_cdf(&ctx, mean + d).unwrap();
            assert!((near - at_mean).abs() < 1e-4, "{near} vs {at_mean}");
        }
    }

    #[test]
    fn convexity_on_a_grid() {
        let spec = QuadraticFormSpec::from_triples(&[(1.0, 1, 0.6)], &[(2.0, 2, 0.3)]).unwrap();
        let ctx = CgfContext::new(&spec);
        let (lo, hi) = ctx.domain();
        for k in 1..1000 {
            let t = lo + (hi - lo) * k as f64 / 1000.0;
            assert!(ctx.k2(t) > 0.0, "K'' must stay positive, failed at {t}");
        }
    }

    #[test]
    fn cdf_monotone_on_grid() {
        let spec = QuadraticFormSpec::from_triples(&[(0.9, 2, 1.0), (2.1, 1, 0.0)], &[]).unwrap();
        let ctx = CgfContext::new(&spec);
        let mut prev = -1.0;
        for k in 1..=40 {
            let v = spa_cdf(&ctx, 0.2 * k as f64).unwrap();
            assert!(v >= prev - 1e-12);
            prev = v;
        }
    }

    #[test]
    fn difference_cdf_via_density_route() {
        // first-order tail areas are weak near the centre of two-sided
        // near-Laplace densities; probe the tail, where they earn their keep
        let spec = QuadraticFormSpec::from_triples(&[(1.0, 2, 0.0)], &[(2.0, 2, 0.0)]).unwrap();
        let exact_tail = crate::difference::survivor_diff(&spec, 3.0).unwrap().value;
        let got_tail = 1.0 - spa_cdf_via_pdf(&spec, 3.0, None).unwrap();
        assert!(
            (got_tail / exact_tail - 1.0).abs() < 0.05,
            "{got_tail} vs {exact_tail}"
        );
    }
}
