//! Density, distribution and survivor functions of positive combinations.
//!
//! Three routes, in dispatch order:
//!
//! 1. closed form: every multiplicity even and central, so the integrand is
//!    rational and the density is a finite residue sum;
//! 2. central simple: all central, odd multiplicities equal to one, even
//!    multiplicities equal to two and off every cut. Cuts become real
//!    elementary integrals, the order-one poles become closed-form terms;
//! 3. general contour: everything else, via the complex-plane pieces.
//!
//! The distribution function is the density of an augmented combination: a
//! `chi2_2(0)/(2 theta0)` term is adjoined and every theta shifts by
//! `theta0`, which moves the extra `1/t` pole of the tail transform into the
//! pole set. The result is independent of `theta0`; callers can pass one
//! explicitly to exercise exactly that.

use std::f64::consts::PI;

use crate::contour::{integrate_contour, Unit};
use crate::error::{Error, Result};
use crate::integrand::IntegrandContext;
use crate::model::{ChiSquareTerm, QuadraticFormSpec};
use crate::quad::{integrate_finite, integrate_semi_infinite, DEFAULT_REL_TOL};

/// Which evaluation path produced a result.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Route {
    CentralSimple,
    GeneralContour,
    ClosedForm,
}

/// Scalar result with an error estimate and evaluation diagnostics.
#[derive(Debug, Clone)]
pub struct EvalResult {
    pub value: f64,
    /// Error estimate, not a bound.
    pub abs_err: f64,
    pub route: Route,
    pub n_evals: usize,
    /// Short description of the contour pieces used.
    pub contour: String,
}

impl EvalResult {
    fn exact(value: f64, route: Route) -> Self {
        Self { value, abs_err: 0.0, route, n_evals: 0, contour: String::new() }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct EvalOptions {
    /// Relative tolerance per contour piece.
    pub rel_tol: f64,
}

impl Default for EvalOptions {
    fn default() -> Self {
        Self { rel_tol: DEFAULT_REL_TOL }
    }
}

/// Density of a positive combination at `s`. Zero for `s <= 0`.
pub fn pdf(spec: &QuadraticFormSpec, s: f64) -> Result<EvalResult> {
    pdf_with(spec, s, &EvalOptions::default())
}

pub fn pdf_with(spec: &QuadraticFormSpec, s: f64, opts: &EvalOptions) -> Result<EvalResult> {
    if !spec.is_positive_combination() {
        return Err(Error::NotAPositiveCombination);
    }
    if s <= 0.0 {
        return Ok(EvalResult::exact(0.0, Route::ClosedForm));
    }
    if ElementaryTerms::try_new(spec).is_some() && !all_even_central(spec) {
        return pdf_central_simple_with(spec, s, opts);
    }
    pdf_general_contour_with(spec, s, opts)
}

fn all_even_central(spec: &QuadraticFormSpec) -> bool {
    spec.is_central() && spec.positive().iter().all(|t| t.n % 2 == 0)
}

/// Central route with unit odd multiplicities: alternating elementary
/// integrals over the cuts plus closed-form terms for the order-one poles.
pub fn pdf_central_simple(spec: &QuadraticFormSpec, s: f64) -> Result<EvalResult> {
    pdf_central_simple_with(spec, s, &EvalOptions::default())
}

pub fn pdf_central_simple_with(
    spec: &QuadraticFormSpec,
    s: f64,
    opts: &EvalOptions,
) -> Result<EvalResult> {
    if !spec.is_positive_combination() {
        return Err(Error::NotAPositiveCombination);
    }
    let terms = ElementaryTerms::try_new(spec).ok_or_else(|| {
        Error::RouteUnavailable(
            "central route needs a central spec with unit odd multiplicities and \
             off-cut order-one poles"
                .into(),
        )
    })?;
    if s <= 0.0 {
        return Ok(EvalResult::exact(0.0, Route::ClosedForm));
    }
    let kappa = IntegrandContext::new(spec).kappa();
    let (value, err, n_evals) = terms.eval(s, opts.rel_tol)?;
    Ok(EvalResult {
        value: kappa * value,
        abs_err: kappa * err,
        route: Route::CentralSimple,
        n_evals,
        contour: terms.describe(),
    })
}

/// Complex-plane route: valid for any positive combination.
pub fn pdf_general_contour(spec: &QuadraticFormSpec, s: f64) -> Result<EvalResult> {
    pdf_general_contour_with(spec, s, &EvalOptions::default())
}

pub fn pdf_general_contour_with(
    spec: &QuadraticFormSpec,
    s: f64,
    opts: &EvalOptions,
) -> Result<EvalResult> {
    if !spec.is_positive_combination() {
        return Err(Error::NotAPositiveCombination);
    }
    if s <= 0.0 {
        return Ok(EvalResult::exact(0.0, Route::ClosedForm));
    }
    let ctx = IntegrandContext::new(spec);
    let layout = spec.branch_layout();
    let out = integrate_contour(&ctx, &layout, &Unit, s, opts.rel_tol)?;
    let kappa = ctx.kappa();
    Ok(EvalResult {
        value: kappa * out.value,
        abs_err: kappa * out.abs_err,
        route: if out.closed_form_only { Route::ClosedForm } else { Route::GeneralContour },
        n_evals: out.n_evals,
        contour: out.description,
    })
}

/// The augmented combination whose density encodes `P(X <= x)`, together
/// with the multiplicative prefactor.
pub(crate) fn cdf_augmented_spec(
    spec: &QuadraticFormSpec,
    x: f64,
    theta0: f64,
) -> Result<(QuadraticFormSpec, f64)> {
    let mut pos: Vec<ChiSquareTerm> = Vec::with_capacity(spec.positive().len() + 1);
    pos.push(ChiSquareTerm::new(theta0, 2, 0.0)?);
    let mut log_pref = x * theta0 - theta0.ln();
    for t in spec.positive() {
        pos.push(ChiSquareTerm::new(t.theta + theta0, t.n, t.gamma2)?);
        log_pref += 0.5 * t.n as f64 * (t.theta / (t.theta + theta0)).ln();
        log_pref -= t.gamma2 * theta0 / (4.0 * t.theta * (t.theta + theta0));
    }
    Ok((QuadraticFormSpec::positive_only(pos)?, log_pref.exp()))
}

/// `P(X <= x)`. With `theta0 = None` a scale-adapted default `1/x` is used.
pub fn cdf(spec: &QuadraticFormSpec, x: f64, theta0: Option<f64>) -> Result<EvalResult> {
    cdf_with(spec, x, theta0, &EvalOptions::default())
}

pub fn cdf_with(
    spec: &QuadraticFormSpec,
    x: f64,
    theta0: Option<f64>,
    opts: &EvalOptions,
) -> Result<EvalResult> {
    if !spec.is_positive_combination() {
        return Err(Error::NotAPositiveCombination);
    }
    if x <= 0.0 {
        return Ok(EvalResult::exact(0.0, Route::ClosedForm));
    }
    let theta0 = theta0.unwrap_or(1.0 / x);
    if !(theta0 > 0.0) || !theta0.is_finite() {
        return Err(Error::Theta0OutOfRange(theta0));
    }
    let (aug, pref) = cdf_augmented_spec(spec, x, theta0)?;
    let mut r = pdf_with(&aug, x, opts)?;
    r.value *= pref;
    r.abs_err *= pref;
    Ok(r)
}

/// `P(X > x) = 1 - cdf`.
pub fn survivor(spec: &QuadraticFormSpec, x: f64) -> Result<EvalResult> {
    let mut r = cdf(spec, x, None)?;
    r.value = 1.0 - r.value;
    Ok(r)
}

/// Normalizing constant of the `exp(sum -theta_i x_i^2 + gamma_i x_i)`
/// density on the unit sphere of dimension `sum n_i - 1`, from the density of
/// the matching combination at 1:
/// `C = 2 pi^{N/2} exp(sum gamma_i^2/(4 theta_i)) / prod theta_i^{n_i/2} * pdf(1)`.
///
/// All thetas must be positive here; callers shift first when they are not.
pub fn fb_norm_from_pdf(theta: &[f64], gamma: &[f64], n: &[u32]) -> Result<f64> {
    if theta.len() != gamma.len() || theta.len() != n.len() {
        return Err(Error::InvalidSpec(
            "theta, gamma and n must have equal lengths".into(),
        ));
    }
    let terms: Vec<ChiSquareTerm> = theta
        .iter()
        .zip(gamma)
        .zip(n)
        .map(|((&t, &g), &k)| ChiSquareTerm::new(t, k, g * g))
        .collect::<Result<_>>()?;
    let total_n: u32 = n.iter().sum();
    let spec = QuadraticFormSpec::positive_only(terms)?;
    let kappa = IntegrandContext::new(&spec).kappa();
    // the exponential and power prefactors are exactly 1/kappa
    let density = pdf(&spec, 1.0)?;
    Ok(2.0 * PI.powf(0.5 * total_n as f64) * density.value / kappa)
}

/// Evaluator for the spec with one multiplicity raised by two.
///
/// For central specs on the elementary route the raise is an analytic
/// derivative of the elementary integrands with respect to the term's theta;
/// otherwise the raised-degree spec is evaluated directly (raising a
/// non-central term is the derivative in `gamma2/4`, which exactly inserts
/// the extra `1/(theta + t)` factor).
pub struct LiftedPdf {
    inner: LiftInner,
}

enum LiftInner {
    Elementary {
        terms: ElementaryTerms,
        kappa: f64,
        theta_j: f64,
        n_j: u32,
        j: usize,
    },
    General {
        lifted: QuadraticFormSpec,
    },
}

pub fn multiplicity_lift(spec: &QuadraticFormSpec, term_index: usize) -> Result<LiftedPdf> {
    if !spec.is_positive_combination() {
        return Err(Error::NotAPositiveCombination);
    }
    let Some(term) = spec.positive().get(term_index) else {
        return Err(Error::InvalidSpec(format!(
            "term index {term_index} out of range for {} terms",
            spec.positive().len()
        )));
    };
    if term.is_central() {
        if let Some(terms) = ElementaryTerms::try_new(spec) {
            return Ok(LiftedPdf {
                inner: LiftInner::Elementary {
                    terms,
                    kappa: IntegrandContext::new(spec).kappa(),
                    theta_j: term.theta,
                    n_j: term.n,
                    j: term_index,
                },
            });
        }
    }
    let mut pos = spec.positive().to_vec();
    pos[term_index].n += 2;
    Ok(LiftedPdf { inner: LiftInner::General { lifted: QuadraticFormSpec::positive_only(pos)? } })
}

impl LiftedPdf {
    pub fn pdf(&self, s: f64) -> Result<EvalResult> {
        self.pdf_with(s, &EvalOptions::default())
    }

    pub fn pdf_with(&self, s: f64, opts: &EvalOptions) -> Result<EvalResult> {
        match &self.inner {
            LiftInner::Elementary { terms, kappa, theta_j, n_j, j } => {
                if s <= 0.0 {
                    return Ok(EvalResult::exact(0.0, Route::ClosedForm));
                }
                let (d, err, n_evals) = terms.deriv(*j, s, opts.rel_tol)?;
                let factor = kappa * theta_j * (-2.0 / *n_j as f64);
                Ok(EvalResult {
                    value: factor * d,
                    abs_err: factor.abs() * err,
                    route: Route::CentralSimple,
                    n_evals,
                    contour: format!("d/dtheta of {}", terms.describe()),
                })
            }
            LiftInner::General { lifted } => pdf_with(lifted, s, opts),
        }
    }

    /// The spec with the raised multiplicity.
    pub fn lifted_spec(&self) -> Option<&QuadraticFormSpec> {
        match &self.inner {
            LiftInner::General { lifted } => Some(lifted),
            LiftInner::Elementary { .. } => None,
        }
    }
}

/// Real-arithmetic elementary representation of a central spec: alternating
/// cuts, order-one pole terms and at most one unbounded tail, with analytic
/// theta-derivatives of every item.
pub(crate) struct ElementaryTerms {
    thetas: Vec<f64>,
    ns: Vec<u32>,
    items: Vec<ElItem>,
}

#[derive(Debug, Clone, Copy)]
enum ElItem {
    /// Finite cut `[theta_ia, theta_ib]`, endpoints of multiplicity one.
    Cut { ia: usize, ib: usize, sign: f64 },
    /// Degenerate cut: order-one pole at `theta_j` (multiplicity two).
    Pole { j: usize, sign: f64 },
    /// Unbounded cut `[theta_il, inf)`.
    Tail { il: usize, sign: f64 },
}

impl ElementaryTerms {
    /// `None` when the spec is outside this route's reach.
    pub(crate) fn try_new(spec: &QuadraticFormSpec) -> Option<Self> {
        if !spec.is_positive_combination() || !spec.is_central() {
            return None;
        }
        let terms = spec.positive();
        if terms.iter().any(|t| t.n != 1 && t.n != 2) {
            return None;
        }
        let layout = spec.branch_layout();
        // an order-one pole inside a cut merges two cuts and has no
        // closed-form term; the complex route handles it
        if layout.finite_cuts.iter().any(|c| !c.interior_poles.is_empty()) {
            return None;
        }
        if layout.unbounded_cut.as_ref().is_some_and(|u| !u.interior_poles.is_empty()) {
            return None;
        }

        let thetas: Vec<f64> = terms.iter().map(|t| t.theta).collect();
        let ns: Vec<u32> = terms.iter().map(|t| t.n).collect();
        let sign_below = |x: f64| -> f64 {
            let total: u32 = terms
                .iter()
                .filter(|t| t.theta < x)
                .map(|t| t.n)
                .sum();
            debug_assert!(total % 2 == 0);
            if (total / 2) % 2 == 0 {
                1.0
            } else {
                -1.0
            }
        };

        let mut items = Vec::new();
        for c in &layout.finite_cuts {
            items.push(ElItem::Cut {
                ia: c.left_index,
                ib: c.right_index,
                sign: sign_below(c.left),
            });
        }
        for p in &layout.isolated_even_poles {
            items.push(ElItem::Pole { j: p.term_index, sign: sign_below(p.location) });
        }
        if let Some(u) = &layout.unbounded_cut {
            items.push(ElItem::Tail { il: u.start_index, sign: sign_below(u.start) });
        }
        Some(Self { thetas, ns, items })
    }

    fn describe(&self) -> String {
        let cuts = self.items.iter().filter(|i| matches!(i, ElItem::Cut { .. })).count();
        let poles = self.items.iter().filter(|i| matches!(i, ElItem::Pole { .. })).count();
        let tail = self.items.iter().any(|i| matches!(i, ElItem::Tail { .. }));
        let mut d = format!("{cuts} elementary cut(s), {poles} pole term(s)");
        if tail {
            d.push_str(", tail");
        }
        d
    }

    /// Remaining product under the square root at point `tau`, as
    /// `prod_{i not in skip} |theta_i - tau|^{n_i}`, sign discarded.
    fn root_product(&self, tau: f64, skip: [usize; 2]) -> f64 {
        let mut p = 1.0;
        for (i, (&th, &n)) in self.thetas.iter().zip(&self.ns).enumerate() {
            if i == skip[0] || i == skip[1] {
                continue;
            }
            let d = (th - tau).abs();
            p *= if n == 1 { d } else { d * d };
        }
        p
    }

    /// `sum_{i not in skip} n_i / (theta_i - tau)`, signed.
    fn endpoint_sum(&self, tau: f64, skip: [usize; 2]) -> f64 {
        let mut acc = 0.0;
        for (i, (&th, &n)) in self.thetas.iter().zip(&self.ns).enumerate() {
            if i == skip[0] || i == skip[1] {
                continue;
            }
            acc += n as f64 / (th - tau);
        }
        acc
    }

    /// Value of the sum in transform units (the density divided by kappa).
    pub(crate) fn eval(&self, s: f64, rel_tol: f64) -> Result<(f64, f64, usize)> {
        self.eval_weighted(s, rel_tol, None)
    }

    /// d/dtheta_j of [`Self::eval`].
    pub(crate) fn deriv(&self, j: usize, s: f64, rel_tol: f64) -> Result<(f64, f64, usize)> {
        self.eval_weighted(s, rel_tol, Some(j))
    }

    fn eval_weighted(
        &self,
        s: f64,
        rel_tol: f64,
        deriv_wrt: Option<usize>,
    ) -> Result<(f64, f64, usize)> {
        let mut value = 0.0;
        let mut err = 0.0;
        let mut n_evals = 0usize;
        for item in &self.items {
            let (v, e, n) = match *item {
                ElItem::Cut { ia, ib, sign } => self.cut_item(s, ia, ib, sign, rel_tol, deriv_wrt)?,
                ElItem::Pole { j, sign } => self.pole_item(s, j, sign, deriv_wrt),
                ElItem::Tail { il, sign } => self.tail_item(s, il, sign, rel_tol, deriv_wrt)?,
            };
            value += v;
            err += e;
            n_evals += n;
        }
        Ok((value, err, n_evals))
    }

    fn cut_item(
        &self,
        s: f64,
        ia: usize,
        ib: usize,
        sign: f64,
        rel_tol: f64,
        deriv_wrt: Option<usize>,
    ) -> Result<(f64, f64, usize)> {
        let (a, b) = (self.thetas[ia], self.thetas[ib]);
        let alpha = b - a;
        let skip = [ia, ib];
        let weight = |u: f64, tau: f64| -> f64 {
            match deriv_wrt {
                None => 1.0,
                Some(j) if j == ia => {
                    u.cos().powi(2) * (-s + 0.5 * self.endpoint_sum(tau, skip))
                }
                Some(j) if j == ib => {
                    u.sin().powi(2) * (-s + 0.5 * self.endpoint_sum(tau, skip))
                }
                Some(j) => -0.5 * self.ns[j] as f64 / (self.thetas[j] - tau),
            }
        };
        let f = |u: f64| {
            let sn2 = u.sin().powi(2);
            let tau = a + alpha * sn2;
            (-s * alpha * sn2).exp() / self.root_product(tau, skip).sqrt() * weight(u, tau)
        };
        let q = integrate_finite(f, 0.0, std::f64::consts::FRAC_PI_2, rel_tol)?;
        let pref = sign * (2.0 / PI) * (-s * a).exp();
        Ok((pref * q.value, pref.abs() * q.abs_err, q.n_evals))
    }

    fn pole_item(&self, s: f64, j: usize, sign: f64, deriv_wrt: Option<usize>) -> (f64, f64, usize) {
        let theta = self.thetas[j];
        let skip = [j, j];
        let base = sign * (-s * theta).exp() / self.root_product(theta, skip).sqrt();
        let v = match deriv_wrt {
            None => base,
            Some(k) if k == j => base * (-s + 0.5 * self.endpoint_sum(theta, skip)),
            Some(k) => base * (-0.5 * self.ns[k] as f64 / (self.thetas[k] - theta)),
        };
        (v, v.abs() * 1e-15, 0)
    }

    fn tail_item(
        &self,
        s: f64,
        il: usize,
        sign: f64,
        rel_tol: f64,
        deriv_wrt: Option<usize>,
    ) -> Result<(f64, f64, usize)> {
        let start = self.thetas[il];
        let skip = [il, il];
        let weight = |tau: f64| -> f64 {
            match deriv_wrt {
                None => 1.0,
                Some(j) if j == il => -s + 0.5 * self.endpoint_sum(tau, skip),
                Some(j) => -0.5 * self.ns[j] as f64 / (self.thetas[j] - tau),
            }
        };
        let f = |u: f64| {
            let tau = start + u * u;
            (-s * u * u).exp() / self.root_product(tau, skip).sqrt() * weight(tau)
        };
        let q = integrate_semi_infinite(f, 0.0, rel_tol)?;
        let pref = sign * (2.0 / PI) * (-s * start).exp();
        Ok((pref * q.value, pref.abs() * q.abs_err, q.n_evals))
    }

    /// Finite-cut items through the flat parametrization
    /// `int_0^1 h(u) du / sqrt(u (1-u))` evaluated by the Chebyshev-Gauss
    /// rule; an independent re-parametrization used for cross-checks.
    #[cfg(test)]
    pub(crate) fn eval_cuts_chebyshev(&self, s: f64, nodes: usize) -> f64 {
        let mut total = 0.0;
        for item in &self.items {
            if let ElItem::Cut { ia, ib, sign } = *item {
                let (a, b) = (self.thetas[ia], self.thetas[ib]);
                let alpha = b - a;
                let skip = [ia, ib];
                let mut acc = 0.0;
                for k in 0..nodes {
                    let u = 0.5 * (1.0 + ((2 * k + 1) as f64 * PI / (2.0 * nodes as f64)).cos());
                    let tau = a + alpha * u;
                    acc += (-s * alpha * u).exp() / self.root_product(tau, skip).sqrt();
                }
                total += sign * (-s * a).exp() * acc / nodes as f64;
            }
        }
        total
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(pos: &[(f64, u32, f64)]) -> QuadraticFormSpec {
        QuadraticFormSpec::from_triples(pos, &[]).unwrap()
    }

    #[test]
    fn chi_square_two_density() {
        // chi2_2 is Exp(1/2): theta = 0.5, n = 2
        let s = spec(&[(0.5, 2, 0.0)]);
        let r = pdf(&s, 2.0).unwrap();
        assert!((r.value - 0.5 * (-1.0_f64).exp()).abs() < 1e-13);
        assert_eq!(r.route, Route::ClosedForm);
    }

    #[test]
    fn chi_square_one_density() {
        let s = spec(&[(0.5, 1, 0.0)]);
        let r = pdf(&s, 1.0).unwrap();
        let want = (2.0 * PI).sqrt().recip() * (-0.5_f64).exp();
        assert!((r.value - want).abs() < 1e-12);
    }

    #[test]
    fn scaled_chi_square_matches_gamma_density() {
        // theta = 1, n = 3: density 2 theta f_{chi2_3}(2 theta s)
        let s3 = spec(&[(1.0, 3, 0.0)]);
        for s in [0.3, 1.0, 2.7] {
            let r = pdf(&s3, s).unwrap();
            let x: f64 = 2.0 * s;
            let chi3 = x.sqrt() * (-x / 2.0).exp() / (2.0 * PI).sqrt();
            assert!((r.value - 2.0 * chi3).abs() < 1e-10 * r.value);
        }
    }

    #[test]
    fn negative_argument_is_zero() {
        let s = spec(&[(1.0, 1, 0.0)]);
        assert_eq!(pdf(&s, 0.0).unwrap().value, 0.0);
        assert_eq!(pdf(&s, -1.0).unwrap().value, 0.0);
    }

    #[test]
    fn hypoexponential_closed_form_route() {
        let s2 = spec(&[(1.0, 2, 0.0), (2.0, 2, 0.0)]);
        let r = pdf(&s2, 1.0).unwrap();
        let want = 2.0 * ((-1.0_f64).exp() - (-2.0_f64).exp());
        assert!((r.value - want).abs() < 1e-14);
        assert_eq!(r.route, Route::ClosedForm);
    }

    #[test]
    fn central_simple_and_general_routes_agree() {
        let cases = [
            vec![(1.0, 1, 0.0), (2.0, 1, 0.0)],
            vec![(1.0, 1, 0.0), (2.0, 1, 0.0), (3.0, 1, 0.0)],
            vec![(0.5, 1, 0.0), (2.5, 1, 0.0), (4.0, 2, 0.0), (6.0, 1, 0.0)],
        ];
        for pos in &cases {
            let sp = spec(pos);
            for s in [0.4, 1.0, 3.0] {
                let a = pdf_central_simple(&sp, s).unwrap();
                let b = pdf_general_contour(&sp, s).unwrap();
                assert!(
                    (a.value - b.value).abs() <= 1e-9 * a.value.abs(),
                    "{pos:?} at {s}: {} vs {}",
                    a.value,
                    b.value
                );
            }
        }
    }

    #[test]
    fn degenerate_pair_pole_term_value() {
        // merged pair at 1 (n = 2) with one more theta at 3: the pole term in
        // transform units is e^{-s}/sqrt(3-1)
        let sp = spec(&[(1.0, 2, 0.0), (3.0, 1, 0.0)]);
        let terms = ElementaryTerms::try_new(&sp).unwrap();
        let pole = terms
            .items
            .iter()
            .find_map(|i| match *i {
                ElItem::Pole { j, sign } => Some(terms.pole_item(1.0, j, sign, None).0),
                _ => None,
            })
            .unwrap();
        let want = (-1.0_f64).exp() / 2.0_f64.sqrt();
        assert!((pole - want).abs() < 1e-15);
        // and pi times it matches the quoted closed form 0.8172…
        assert!((PI * pole - 0.8172).abs() < 1e-4);
    }

    #[test]
    fn dual_parametrization_of_cuts() {
        let sp = spec(&[(1.0, 1, 0.0), (2.0, 1, 0.0), (3.0, 1, 0.0), (4.0, 1, 0.0)]);
        let terms = ElementaryTerms::try_new(&sp).unwrap();
        let s = 1.0;
        // cuts only: evaluate both parametrizations of the same sum
        let mut sin_form = 0.0;
        for item in &terms.items {
            if let ElItem::Cut { ia, ib, sign } = *item {
                sin_form += terms.cut_item(s, ia, ib, sign, 1e-12, None).unwrap().0;
            }
        }
        let mut cheb_prev = terms.eval_cuts_chebyshev(s, 128);
        let cheb = terms.eval_cuts_chebyshev(s, 256);
        assert!((cheb - cheb_prev).abs() < 1e-12 * cheb.abs());
        cheb_prev = cheb;
        assert!(
            (sin_form - cheb_prev).abs() < 1e-10 * sin_form.abs(),
            "sin^2 {sin_form} vs chebyshev {cheb_prev}"
        );
    }

    #[test]
    fn cdf_hypoexponential() {
        let s2 = spec(&[(1.0, 2, 0.0), (2.0, 2, 0.0)]);
        let want = 1.0 - 2.0 * (-1.0_f64).exp() + (-2.0_f64).exp();
        let r = cdf(&s2, 1.0, None).unwrap();
        assert!((r.value - want).abs() < 1e-10, "{} vs {want}", r.value);
    }

    #[test]
    fn cdf_theta0_invariance() {
        let sp = spec(&[(0.8, 1, 0.5), (2.0, 3, 0.0), (3.0, 2, 1.0)]);
        let x = 1.3;
        let vals: Vec<f64> = [0.25, 1.0, 4.0]
            .iter()
            .map(|&t0| cdf(&sp, x, Some(t0)).unwrap().value)
            .collect();
        for w in vals.windows(2) {
            assert!((w[0] - w[1]).abs() < 1e-7 * w[0].abs(), "{vals:?}");
        }
    }

    #[test]
    fn survivor_tail_is_tiny() {
        let sp = spec(&[(1.0, 2, 0.0), (2.0, 1, 1.0)]);
        let x = sp.mean() + 40.0 * sp.std_dev();
        let r = survivor(&sp, x).unwrap();
        assert!(r.value.abs() < 1e-6, "survivor {}", r.value);
    }

    #[test]
    fn cdf_monotone_on_grid() {
        let sp = spec(&[(0.9, 1, 0.0), (2.2, 2, 0.6)]);
        let mut prev = 0.0;
        for k in 1..=20 {
            let x = 0.4 * k as f64;
            let v = cdf(&sp, x, None).unwrap().value;
            assert!(v + 1e-9 >= prev, "cdf must be nondecreasing: {prev} -> {v}");
            prev = v;
        }
        assert!(prev > 0.9);
    }

    #[test]
    fn fb_norm_constant_integrand_sphere() {
        // equal thetas on S^2: C = 4 pi e^{-theta}
        let c = fb_norm_from_pdf(&[2.0, 2.0, 2.0], &[0.0; 3], &[1, 1, 1]).unwrap();
        let want = 4.0 * PI * (-2.0_f64).exp();
        assert!((c - want).abs() < 1e-9 * want, "{c} vs {want}");
    }

    #[test]
    fn rescale_shift_consistency_through_pdf() {
        let sp = spec(&[(1.0, 1, 0.3), (2.5, 2, 0.0)]);
        for (s, c) in [(0.7, 0.0), (1.9, 0.4), (3.0, -1.0)] {
            let direct = pdf(&sp, s).unwrap().value;
            let (shifted, pref) = sp.rescale_shift(s, c).unwrap();
            let via = pref * pdf(&shifted, 1.0).unwrap().value;
            assert!(
                (direct - via).abs() <= 1e-8 * direct.abs(),
                "s={s} c={c}: {direct} vs {via}"
            );
        }
    }

    #[test]
    fn lift_chi2_one_to_three() {
        let base = spec(&[(0.5, 1, 0.0)]);
        let lifted = multiplicity_lift(&base, 0).unwrap();
        for s in [0.4, 1.0, 2.5] {
            let got = lifted.pdf(s).unwrap().value;
            let x: f64 = s; // theta = 1/2 makes X plain chi2
            let want = x.sqrt() * (-x / 2.0).exp() / (2.0 * PI).sqrt();
            assert!((got - want).abs() < 1e-8 * want, "s={s}: {got} vs {want}");
        }
    }

    #[test]
    fn lift_matches_direct_raised_spec() {
        let base = spec(&[(1.0, 1, 0.0), (2.0, 1, 0.0), (3.5, 2, 0.0)]);
        for j in 0..3 {
            let lifted = multiplicity_lift(&base, j).unwrap();
            let mut pos = base.positive().to_vec();
            pos[j].n += 2;
            let direct = QuadraticFormSpec::positive_only(pos).unwrap();
            for s in [0.6, 1.4] {
                let a = lifted.pdf(s).unwrap().value;
                let b = pdf_general_contour(&direct, s).unwrap().value;
                assert!(
                    (a - b).abs() <= 1e-8 * a.abs().max(1e-12),
                    "j={j} s={s}: {a} vs {b}"
                );
            }
        }
    }

    #[test]
    fn lift_matches_finite_difference() {
        // the raise is kappa * theta_j * (-2/n_j) * dI/dtheta_j; check dI by
        // central differences of the elementary sum
        let base = spec(&[(1.0, 1, 0.0), (2.0, 1, 0.0)]);
        let s = 1.2;
        let h = 1e-4;
        let j = 0;
        let i_at = |tj: f64| {
            let sp = spec(&[(tj, 1, 0.0), (2.0, 1, 0.0)]);
            let terms = ElementaryTerms::try_new(&sp).unwrap();
            terms.eval(s, 1e-12).unwrap().0
        };
        let fd = (i_at(1.0 + h) - i_at(1.0 - h)) / (2.0 * h);
        let terms = ElementaryTerms::try_new(&base).unwrap();
        let (exact, _, _) = terms.deriv(j, s, 1e-12).unwrap();
        assert!((fd - exact).abs() < 1e-5 * exact.abs(), "fd {fd} vs {exact}");
    }

    #[test]
    fn noncentral_lift_is_gamma2_derivative_route() {
        let base = spec(&[(1.0, 2, 1.5)]);
        let lifted = multiplicity_lift(&base, 0).unwrap();
        assert!(lifted.lifted_spec().is_some());
        let r = lifted.pdf(1.0).unwrap();
        assert!(r.value > 0.0);
    }
}
