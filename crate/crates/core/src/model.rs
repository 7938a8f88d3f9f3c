//! Quadratic-form specifications and their branch-cut layout.
//!
//! A spec is a pair of term lists describing `X - Y` where both parts are
//! positive linear combinations of independent (non-central) chi-squares,
//! `sum_i chi2_{n_i}(delta_i) / (2 theta_i)`. Terms are kept sorted by
//! `theta` with exact duplicates merged, so downstream code can rely on
//! strictly increasing pole locations.

use serde::Deserialize;

use crate::error::{Error, Result};

/// Relative tolerance under which two `theta` values are merged into one term.
///
/// Near-coalescent poles destabilize every contour route, while merging them
/// commits an error of the same order as the tolerance itself.
pub const THETA_MERGE_RTOL: f64 = 1e-12;

/// One scaled non-central chi-square component `chi2_n(gamma2/(2 theta)) / (2 theta)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChiSquareTerm {
    /// Inverse scale; the coefficient of the chi-square is `1/(2 theta)`.
    pub theta: f64,
    /// Degrees of freedom.
    pub n: u32,
    /// Squared mean-vector norm; the non-centrality is `gamma2/(2 theta)`.
    pub gamma2: f64,
}

impl ChiSquareTerm {
    pub fn new(theta: f64, n: u32, gamma2: f64) -> Result<Self> {
        if !(theta > 0.0) || !theta.is_finite() {
            return Err(Error::NonPositiveTheta(theta));
        }
        if n == 0 {
            return Err(Error::NonIntegerDof);
        }
        if !(gamma2 >= 0.0) || !gamma2.is_finite() {
            return Err(Error::InvalidSpec(format!(
                "gamma2 must be finite and non-negative, got {gamma2}"
            )));
        }
        Ok(Self { theta, n, gamma2 })
    }

    /// Central term (no mean offset).
    pub fn central(theta: f64, n: u32) -> Result<Self> {
        Self::new(theta, n, 0.0)
    }

    /// Chi-square coefficient `lambda = 1/(2 theta)`.
    pub fn lambda(&self) -> f64 {
        1.0 / (2.0 * self.theta)
    }

    /// Non-centrality `delta = gamma2/(2 theta)`.
    pub fn delta(&self) -> f64 {
        self.gamma2 / (2.0 * self.theta)
    }

    pub fn is_central(&self) -> bool {
        self.gamma2 == 0.0
    }
}

/// Validated, normalized specification of `X - Y`.
///
/// Both lists are sorted ascending in `theta` and duplicate thetas are merged
/// (degrees of freedom and `gamma2` add, by additivity of independent
/// chi-squares at equal scale). The positive list is never empty; the negative
/// list may be.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticFormSpec {
    positive: Vec<ChiSquareTerm>,
    negative: Vec<ChiSquareTerm>,
}

fn normalize_terms(raw: &[ChiSquareTerm]) -> Result<Vec<ChiSquareTerm>> {
    let mut terms = Vec::with_capacity(raw.len());
    for t in raw {
        // re-validate so specs built from struct literals cannot sneak through
        terms.push(ChiSquareTerm::new(t.theta, t.n, t.gamma2)?);
    }
    terms.sort_unstable_by(|a, b| a.theta.total_cmp(&b.theta));
    let mut merged: Vec<ChiSquareTerm> = Vec::with_capacity(terms.len());
    for t in terms {
        match merged.last_mut() {
            Some(last) if (t.theta - last.theta) <= THETA_MERGE_RTOL * t.theta.abs() => {
                last.n += t.n;
                last.gamma2 += t.gamma2;
            }
            _ => merged.push(t),
        }
    }
    Ok(merged)
}

impl QuadraticFormSpec {
    /// Validate and normalize a raw pair of term lists.
    pub fn new(positive: Vec<ChiSquareTerm>, negative: Vec<ChiSquareTerm>) -> Result<Self> {
        if positive.is_empty() {
            return Err(Error::EmptyPositiveList);
        }
        Ok(Self {
            positive: normalize_terms(&positive)?,
            negative: normalize_terms(&negative)?,
        })
    }

    /// Positive combination without a negative part.
    pub fn positive_only(positive: Vec<ChiSquareTerm>) -> Result<Self> {
        Self::new(positive, Vec::new())
    }

    /// Convenience constructor from `(theta, n, gamma2)` triples.
    pub fn from_triples(pos: &[(f64, u32, f64)], neg: &[(f64, u32, f64)]) -> Result<Self> {
        let mk = |v: &[(f64, u32, f64)]| -> Result<Vec<ChiSquareTerm>> {
            v.iter().map(|&(t, n, g)| ChiSquareTerm::new(t, n, g)).collect()
        };
        Self::new(mk(pos)?, mk(neg)?)
    }

    pub fn positive(&self) -> &[ChiSquareTerm] {
        &self.positive
    }

    pub fn negative(&self) -> &[ChiSquareTerm] {
        &self.negative
    }

    pub fn is_positive_combination(&self) -> bool {
        self.negative.is_empty()
    }

    /// All terms central on both sides.
    pub fn is_central(&self) -> bool {
        self.positive.iter().chain(&self.negative).all(ChiSquareTerm::is_central)
    }

    /// Spec for `Y - X`.
    pub fn swapped(&self) -> Result<Self> {
        Self::new(self.negative.clone(), self.positive.clone())
    }

    pub fn min_theta(&self) -> f64 {
        self.positive[0].theta
    }

    /// Smallest theta of the negative part, `+inf` when it is empty.
    pub fn min_theta_negative(&self) -> f64 {
        self.negative.first().map_or(f64::INFINITY, |t| t.theta)
    }

    /// `E[X - Y] = sum lambda_i (n_i + delta_i) - ...`.
    pub fn mean(&self) -> f64 {
        let part = |ts: &[ChiSquareTerm]| -> f64 {
            ts.iter().map(|t| t.lambda() * (t.n as f64 + t.delta())).sum()
        };
        part(&self.positive) - part(&self.negative)
    }

    pub fn variance(&self) -> f64 {
        let part = |ts: &[ChiSquareTerm]| -> f64 {
            ts.iter()
                .map(|t| 2.0 * t.lambda() * t.lambda() * (t.n as f64 + 2.0 * t.delta()))
                .sum()
        };
        part(&self.positive) + part(&self.negative)
    }

    pub fn std_dev(&self) -> f64 {
        self.variance().sqrt()
    }

    /// Rescale-and-shift identity: returns the transformed spec with
    /// `theta -> s*theta - s*c`, `gamma2 -> s*gamma2` and the multiplicative
    /// prefactor `P` such that `pdf(self, s) = P * pdf(transformed, 1)`.
    ///
    /// Requires an empty negative list and `c < min(theta)`.
    pub fn rescale_shift(&self, s: f64, c: f64) -> Result<(Self, f64)> {
        if !self.is_positive_combination() {
            return Err(Error::NotAPositiveCombination);
        }
        if !(s > 0.0) {
            return Err(Error::InvalidSpec(format!("scale s must be positive, got {s}")));
        }
        let min_theta = self.min_theta();
        if c >= min_theta {
            return Err(Error::ShiftTooLarge { c, min_theta });
        }
        let mut shifted = Vec::with_capacity(self.positive.len());
        let mut log_pref = -s * c - s.ln();
        for t in &self.positive {
            shifted.push(ChiSquareTerm::new(s * (t.theta - c), t.n, s * t.gamma2)?);
            log_pref += 0.5 * t.n as f64 * (t.theta / (t.theta - c)).ln();
            log_pref += t.gamma2 / (4.0 * (t.theta - c)) - t.gamma2 / (4.0 * t.theta);
        }
        Ok((Self::positive_only(shifted)?, log_pref.exp()))
    }

    /// Branch-cut layout of the positive part (the only part that carries
    /// singularities on the relevant half plane).
    pub fn branch_layout(&self) -> BranchCutLayout {
        branch_layout(&self.positive)
    }

    /// Parse the JSON spec format.
    ///
    /// Per term either `theta`/`gamma2` or the alternative keys `lambda`
    /// (`= 1/(2 theta)`) and `delta` (`= gamma2/(2 theta)`) are accepted; the
    /// two styles cannot be mixed within one term. Unknown top-level keys
    /// (e.g. a `note`) are ignored.
    pub fn from_json_str(s: &str) -> Result<Self> {
        let raw: RawSpec =
            serde_json::from_str(s).map_err(|e| Error::InvalidSpec(e.to_string()))?;
        let conv = |terms: Vec<RawTerm>| -> Result<Vec<ChiSquareTerm>> {
            terms.into_iter().map(RawTerm::into_term).collect()
        };
        let positive = conv(raw.positive)?;
        let negative = conv(raw.negative.unwrap_or_default())?;
        Self::new(positive, negative)
    }
}

#[derive(Deserialize)]
struct RawSpec {
    positive: Vec<RawTerm>,
    negative: Option<Vec<RawTerm>>,
}

#[derive(Deserialize)]
struct RawTerm {
    theta: Option<f64>,
    lambda: Option<f64>,
    n: serde_json::Number,
    gamma2: Option<f64>,
    delta: Option<f64>,
}

impl RawTerm {
    fn into_term(self) -> Result<ChiSquareTerm> {
        let n = match self.n.as_u64() {
            Some(n) if n >= 1 && n <= u32::MAX as u64 => n as u32,
            _ => return Err(Error::NonIntegerDof),
        };
        let theta_style = self.theta.is_some() || self.gamma2.is_some();
        let lambda_style = self.lambda.is_some() || self.delta.is_some();
        if theta_style && lambda_style {
            return Err(Error::InvalidSpec(
                "per term use either theta/gamma2 or lambda/delta, not both".into(),
            ));
        }
        let (theta, gamma2) = if lambda_style {
            let lambda = self
                .lambda
                .ok_or_else(|| Error::InvalidSpec("delta given without lambda".into()))?;
            if !(lambda > 0.0) {
                return Err(Error::InvalidSpec(format!(
                    "lambda must be positive, got {lambda}"
                )));
            }
            // delta = gamma2/(2 theta) with theta = 1/(2 lambda) gives gamma2 = delta/lambda
            let delta = self.delta.unwrap_or(0.0);
            (1.0 / (2.0 * lambda), delta / lambda)
        } else {
            let theta = self
                .theta
                .ok_or_else(|| Error::InvalidSpec("term missing theta (or lambda)".into()))?;
            (theta, self.gamma2.unwrap_or(0.0))
        };
        ChiSquareTerm::new(theta, n, gamma2)
    }
}

/// Even-multiplicity pole lying strictly inside a cut (two neighbouring cuts
/// merged across it).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InteriorPole {
    pub location: f64,
    /// Pole order `n/2`.
    pub order: u32,
    pub noncentral: bool,
    pub term_index: usize,
}

/// Finite branch cut `[-right, -left]` on the pole axis, stored by the
/// positive locations `left < right`.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteCut {
    pub left: f64,
    pub right: f64,
    pub left_index: usize,
    pub right_index: usize,
    pub interior_poles: Vec<InteriorPole>,
    pub endpoints_noncentral: (bool, bool),
}

/// Unbounded cut `(-inf, -start]`, present when the number of odd
/// multiplicities is odd.
#[derive(Debug, Clone, PartialEq)]
pub struct UnboundedCut {
    pub start: f64,
    pub start_index: usize,
    pub noncentral_endpoint: bool,
    pub interior_poles: Vec<InteriorPole>,
}

/// Even-multiplicity pole outside every cut: a cut degenerated to a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IsolatedPole {
    pub location: f64,
    /// Pole order `n/2`.
    pub order: u32,
    pub noncentral: bool,
    pub term_index: usize,
}

/// Singularity structure of `1/prod (theta_i + t)^{n_i/2}` on the negative
/// real axis: odd multiplicities pair up into cuts in ascending order (an odd
/// count pairs the last one with infinity), even multiplicities are plain
/// poles, interior or isolated depending on where they fall.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct BranchCutLayout {
    pub finite_cuts: Vec<FiniteCut>,
    pub unbounded_cut: Option<UnboundedCut>,
    pub isolated_even_poles: Vec<IsolatedPole>,
}

impl BranchCutLayout {
    /// Positions (on the positive axis) of every singular point in the layout.
    pub fn singular_points(&self) -> Vec<f64> {
        let mut pts = Vec::new();
        for c in &self.finite_cuts {
            pts.push(c.left);
            pts.push(c.right);
            pts.extend(c.interior_poles.iter().map(|p| p.location));
        }
        if let Some(u) = &self.unbounded_cut {
            pts.push(u.start);
            pts.extend(u.interior_poles.iter().map(|p| p.location));
        }
        pts.extend(self.isolated_even_poles.iter().map(|p| p.location));
        pts
    }

    /// Number of cuts, counting the unbounded one.
    pub fn cut_count(&self) -> usize {
        self.finite_cuts.len() + usize::from(self.unbounded_cut.is_some())
    }
}

fn branch_layout(terms: &[ChiSquareTerm]) -> BranchCutLayout {
    let odd: Vec<usize> = (0..terms.len()).filter(|&i| terms[i].n % 2 == 1).collect();
    let mut finite_cuts = Vec::new();
    let mut unbounded_cut = None;

    for pair in odd.chunks(2) {
        match *pair {
            [i, j] => finite_cuts.push(FiniteCut {
                left: terms[i].theta,
                right: terms[j].theta,
                left_index: i,
                right_index: j,
                interior_poles: Vec::new(),
                endpoints_noncentral: (terms[i].gamma2 > 0.0, terms[j].gamma2 > 0.0),
            }),
            [i] => {
                unbounded_cut = Some(UnboundedCut {
                    start: terms[i].theta,
                    start_index: i,
                    noncentral_endpoint: terms[i].gamma2 > 0.0,
                    interior_poles: Vec::new(),
                });
            }
            _ => unreachable!(),
        }
    }

    let mut isolated = Vec::new();
    'evens: for (i, t) in terms.iter().enumerate() {
        if t.n % 2 == 1 {
            continue;
        }
        let pole = InteriorPole {
            location: t.theta,
            order: t.n / 2,
            noncentral: t.gamma2 > 0.0,
            term_index: i,
        };
        for cut in &mut finite_cuts {
            if t.theta > cut.left && t.theta < cut.right {
                cut.interior_poles.push(pole);
                continue 'evens;
            }
        }
        if let Some(u) = &mut unbounded_cut {
            if t.theta > u.start {
                u.interior_poles.push(pole);
                continue 'evens;
            }
        }
        isolated.push(IsolatedPole {
            location: t.theta,
            order: t.n / 2,
            noncentral: t.gamma2 > 0.0,
            term_index: i,
        });
    }

    BranchCutLayout {
        finite_cuts,
        unbounded_cut,
        isolated_even_poles: isolated,
    }
}
