//! Assembly and evaluation of the deformed inversion contour.
//!
//! The Bromwich integral `(1/2 pi i) int g(t) mult(t) e^{st} dt` over a
//! vertical line right of all poles equals the sum of anticlockwise contour
//! integrals around the branch cuts and isolated even-multiplicity poles of
//! `g` (closing the line to the left for `s > 0`; the arcs vanish and the
//! two-sided pieces off the cuts cancel). Each enclosed object becomes one
//! piece:
//!
//! * a finite cut with central simple endpoints and no interior pole
//!   collapses onto the real segment; the substitution
//!   `t = a cos^2 u + b sin^2 u` removes the inverse-square-root endpoint
//!   singularities and leaves
//!   `(2/pi) e^{-sa} int_0^{pi/2} Re[g_hat] mult e^{-s (b-a) sin^2 u} du`
//!   with the two endpoint factors of `g` handled analytically;
//! * an unbounded cut with a central simple endpoint collapses likewise via
//!   `t = start + u^2`;
//! * anything non-collapsible is enclosed by a circle when the layout leaves
//!   enough margin, otherwise by a two-ray contour with end arcs (a finite
//!   "dog-bone" or a semi-infinite "keyhole");
//! * a central isolated even pole of order `m` contributes its residue,
//!   computed analytically from the derivatives of `log g`;
//! * a non-central isolated pole is essential and gets a small circle whose
//!   radius balances margin against the blow-up of `exp(gamma2/(4(theta+t)))`.
//!
//! Everything is expressed through a `Multiplier` so the same machinery
//! serves plain densities (`mult = 1`) and differences (`mult(t) = g'(-t)`,
//! analytic on the relevant half plane).

use num_complex::Complex64;
use std::f64::consts::{FRAC_PI_2, PI};

use crate::error::Result;
use crate::integrand::IntegrandContext;
use crate::model::{BranchCutLayout, FiniteCut, IsolatedPole, UnboundedCut};
use crate::quad::{
    integrate_circle_floor, integrate_finite_floor, integrate_semi_infinite_impl, CircleRoute,
    QuadValue,
};

/// Analytic factor multiplying `g(t) e^{st}` on the contour.
pub(crate) trait Multiplier {
    fn eval(&self, t: Complex64) -> Complex64;
    /// `d^order/dt^order log mult(t) / (order-1)!`, `order >= 1`.
    fn log_deriv_scaled(&self, t: Complex64, order: u32) -> Complex64;
    /// Pole positions in the `t` plane, for contour margin checks.
    fn poles(&self) -> Vec<f64>;
}

pub(crate) struct Unit;

impl Multiplier for Unit {
    fn eval(&self, _t: Complex64) -> Complex64 {
        Complex64::new(1.0, 0.0)
    }
    fn log_deriv_scaled(&self, _t: Complex64, _order: u32) -> Complex64 {
        Complex64::new(0.0, 0.0)
    }
    fn poles(&self) -> Vec<f64> {
        Vec::new()
    }
}

/// `mult(t) = g'(-t)` for the negated part of a difference; poles at `+theta'`.
pub(crate) struct NegatedPart<'a>(pub &'a IntegrandContext);

impl Multiplier for NegatedPart<'_> {
    fn eval(&self, t: Complex64) -> Complex64 {
        self.0.g_unchecked(-t)
    }
    fn log_deriv_scaled(&self, t: Complex64, order: u32) -> Complex64 {
        let inner = self.0.log_deriv_scaled_excluding(-t, order, &[]);
        if order % 2 == 1 {
            -inner
        } else {
            inner
        }
    }
    fn poles(&self) -> Vec<f64> {
        self.0.terms().iter().map(|term| term.theta).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum PieceKind {
    Segment,
    SemiInfinite,
    Circle,
    Keyhole,
    Dogbone,
    Residue,
}

impl PieceKind {
    fn label(self) -> &'static str {
        match self {
            PieceKind::Segment => "segment",
            PieceKind::SemiInfinite => "semi-infinite",
            PieceKind::Circle => "circle",
            PieceKind::Keyhole => "keyhole",
            PieceKind::Dogbone => "dogbone",
            PieceKind::Residue => "residue",
        }
    }
}

pub(crate) struct ContourOutcome {
    /// The value of `(1/2 pi i) int g mult e^{st} dt` over the Bromwich line.
    pub value: f64,
    pub abs_err: f64,
    pub n_evals: usize,
    pub description: String,
    /// True when no quadrature ran (pure residue sums).
    pub closed_form_only: bool,
}


fn distance_to_interval(p: f64, lo: f64, hi: f64) -> f64 {
    if p < lo {
        lo - p
    } else if p > hi {
        p - hi
    } else {
        0.0
    }
}

/// Shrink a contour radius at large `s`: the integrand carries `e^{st}`, so a
/// radius `r` inflates the oscillation amplitude by `e^{s r}` over the result
/// scale and the quadrature loses that many digits to cancellation. Balancing
/// `s r` against the essential exponent `gamma2/(4 r)` gives the minimizer.
fn tame_radius(base: f64, gamma2: f64, s: f64) -> f64 {
    if s <= 0.0 {
        return base;
    }
    let opt = (gamma2 / (4.0 * s)).sqrt().max(3.0 / s);
    base.min(opt)
}

/// Exponent budget for `exp(gamma2/(4 d))` seen from a contour at distance
/// `d`; sets the clearance `gamma2 / (4 CAP)` every non-central singularity
/// demands of contours that do not enclose it.
const CONTOUR_EXPONENT_CAP: f64 = 20.0;

#[derive(Clone, Copy)]
enum Obj<'a> {
    Cut(&'a FiniteCut),
    Pole(&'a IsolatedPole),
    Tail(&'a UnboundedCut),
}

/// One singular object in t space: occupied interval and the clearance other
/// contours must keep from it.
struct GObj<'a> {
    lo: f64,
    hi: f64,
    need: f64,
    gamma_max: f64,
    kind: Obj<'a>,
}

fn clearance(gamma2: f64) -> f64 {
    gamma2 / (4.0 * CONTOUR_EXPONENT_CAP)
}

fn gather_objects<'a>(ctx: &IntegrandContext, layout: &'a BranchCutLayout) -> Vec<GObj<'a>> {
    let mut objs: Vec<GObj> = Vec::new();
    if let Some(u) = &layout.unbounded_cut {
        let mut gamma_max = ctx.terms()[u.start_index].gamma2;
        for p in &u.interior_poles {
            gamma_max = gamma_max.max(ctx.terms()[p.term_index].gamma2);
        }
        objs.push(GObj {
            lo: f64::NEG_INFINITY,
            hi: -u.start,
            need: clearance(gamma_max),
            gamma_max,
            kind: Obj::Tail(u),
        });
    }
    for cut in &layout.finite_cuts {
        let mut gamma_max = ctx.terms()[cut.left_index]
            .gamma2
            .max(ctx.terms()[cut.right_index].gamma2);
        for p in &cut.interior_poles {
            gamma_max = gamma_max.max(ctx.terms()[p.term_index].gamma2);
        }
        objs.push(GObj {
            lo: -cut.right,
            hi: -cut.left,
            need: clearance(gamma_max),
            gamma_max,
            kind: Obj::Cut(cut),
        });
    }
    for pole in &layout.isolated_even_poles {
        let gamma_max = ctx.terms()[pole.term_index].gamma2;
        objs.push(GObj {
            lo: -pole.location,
            hi: -pole.location,
            need: clearance(gamma_max),
            gamma_max,
            kind: Obj::Pole(pole),
        });
    }
    objs.sort_by(|a, b| a.hi.total_cmp(&b.hi));
    objs
}

/// Objects too close to honour each other's clearance are enclosed by one
/// common contour: the pieces of a split would be exponentially large with
/// most of their size cancelling between them.
fn cluster(objs: Vec<GObj<'_>>) -> Vec<Vec<GObj<'_>>> {
    let mut groups: Vec<Vec<GObj>> = Vec::new();
    for obj in objs {
        if let Some(last) = groups.last_mut() {
            let cur_hi = last.iter().map(|o| o.hi).fold(f64::NEG_INFINITY, f64::max);
            let cur_need = last.iter().map(|o| o.need).fold(0.0, f64::max);
            let gap = obj.lo - cur_hi;
            if gap < 1.25 * (cur_need + obj.need) + 1e-12 * obj.lo.abs().max(1.0) {
                last.push(obj);
                continue;
            }
        }
        groups.push(vec![obj]);
    }
    groups
}

enum QuadPiece<'a> {
    CollapsedCut(&'a FiniteCut),
    CollapsedTail(&'a UnboundedCut),
    Circle { center: f64, radius: f64 },
    Dogbone { lo: f64, hi: f64, r0: f64 },
    Keyhole { start: f64, r0: f64 },
}

impl QuadPiece<'_> {
    fn kind(&self) -> PieceKind {
        match self {
            QuadPiece::CollapsedCut(_) => PieceKind::Segment,
            QuadPiece::CollapsedTail(_) => PieceKind::SemiInfinite,
            QuadPiece::Circle { .. } => PieceKind::Circle,
            QuadPiece::Dogbone { .. } => PieceKind::Dogbone,
            QuadPiece::Keyhole { .. } => PieceKind::Keyhole,
        }
    }
}

pub(crate) fn integrate_contour(
    ctx: &IntegrandContext,
    layout: &BranchCutLayout,
    mult: &dyn Multiplier,
    s: f64,
    rel_tol: f64,
) -> Result<ContourOutcome> {
    // All singular points of g in the t plane sit at -theta_i; the multiplier
    // adds its own (at +theta' for differences). Geometry below is in t space.
    let mut all_sing: Vec<f64> = layout.singular_points().iter().map(|&p| -p).collect();
    all_sing.extend(mult.poles());

    let mut value = 0.0;
    let mut abs_err = 0.0;
    let mut n_evals = 0usize;
    let mut kinds: Vec<PieceKind> = Vec::new();
    let mut quadrature: Vec<QuadPiece> = Vec::new();

    for group in cluster(gather_objects(ctx, layout)) {
        // exact pieces first: they often carry the bulk of the value and set
        // the absolute scale below which the quadrature pieces may stop caring
        if let [GObj { kind: Obj::Pole(pole), .. }] = group[..] {
            if !pole.noncentral {
                let res = residue_at_even_pole(ctx, mult, s, pole.term_index, pole.order);
                value += res.re;
                abs_err += res.im.abs();
                kinds.push(PieceKind::Residue);
                continue;
            }
            if let Some(res) = essential_pole_series(ctx, mult, s, pole.term_index, pole.order) {
                value += res.re;
                abs_err += res.im.abs();
                kinds.push(PieceKind::Residue);
                continue;
            }
        }
        quadrature.push(plan_group(ctx, &group, &all_sing, s));
    }

    let mut deferred: Vec<QuadPiece> = Vec::new();
    for piece in quadrature {
        let floor = rel_tol * value.abs();
        match eval_piece(ctx, mult, s, &piece, rel_tol, floor) {
            Ok((v, e, n)) => {
                value += v;
                abs_err += e;
                n_evals += n;
                kinds.push(piece.kind());
            }
            Err(crate::error::Error::NoConvergence(_)) => deferred.push(piece),
            Err(e) => return Err(e),
        }
    }
    // pieces that stalled get one more try now that the overall scale is known
    for piece in deferred {
        let floor = rel_tol * value.abs();
        let (v, e, n) = eval_piece(ctx, mult, s, &piece, rel_tol, floor)?;
        value += v;
        abs_err += e;
        n_evals += n;
        kinds.push(piece.kind());
    }

    let closed_form_only = kinds.iter().all(|&k| k == PieceKind::Residue);
    let mut description = String::new();
    for (i, k) in kinds.iter().enumerate() {
        if i > 0 {
            description.push('+');
        }
        description.push_str(k.label());
    }

    Ok(ContourOutcome { value, abs_err, n_evals, description, closed_form_only })
}

fn plan_group<'a>(
    ctx: &IntegrandContext,
    group: &[GObj<'a>],
    all_sing: &[f64],
    s: f64,
) -> QuadPiece<'a> {
    let g_lo = group.iter().map(|o| o.lo).fold(f64::INFINITY, f64::min);
    let g_hi = group.iter().map(|o| o.hi).fold(f64::NEG_INFINITY, f64::max);
    let g_need = group.iter().map(|o| o.need).fold(0.0, f64::max);
    let g_gamma = group.iter().map(|o| o.gamma_max).fold(0.0, f64::max);

    // positions this group accounts for, excluded from the gap search
    let mut members: Vec<f64> = Vec::new();
    for obj in group {
        match obj.kind {
            Obj::Cut(c) => {
                members.push(-c.left);
                members.push(-c.right);
                members.extend(c.interior_poles.iter().map(|p| -p.location));
            }
            Obj::Pole(p) => members.push(-p.location),
            Obj::Tail(u) => {
                members.push(-u.start);
                members.extend(u.interior_poles.iter().map(|p| -p.location));
            }
        }
    }
    let gap = all_sing
        .iter()
        .filter(|p| !members.iter().any(|q| (*p - q).abs() < 1e-14 * p.abs().max(1.0)))
        .map(|&p| distance_to_interval(p, g_lo, g_hi))
        .fold(f64::INFINITY, f64::min);

    if let [obj] = group {
        match obj.kind {
            Obj::Cut(cut) if cut_is_collapsible(ctx, cut) => {
                return QuadPiece::CollapsedCut(cut);
            }
            Obj::Tail(u) => {
                let t = &ctx.terms()[u.start_index];
                if t.n == 1 && t.gamma2 == 0.0 && u.interior_poles.is_empty() {
                    return QuadPiece::CollapsedTail(u);
                }
            }
            _ => {}
        }
    }

    if let Some(start) = group.iter().find_map(|o| match o.kind {
        Obj::Tail(u) => Some(u.start),
        _ => None,
    }) {
        let end = -start;
        let gap_eff = gap.min(start.max(1.0));
        let reach = tame_radius((0.45 * gap_eff).max(g_need).min(0.9 * gap), g_gamma, s)
            .max(g_need.min(0.9 * gap));
        // the arc must still enclose every member absorbed from the right
        let r0 = (g_hi - end) + reach;
        return QuadPiece::Keyhole { start, r0 };
    }

    let gap_eff = gap.min((g_hi - g_lo).max(1.0));
    let reach = tame_radius((0.25 * gap_eff).max(g_need), g_gamma, s).max(g_need.min(0.6 * gap));
    let radius = 0.5 * (g_hi - g_lo) + reach;
    if gap - reach >= 0.1 * radius {
        return QuadPiece::Circle { center: 0.5 * (g_lo + g_hi), radius };
    }
    let r0 = tame_radius((0.45 * gap_eff).max(g_need).min(0.9 * gap), g_gamma, s)
        .max(g_need.min(0.9 * gap));
    QuadPiece::Dogbone { lo: g_lo, hi: g_hi, r0 }
}

fn eval_piece(
    ctx: &IntegrandContext,
    mult: &dyn Multiplier,
    s: f64,
    piece: &QuadPiece,
    rel_tol: f64,
    abs_floor: f64,
) -> Result<(f64, f64, usize)> {
    match *piece {
        QuadPiece::CollapsedCut(cut) => collapsed_cut(ctx, mult, s, cut, rel_tol, abs_floor),
        QuadPiece::CollapsedTail(u) => collapsed_unbounded(ctx, mult, s, u, rel_tol, abs_floor),
        QuadPiece::Circle { center, radius } => {
            let g = |t: Complex64| ctx.g_unchecked(t) * mult.eval(t) * (t * s).exp();
            let q = integrate_circle_floor(
                g,
                center,
                radius,
                rel_tol,
                abs_floor,
                CircleRoute::ResidueNormalized,
            )?;
            Ok((q.value.re, q.abs_err + q.value.im.abs(), q.n_evals))
        }
        QuadPiece::Dogbone { lo, hi, r0 } => dogbone(ctx, mult, s, lo, hi, r0, rel_tol, abs_floor),
        QuadPiece::Keyhole { start, r0 } => keyhole(ctx, mult, s, start, r0, rel_tol, abs_floor),
    }
}

fn cut_is_collapsible(ctx: &IntegrandContext, cut: &FiniteCut) -> bool {
    let lt = &ctx.terms()[cut.left_index];
    let rt = &ctx.terms()[cut.right_index];
    lt.n == 1 && rt.n == 1 && lt.gamma2 == 0.0 && rt.gamma2 == 0.0 && cut.interior_poles.is_empty()
}

/// Collapsed finite cut, endpoint square roots handled analytically.
fn collapsed_cut(
    ctx: &IntegrandContext,
    mult: &dyn Multiplier,
    s: f64,
    cut: &FiniteCut,
    rel_tol: f64,
    abs_floor: f64,
) -> Result<(f64, f64, usize)> {
    let (a, b) = (cut.left, cut.right);
    let alpha = b - a;
    let skip = [cut.left_index, cut.right_index];
    let f = |u: f64| {
        let sn2 = u.sin().powi(2);
        let tau = a + alpha * sn2;
        let tc = Complex64::new(-tau, 0.0);
        let base = ctx.g_excluding(tc, &skip) * mult.eval(tc);
        base.re * (-s * alpha * sn2).exp()
    };
    let pref = (2.0 / PI) * (-s * a).exp();
    let q = integrate_finite_floor(f, 0.0, FRAC_PI_2, rel_tol, abs_floor / pref.max(1e-300))?;
    Ok((pref * q.value, pref.abs() * q.abs_err, q.n_evals))
}


/// Collapsed unbounded cut via `t = start + u^2`.
fn collapsed_unbounded(
    ctx: &IntegrandContext,
    mult: &dyn Multiplier,
    s: f64,
    u: &UnboundedCut,
    rel_tol: f64,
    abs_floor: f64,
) -> Result<(f64, f64, usize)> {
    let start = u.start;
    let skip = [u.start_index];
    let f = |x: f64| {
        let tc = Complex64::new(-(start + x * x), 0.0);
        let base = ctx.g_excluding(tc, &skip) * mult.eval(tc);
        base.re * (-s * x * x).exp()
    };
    let pref = (2.0 / PI) * (-s * start).exp();
    let q = integrate_semi_infinite_impl(f, 0.0, rel_tol, abs_floor / pref.max(1e-300))?;
    Ok((pref * q.value, pref.abs() * q.abs_err, q.n_evals))
}


/// Scaled derivatives `F^(r)/r!` for `r = 0..=max_order` at `t0` of
/// `F = g-without-term-j * mult * e^{st}`, by the Leibniz recursion on
/// `F' = (log F)' F` rewritten for the scaled values:
/// `D_k = (1/k) sum_i psi_{k-i} D_i` with `psi_r = (log F)^{(r)}/(r-1)!`.
fn analytic_derivs(
    ctx: &IntegrandContext,
    mult: &dyn Multiplier,
    s: f64,
    t0: Complex64,
    skip: &[usize; 1],
    max_order: usize,
) -> Vec<Complex64> {
    let mut d = Vec::with_capacity(max_order + 1);
    d.push(ctx.g_excluding(t0, skip) * mult.eval(t0) * (t0 * s).exp());
    let mut psis: Vec<Complex64> = Vec::with_capacity(max_order);
    for k in 1..=max_order {
        let order_psi = k as u32;
        let mut psi = ctx.log_deriv_scaled_excluding(t0, order_psi, skip)
            + mult.log_deriv_scaled(t0, order_psi);
        if order_psi == 1 {
            psi += s;
        }
        psis.push(psi);
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..k {
            acc += psis[k - 1 - i] * d[i];
        }
        d.push(acc / k as f64);
    }
    d
}

/// Residue of `g(t) mult(t) e^{st}` at the order-`m` pole `-theta_j` of a
/// central even-multiplicity term: `F^{(m-1)}/(m-1)!` of the remaining factor.
pub(crate) fn residue_at_even_pole(
    ctx: &IntegrandContext,
    mult: &dyn Multiplier,
    s: f64,
    term_index: usize,
    order: u32,
) -> Complex64 {
    let t0 = Complex64::new(-ctx.terms()[term_index].theta, 0.0);
    let m = order as usize;
    let derivs = analytic_derivs(ctx, mult, s, t0, &[term_index], m - 1);
    derivs[m - 1]
}

/// Contour integral around the essential singularity of a non-central
/// even-multiplicity term: with `E = exp(gamma2/(4 (theta_j + t)))` expanded
/// into powers of `(theta_j + t)^{-1}`, each term leaves a finite-order pole,
/// so the piece is `sum_k (gamma2/4)^k / k! * F^{(m+k-1)}(t0) / (m+k-1)!`.
/// `None` when the series fails to settle within the order budget.
fn essential_pole_series(
    ctx: &IntegrandContext,
    mult: &dyn Multiplier,
    s: f64,
    term_index: usize,
    order: u32,
) -> Option<Complex64> {
    const MAX_TERMS: usize = 160;
    let term = &ctx.terms()[term_index];
    let t0 = Complex64::new(-term.theta, 0.0);
    let m = order as usize;
    let derivs = analytic_derivs(ctx, mult, s, t0, &[term_index], m + MAX_TERMS);

    let mut sum = Complex64::new(0.0, 0.0);
    let mut weight = 1.0; // (gamma2/4)^k / k!
    let mut quiet = 0;
    for k in 0..=MAX_TERMS {
        let r = m + k - 1;
        let contrib = derivs[r] * weight;
        if !contrib.qfinite() {
            return None;
        }
        sum += contrib;
        if contrib.norm() <= 1e-17 * sum.norm().max(1e-300) {
            quiet += 1;
            if quiet >= 3 {
                return Some(sum);
            }
        } else {
            quiet = 0;
        }
        weight *= term.gamma2 / (4.0 * (k + 1) as f64);
    }
    None
}

/// Two-ray contour with end arcs around a finite cut `[-b, -a]` (t space
/// `[lo, hi]`), for cuts a circle cannot enclose with enough margin.
fn dogbone(
    ctx: &IntegrandContext,
    mult: &dyn Multiplier,
    s: f64,
    lo: f64,
    hi: f64,
    r0: f64,
    rel_tol: f64,
    abs_floor: f64,
) -> Result<(f64, f64, usize)> {
    let g = |t: Complex64| ctx.g_unchecked(t) * mult.eval(t) * (t * s).exp();

    // upper and lower straight parts combine into -1/pi int Im G(x + i r0) dx
    let seg =
        integrate_finite_floor(|x: f64| g(Complex64::new(x, r0)).im, lo, hi, rel_tol, abs_floor)?;
    // right end arc (anticlockwise through angle 0) and left end arc (through pi)
    let arc_r = integrate_finite_floor(
        |phi: f64| {
            let e = Complex64::from_polar(1.0, phi);
            g(Complex64::new(hi, 0.0) + e * r0) * e
        },
        -FRAC_PI_2,
        FRAC_PI_2,
        rel_tol,
        abs_floor,
    )?;
    let arc_l = integrate_finite_floor(
        |phi: f64| {
            let e = Complex64::from_polar(1.0, phi);
            g(Complex64::new(lo, 0.0) + e * r0) * e
        },
        FRAC_PI_2,
        3.0 * FRAC_PI_2,
        rel_tol,
        abs_floor,
    )?;

    let arcs = (arc_r.value + arc_l.value) * (r0 / (2.0 * PI));
    let value = -seg.value / PI + arcs.re;
    let err = seg.abs_err / PI + (arc_r.abs_err + arc_l.abs_err) * (r0 / (2.0 * PI)) + arcs.im.abs();
    Ok((value, err, seg.n_evals + arc_r.n_evals + arc_l.n_evals))
}

/// Keyhole around the unbounded cut `(-inf, -start]`: two horizontal rays at
/// height `±r0` plus the right half-circle joining them.
fn keyhole(
    ctx: &IntegrandContext,
    mult: &dyn Multiplier,
    s: f64,
    start: f64,
    r0: f64,
    rel_tol: f64,
    abs_floor: f64,
) -> Result<(f64, f64, usize)> {
    let g = |t: Complex64| ctx.g_unchecked(t) * mult.eval(t) * (t * s).exp();
    let end = -start;

    let rays = integrate_semi_infinite_impl(
        |v: f64| g(Complex64::new(end - v, r0)).im,
        0.0,
        rel_tol,
        abs_floor,
    )?;
    let arc = integrate_finite_floor(
        |phi: f64| {
            let e = Complex64::from_polar(1.0, phi);
            g(Complex64::new(end, 0.0) + e * r0) * e
        },
        -FRAC_PI_2,
        FRAC_PI_2,
        rel_tol,
        abs_floor,
    )?;

    let arc_scaled = arc.value * (r0 / (2.0 * PI));
    let value = -rays.value / PI + arc_scaled.re;
    let err = rays.abs_err / PI + arc.abs_err * (r0 / (2.0 * PI)) + arc_scaled.im.abs();
    Ok((value, err, rays.n_evals + arc.n_evals))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::QuadraticFormSpec;

    fn ctx(pos: &[(f64, u32, f64)]) -> (IntegrandContext, BranchCutLayout) {
        let spec = QuadraticFormSpec::from_triples(pos, &[]).unwrap();
        let layout = spec.branch_layout();
        (IntegrandContext::new(&spec), layout)
    }

    #[test]
    fn single_sqrt_pole_collapses_to_gamma_tail() {
        // I = e^{-s theta} / sqrt(pi s) for a single half-order pole
        let (c, l) = ctx(&[(1.0, 1, 0.0)]);
        let s = 1.7;
        let out = integrate_contour(&c, &l, &Unit, s, 1e-12).unwrap();
        let want = (-s).exp() / (PI * s).sqrt();
        assert!((out.value - want).abs() < 1e-12 * want);
        assert_eq!(out.description, "semi-infinite");
    }

    #[test]
    fn keyhole_matches_collapsed_route() {
        let (c, _) = ctx(&[(1.0, 1, 0.0)]);
        let s = 1.3;
        let (v, _, _) = keyhole(&c, &Unit, s, 1.0, 0.4, 1e-12, 0.0).unwrap();
        let want = (-s).exp() / (PI * s).sqrt();
        assert!((v - want).abs() < 1e-10 * want, "keyhole {v} vs {want}");
    }

    #[test]
    fn hypoexponential_residues() {
        let (c, l) = ctx(&[(1.0, 2, 0.0), (2.0, 2, 0.0)]);
        let s = 0.9;
        let out = integrate_contour(&c, &l, &Unit, s, 1e-12).unwrap();
        let want = (-s).exp() - (-2.0 * s).exp();
        assert!((out.value - want).abs() < 1e-14);
        assert!(out.closed_form_only);
        assert_eq!(out.n_evals, 0);
    }

    #[test]
    fn higher_order_residue() {
        // single theta with n = 6: I = Res (theta+t)^{-3} e^{st} = s^2 e^{-s theta} / 2
        let (c, l) = ctx(&[(1.5, 6, 0.0)]);
        let s = 1.1;
        let out = integrate_contour(&c, &l, &Unit, s, 1e-12).unwrap();
        let want = s * s * (-s * 1.5).exp() / 2.0;
        assert!((out.value - want).abs() < 1e-14 * want.max(1.0));
    }

    #[test]
    fn dogbone_matches_collapsed_segment() {
        let (c, l) = ctx(&[(1.0, 1, 0.0), (2.0, 1, 0.0)]);
        let s = 0.8;
        let collapsed = integrate_contour(&c, &l, &Unit, s, 1e-12).unwrap();
        let (v, _, _) = dogbone(&c, &Unit, s, -2.0, -1.0, 0.3, 1e-12, 0.0).unwrap();
        assert!(
            (v - collapsed.value).abs() < 1e-10 * collapsed.value.abs(),
            "dogbone {v} vs segment {}",
            collapsed.value
        );
    }

    #[test]
    fn circle_route_on_noncentral_cut_matches_central_limit() {
        // weak non-centrality: the circle route must approach the collapsed
        // central value as gamma2 -> 0
        let s = 1.0;
        let (c0, l0) = ctx(&[(1.0, 1, 0.0), (2.0, 1, 0.0), (4.0, 1, 0.0)]);
        let base = integrate_contour(&c0, &l0, &Unit, s, 1e-12).unwrap();
        let (c1, l1) = ctx(&[(1.0, 1, 1e-9), (2.0, 1, 0.0), (4.0, 1, 0.0)]);
        let out = integrate_contour(&c1, &l1, &Unit, s, 1e-11).unwrap();
        assert!(out.description.contains("circle"));
        assert!((out.value - base.value).abs() < 1e-8 * base.value.abs());
    }
}
