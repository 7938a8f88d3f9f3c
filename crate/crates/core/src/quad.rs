//! Quadrature primitives every contour reduces to: globally adaptive
//! Gauss-Kronrod on finite intervals, a truncated semi-infinite rule for
//! Gaussian-decay integrands, and the periodic trapezoid rule on circles
//! (spectrally accurate for integrands analytic in an annulus).

use num_complex::Complex64;
use num_traits::Zero;
use std::collections::BinaryHeap;
use std::ops::{Add, Mul, Sub};

use crate::error::{Error, Result};

/// Default per-piece relative tolerance.
pub const DEFAULT_REL_TOL: f64 = 1e-10;

const MAX_LEVELS: u32 = 20;
const MAX_EVALS: usize = 1_000_000;

/// Value types the adaptive rules can integrate.
pub trait QuadValue:
    Copy + Zero + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self>
{
    fn qnorm(self) -> f64;
    fn qfinite(self) -> bool;
}

impl QuadValue for f64 {
    fn qnorm(self) -> f64 {
        self.abs()
    }
    fn qfinite(self) -> bool {
        self.is_finite()
    }
}

impl QuadValue for Complex64 {
    fn qnorm(self) -> f64 {
        self.norm()
    }
    fn qfinite(self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }
}

#[derive(Debug, Clone, Copy)]
pub struct QuadratureResult<V> {
    pub value: V,
    /// Error estimate, not a bound.
    pub abs_err: f64,
    pub n_evals: usize,
}

// 15-point Kronrod abscissae (positive half) with the embedded 7-point Gauss
// rule, standard QUADPACK values.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_2,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

struct PanelResult<V> {
    value: V,
    err: f64,
    /// Roundoff floor of this panel; once `err` sits at the floor further
    /// subdivision is waste.
    floor: f64,
}

/// One Gauss-Kronrod 15(7) panel with the QUADPACK error rescaling.
fn gk15<V: QuadValue>(f: &impl Fn(f64) -> V, a: f64, b: f64) -> Result<PanelResult<V>> {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);

    let mut res_kronrod = fc * WGK[7];
    let mut res_gauss = fc * WG[3];
    let mut res_abs = fc.qnorm() * WGK[7];

    let mut values = [V::zero(); 14];
    for (j, &x) in XGK.iter().take(7).enumerate() {
        let dx = half * x;
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        values[2 * j] = f1;
        values[2 * j + 1] = f2;
        let sum = f1 + f2;
        res_kronrod = res_kronrod + sum * WGK[j];
        res_abs += (f1.qnorm() + f2.qnorm()) * WGK[j];
        if j % 2 == 1 {
            // odd Kronrod indices carry the embedded Gauss nodes
            res_gauss = res_gauss + sum * WG[j / 2];
        }
    }

    if !res_kronrod.qfinite() {
        return Err(Error::NoConvergence(
            "non-finite integrand value in finite-interval rule".into(),
        ));
    }

    let mean = res_kronrod * 0.5;
    let mut res_asc = (fc - mean).qnorm() * WGK[7];
    for (j, v) in values.iter().enumerate() {
        res_asc += (*v - mean).qnorm() * WGK[j / 2];
    }
    res_asc *= half.abs();
    res_abs *= half.abs();

    let value = res_kronrod * half;
    let mut err = ((res_kronrod - res_gauss) * half).qnorm();
    if res_asc != 0.0 && err != 0.0 {
        err = res_asc * 1.0_f64.min((200.0 * err / res_asc).powf(1.5));
    }
    let mut floor = 0.0;
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        floor = 50.0 * f64::EPSILON * res_abs;
        if floor > err {
            err = floor;
        }
    }
    Ok(PanelResult { value, err, floor })
}

struct Segment {
    a: f64,
    b: f64,
    err: f64,
    level: u32,
    index: usize,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.err.total_cmp(&other.err)
    }
}

/// Globally adaptive integration of `f` over `[a, b]`.
///
/// Endpoint singularities must be removed by the caller via a substitution;
/// the rule never evaluates exactly at `a` or `b` but convergence degrades
/// badly on integrable singularities.
pub fn integrate_finite<V: QuadValue>(
    f: impl Fn(f64) -> V,
    a: f64,
    b: f64,
    rel_tol: f64,
) -> Result<QuadratureResult<V>> {
    integrate_finite_floor(f, a, b, rel_tol, 0.0)
}

/// [`integrate_finite`] with an additional absolute-error floor, for pieces
/// whose own value is negligible against the scale of a larger sum.
pub(crate) fn integrate_finite_floor<V: QuadValue>(
    f: impl Fn(f64) -> V,
    a: f64,
    b: f64,
    rel_tol: f64,
    abs_floor: f64,
) -> Result<QuadratureResult<V>> {
    if !(a < b) {
        return Err(Error::InvalidSpec(format!(
            "integration bounds must satisfy a < b, got [{a}, {b}]"
        )));
    }
    let first = gk15(&f, a, b)?;
    let mut n_evals = 15usize;
    let mut values = vec![first.value];
    let mut heap = BinaryHeap::new();
    let mut total_err = first.err;
    // panels whose estimate sits at the roundoff floor are spent: splitting
    // them shuffles rounding noise around without reducing the estimate
    if first.err > 2.0 * first.floor {
        heap.push(Segment { a, b, err: first.err, level: 0, index: 0 });
    }

    loop {
        let total: V = values.iter().copied().fold(V::zero(), Add::add);
        let target = rel_tol * total.qnorm() + abs_floor + 1e-305;
        if total_err <= target {
            return Ok(QuadratureResult { value: total, abs_err: total_err, n_evals });
        }
        let Some(worst) = heap.pop() else {
            // every panel is at its floor: this is the honest best
            return Ok(QuadratureResult { value: total, abs_err: total_err, n_evals });
        };
        if worst.level >= MAX_LEVELS || n_evals + 30 > MAX_EVALS {
            return Err(Error::NoConvergence(format!(
                "finite-interval rule stalled at err {total_err:.3e} (target {target:.3e})"
            )));
        }
        let mid = 0.5 * (worst.a + worst.b);
        let left = gk15(&f, worst.a, mid)?;
        let right = gk15(&f, mid, worst.b)?;
        n_evals += 30;
        total_err += left.err + right.err - worst.err;
        values[worst.index] = left.value;
        values.push(right.value);
        if left.err > 2.0 * left.floor {
            heap.push(Segment {
                a: worst.a,
                b: mid,
                err: left.err,
                level: worst.level + 1,
                index: worst.index,
            });
        }
        if right.err > 2.0 * right.floor {
            heap.push(Segment {
                a: mid,
                b: worst.b,
                err: right.err,
                level: worst.level + 1,
                index: values.len() - 1,
            });
        }
    }
}

/// Integration of `f` over `[a, inf)` for integrands with (at least
/// eventually) rapid decay. Successive chunks of geometrically growing width
/// are integrated adaptively until they stop contributing.
pub fn integrate_semi_infinite(
    f: impl Fn(f64) -> f64,
    a: f64,
    rel_tol: f64,
) -> Result<QuadratureResult<f64>> {
    integrate_semi_infinite_impl(f, a, rel_tol, 0.0)
}

pub(crate) fn integrate_semi_infinite_impl<V: QuadValue>(
    f: impl Fn(f64) -> V,
    a: f64,
    rel_tol: f64,
    abs_floor: f64,
) -> Result<QuadratureResult<V>> {
    let mut total = V::zero();
    let mut err = 0.0;
    let mut n_evals = 0usize;
    let mut lo = a;
    let mut width = 1.0;
    let mut quiet_chunks = 0;
    for _ in 0..120 {
        let hi = lo + width;
        let chunk = integrate_finite_floor(&f, lo, hi, rel_tol, abs_floor)?;
        total = total + chunk.value;
        err += chunk.abs_err;
        n_evals += chunk.n_evals;
        let scale = total.qnorm() + abs_floor / rel_tol.max(1e-300) + 1e-300;
        if chunk.value.qnorm() <= 0.25 * rel_tol * scale && f(hi).qnorm() * width <= rel_tol * scale
        {
            quiet_chunks += 1;
            if quiet_chunks >= 2 {
                return Ok(QuadratureResult { value: total, abs_err: err, n_evals });
            }
        } else {
            quiet_chunks = 0;
        }
        lo = hi;
        width *= 2.0;
    }
    Err(Error::NoConvergence(
        "semi-infinite integrand did not decay within the truncation budget".into(),
    ))
}

/// Whether [`integrate_circle`] divides out the `2*pi*i` of the residue
/// theorem or returns the raw line integral.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CircleRoute {
    ResidueNormalized,
    Raw,
}

/// Contour integral of `f` over the circle `|t - center| = radius`
/// (anticlockwise), by the doubling periodic trapezoid rule.
///
/// Requires `f` analytic in an annulus around the circle; singularities must
/// lie strictly inside or outside.
pub fn integrate_circle(
    f: impl Fn(Complex64) -> Complex64,
    center: f64,
    radius: f64,
    rel_tol: f64,
    route: CircleRoute,
) -> Result<QuadratureResult<Complex64>> {
    integrate_circle_floor(f, center, radius, rel_tol, 0.0, route)
}

pub(crate) fn integrate_circle_floor(
    f: impl Fn(Complex64) -> Complex64,
    center: f64,
    radius: f64,
    rel_tol: f64,
    abs_floor: f64,
    route: CircleRoute,
) -> Result<QuadratureResult<Complex64>> {
    if !(radius > 0.0) {
        return Err(Error::InvalidSpec(format!("circle radius must be positive, got {radius}")));
    }
    let c = Complex64::new(center, 0.0);
    let eval_at = |u: f64| -> Complex64 {
        let e = Complex64::from_polar(1.0, u);
        // f(t) * dt/du with dt = i r e^{iu} du
        f(c + e * radius) * e * Complex64::new(0.0, radius)
    };

    let mut n = 64usize;
    let mut sum = Complex64::zero();
    let mut sum_abs = 0.0;
    for k in 0..n {
        let v = eval_at(2.0 * std::f64::consts::PI * k as f64 / n as f64);
        sum += v;
        sum_abs += v.norm();
    }
    let mut n_evals = n;
    let mut value = sum * (2.0 * std::f64::consts::PI / n as f64);
    if !value.qfinite() {
        return Err(Error::NoConvergence("non-finite integrand value on circle".into()));
    }

    loop {
        // refine with the midpoints; the trapezoid sum at 2N reuses all N points
        for k in 0..n {
            let v = eval_at(std::f64::consts::PI * (2 * k + 1) as f64 / n as f64);
            sum += v;
            sum_abs += v.norm();
        }
        n_evals += n;
        n *= 2;
        let next = sum * (2.0 * std::f64::consts::PI / n as f64);
        let err = (next - value).qnorm();
        value = next;
        if !value.qfinite() {
            return Err(Error::NoConvergence("non-finite integrand value on circle".into()));
        }
        // the roundoff floor of the trapezoid sum caps what refinement can achieve
        let floor = 50.0 * f64::EPSILON * sum_abs * (2.0 * std::f64::consts::PI / n as f64);
        let raw_floor = match route {
            CircleRoute::Raw => abs_floor,
            CircleRoute::ResidueNormalized => abs_floor * (2.0 * std::f64::consts::PI),
        };
        if err <= rel_tol * value.qnorm() + floor + raw_floor + 1e-305 {
            let (value, err) = match route {
                CircleRoute::Raw => (value, err),
                CircleRoute::ResidueNormalized => {
                    let tau = Complex64::new(0.0, 2.0 * std::f64::consts::PI);
                    (value / tau, err / (2.0 * std::f64::consts::PI))
                }
            };
            return Ok(QuadratureResult { value, abs_err: err, n_evals });
        }
        if n > (1 << 17) {
            return Err(Error::NoConvergence(format!(
                "circle rule stalled at err {err:.3e} with {n} nodes"
            )));
        }
    }
}
