//! Independent ground-truth generators for tests and the `check` command.
//!
//! These deliberately share nothing with the contour machinery: the
//! distribution oracle integrates the oscillatory real reduction of the
//! inversion integral along the un-deformed vertical line, and the Monte
//! Carlo oracle samples the defining normal vectors directly. Agreement
//! between the two worlds is evidence, not circularity.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::inversion::pdf;
use crate::model::{ChiSquareTerm, QuadraticFormSpec};
use crate::quad::{integrate_finite, integrate_finite_floor};

struct ImhofTerm {
    lambda: f64,
    n: f64,
    delta: f64,
}

fn imhof_terms(spec: &QuadraticFormSpec) -> Vec<ImhofTerm> {
    let mut v = Vec::new();
    for t in spec.positive() {
        v.push(ImhofTerm { lambda: t.lambda(), n: t.n as f64, delta: t.delta() });
    }
    for t in spec.negative() {
        v.push(ImhofTerm { lambda: -t.lambda(), n: t.n as f64, delta: t.delta() });
    }
    v
}

/// `P(X <= x)` by adaptive truncation of the vertical-line inversion reduced
/// to a real oscillatory integral:
/// `P(X > x) = 1/2 + (1/pi) int_0^inf sin(theta(u)) / (u rho(u)) du`.
pub fn imhof_cdf(spec: &QuadraticFormSpec, x: f64) -> Result<f64> {
    Ok(1.0 - imhof_survivor(spec, x)?)
}

/// `P(X > x)`, same integral without the final complement.
pub fn imhof_survivor(spec: &QuadraticFormSpec, x: f64) -> Result<f64> {
    let terms = imhof_terms(spec);
    let phase = |u: f64| -> f64 {
        let mut acc = -0.5 * x * u;
        for t in &terms {
            let lu = t.lambda * u;
            acc += 0.5 * (t.n * lu.atan() + t.delta * lu / (1.0 + lu * lu));
        }
        acc
    };
    let inv_rho = |u: f64| -> f64 {
        let mut log_rho = 0.0;
        for t in &terms {
            let l2u2 = t.lambda * t.lambda * u * u;
            log_rho += 0.25 * t.n * (1.0 + l2u2).ln();
            log_rho += 0.5 * t.delta * l2u2 / (1.0 + l2u2);
        }
        (-log_rho).exp()
    };
    let f = |u: f64| phase(u).sin() * inv_rho(u) / u;

    // frequency scale of the phase sets the chunk length
    let mean: f64 = terms.iter().map(|t| t.lambda * (t.n + t.delta)).sum();
    let omega = (0.5 * x.abs()).max(0.25 * (mean - x).abs()).max(0.25);
    let chunk0 = std::f64::consts::PI / omega;

    // envelope bound used for truncation: 1/rho <= prod |lambda u|^{-n/2}
    let q: f64 = terms.iter().map(|t| 0.5 * t.n).sum();
    let log_lam: f64 = terms.iter().map(|t| 0.5 * t.n * t.lambda.abs().ln()).sum();
    let tail_bound = |u: f64| (-q * u.ln() - log_lam).exp() / q;

    // asymptotic half period of the sine; infinite when x = 0, in which case
    // the integrand stops oscillating and geometric chunks alone suffice
    let half_period = 2.0 * std::f64::consts::PI / x.abs().max(1e-300);

    let mut total = 0.0;
    let mut lo = 0.0;
    let mut width = chunk0;
    for _ in 0..220 {
        if width > 0.5 * half_period {
            // decay is too slow to truncate before the oscillation outgrows
            // the chunks: switch to half-period lobes with series acceleration
            let (tail, tail_err) = alternating_lobe_tail(&f, lo, half_period)?;
            if tail_err > 1e-8 {
                return Err(Error::NoConvergence(format!(
                    "oscillatory tail acceleration stalled at {tail_err:.3e}"
                )));
            }
            return Ok(0.5 + (total + tail) / std::f64::consts::PI);
        }
        let hi = lo + width;
        // the absolute floor keeps far-tail chunks, whose value is pure
        // oscillatory cancellation, from chasing an unreachable relative goal
        let chunk = integrate_finite_floor(f, lo, hi, 1e-11, 2e-13)?;
        total += chunk.value;
        if tail_bound(hi) < 5e-10 && chunk.value.abs() < 1e-10 {
            return Ok(0.5 + total / std::f64::consts::PI);
        }
        lo = hi;
        width *= 1.3;
    }
    Err(Error::NoConvergence(
        "oscillatory inversion integral did not truncate".into(),
    ))
}

/// Limit of `int_lo^inf f` for an eventually sign-alternating integrand:
/// integrate one half-period lobe at a time and accelerate the partial sums
/// by iterated averaging.
fn alternating_lobe_tail(
    f: &impl Fn(f64) -> f64,
    lo: f64,
    half_period: f64,
) -> Result<(f64, f64)> {
    let mut partials: Vec<f64> = Vec::new();
    let mut acc = 0.0;
    let mut last_est = f64::NAN;
    for k in 0..96u32 {
        let a = lo + k as f64 * half_period;
        let chunk = integrate_finite_floor(f, a, a + half_period, 1e-11, 2e-13)?;
        acc += chunk.value;
        partials.push(acc);
        if partials.len() >= 8 {
            let mut row = partials.clone();
            while row.len() > 1 {
                for j in 0..row.len() - 1 {
                    row[j] = 0.5 * (row[j] + row[j + 1]);
                }
                row.pop();
            }
            let est = row[0];
            let change = (est - last_est).abs();
            last_est = est;
            if change < 5e-11 {
                return Ok((est, change + 1e-12));
            }
        }
    }
    Ok((last_est, f64::INFINITY))
}

/// Empirical distribution and density estimates with binomial standard
/// errors, from seeded sampling of the defining normal vectors.
#[derive(Debug, Clone)]
pub struct McEstimate {
    pub x: Vec<f64>,
    pub cdf: Vec<f64>,
    pub cdf_se: Vec<f64>,
    pub pdf: Vec<f64>,
    pub pdf_se: Vec<f64>,
    pub n_samples: u64,
    /// Half-width of the counting window behind the density estimates.
    pub pdf_halfwidth: f64,
}

/// Sample `X - Y` as sums of squared normals, `n_i` coordinates per term
/// with per-coordinate mean `gamma/(2 theta sqrt(n_i))` and variance
/// `1/(2 theta)`. The same seed gives bitwise-identical estimates.
pub fn mc_estimate(
    spec: &QuadraticFormSpec,
    x_grid: &[f64],
    n_samples: u64,
    seed: u64,
) -> McEstimate {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let half = 0.5 * spec.std_dev().max(1e-3) * (n_samples as f64).powf(-0.2);

    struct Coord {
        sd: f64,
        mean: f64,
        negate: bool,
    }
    let mut coords = Vec::new();
    let mut push_terms = |terms: &[ChiSquareTerm], negate: bool| {
        for t in terms {
            let sd = (2.0 * t.theta).sqrt().recip();
            let mean = t.gamma2.sqrt() / (2.0 * t.theta * (t.n as f64).sqrt());
            for _ in 0..t.n {
                coords.push(Coord { sd, mean, negate });
            }
        }
    };
    push_terms(spec.positive(), false);
    push_terms(spec.negative(), true);

    let mut below = vec![0u64; x_grid.len()];
    let mut window = vec![0u64; x_grid.len()];
    for _ in 0..n_samples {
        let mut sample = 0.0;
        for c in &coords {
            let z: f64 = rng.sample(StandardNormal);
            let y = c.mean + c.sd * z;
            if c.negate {
                sample -= y * y;
            } else {
                sample += y * y;
            }
        }
        for (i, &x) in x_grid.iter().enumerate() {
            if sample <= x {
                below[i] += 1;
            }
            if (sample - x).abs() <= half {
                window[i] += 1;
            }
        }
    }

    let n = n_samples as f64;
    let binom_se = |p: f64| (p * (1.0 - p) / n).sqrt();
    let cdf: Vec<f64> = below.iter().map(|&c| c as f64 / n).collect();
    let cdf_se = cdf.iter().map(|&p| binom_se(p)).collect();
    let pw: Vec<f64> = window.iter().map(|&c| c as f64 / n).collect();
    let pdf = pw.iter().map(|&p| p / (2.0 * half)).collect();
    let pdf_se = pw.iter().map(|&p| binom_se(p) / (2.0 * half)).collect();

    McEstimate {
        x: x_grid.to_vec(),
        cdf,
        cdf_se,
        pdf,
        pdf_se,
        n_samples,
        pdf_halfwidth: half,
    }
}

/// Density of `X - Y` at `z` by direct convolution
/// `int_0^inf f_X(y + z) f_Y(y) dy` of the one-sided densities.
pub fn convolve_pdf_diff(
    spec_x: &QuadraticFormSpec,
    spec_y: &QuadraticFormSpec,
    z: f64,
) -> Result<f64> {
    if !spec_x.is_positive_combination() || !spec_y.is_positive_combination() {
        return Err(Error::NotAPositiveCombination);
    }
    if z < 0.0 {
        return convolve_pdf_diff(spec_y, spec_x, -z);
    }
    let f_x = |t: f64| pdf(spec_x, t).map(|r| r.value);
    let f_y = |t: f64| pdf(spec_y, t).map(|r| r.value);

    let upper = (spec_y.mean() + 40.0 * spec_y.std_dev())
        .min(spec_x.mean() + 40.0 * spec_x.std_dev() + 1.0);
    // substitution y = v^2 removes the possible integrable singularity at 0
    let split = upper.min(1.0);
    let inner = |y: f64| -> f64 {
        match (f_x(y + z), f_y(y)) {
            (Ok(a), Ok(b)) => a * b,
            _ => f64::NAN,
        }
    };
    let head = integrate_finite(|v: f64| 2.0 * v * inner(v * v), 0.0, split.sqrt(), 1e-9)?;
    let mut value = head.value;
    if upper > split {
        value += integrate_finite(inner, split, upper, 1e-9)?.value;
    }
    Ok(value)
}
