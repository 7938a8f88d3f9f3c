//! Normalizing constants of directional distributions, driven by the density
//! machinery: the constant of `exp(sum -theta_i x_i^2 + gamma_i x_i)` on a
//! sphere is a fixed multiple of the matching combination's density at 1, so
//! every contour route built for densities evaluates sphere constants too.
//! Thetas of any sign are shifted so the working spec stays well conditioned.

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::inversion::{fb_norm_from_pdf, multiplicity_lift, pdf};
use crate::model::QuadraticFormSpec;
use crate::quad::{integrate_circle, integrate_finite, integrate_semi_infinite, CircleRoute};

/// Parameters of the antipodally symmetric quadratic exponential family on
/// the sphere `S^{sum n_i - 1}`: density proportional to
/// `exp(-sum theta_i |x_(i)|^2)` over coordinate blocks of sizes `n_i`.
#[derive(Debug, Clone)]
pub struct BinghamParams {
    pub theta: Vec<f64>,
    pub n: Vec<u32>,
}

impl BinghamParams {
    pub fn simple(theta: &[f64]) -> Self {
        Self { theta: theta.to_vec(), n: vec![1; theta.len()] }
    }
}

/// Shift all thetas so the smallest becomes 1 and return the working spec
/// plus the factor `e^{-c}` restoring the original constant.
fn shifted_spec(theta: &[f64], n: &[u32]) -> Result<(QuadraticFormSpec, f64)> {
    if theta.len() != n.len() || theta.is_empty() {
        return Err(Error::InvalidSpec("theta and n must be equal-length, non-empty".into()));
    }
    let c = theta.iter().cloned().fold(f64::INFINITY, f64::min) - 1.0;
    let terms: Result<Vec<_>> = theta
        .iter()
        .zip(n)
        .map(|(&t, &k)| crate::model::ChiSquareTerm::central(t - c, k))
        .collect();
    Ok((QuadraticFormSpec::positive_only(terms?)?, (-c).exp()))
}

/// Normalizing constant of the Bingham-type density; any real thetas.
pub fn bingham_const(params: &BinghamParams) -> Result<f64> {
    let total_n: u32 = params.n.iter().sum();
    if total_n < 2 {
        return Err(Error::InvalidSpec("need at least a one-dimensional sphere".into()));
    }
    let (spec, restore) = shifted_spec(&params.theta, &params.n)?;
    let terms = spec.positive();
    if terms.len() == 3 && terms.iter().all(|t| t.n == 1) {
        let th = [terms[0].theta, terms[1].theta, terms[2].theta];
        return Ok(restore * bingham_c3(th)?);
    }
    if terms.len() == 4 && terms.iter().all(|t| t.n == 1) {
        let th = [terms[0].theta, terms[1].theta, terms[2].theta, terms[3].theta];
        return Ok(restore * bingham_c4(th)?);
    }
    Ok(restore * bingham_generic(&spec)?)
}

/// The generic route through the density at 1, without the explicit
/// low-dimension shortcuts; exposed for route-equivalence checks.
pub fn bingham_const_generic(params: &BinghamParams) -> Result<f64> {
    let (spec, restore) = shifted_spec(&params.theta, &params.n)?;
    Ok(restore * bingham_generic(&spec)?)
}

fn bingham_generic(spec: &QuadraticFormSpec) -> Result<f64> {
    let theta: Vec<f64> = spec.positive().iter().map(|t| t.theta).collect();
    let n: Vec<u32> = spec.positive().iter().map(|t| t.n).collect();
    let gamma = vec![0.0; theta.len()];
    fb_norm_from_pdf(&theta, &gamma, &n)
}

/// Three distinct unit multiplicities: one elementary cut plus the tail.
fn bingham_c3(th: [f64; 3]) -> Result<f64> {
    let [t1, t2, t3] = th;
    let cut = integrate_finite(
        |u: f64| {
            let sn2 = u.sin().powi(2);
            let tau = t1 + (t2 - t1) * sn2;
            (-(t2 - t1) * sn2).exp() / (t3 - tau).sqrt()
        },
        0.0,
        std::f64::consts::FRAC_PI_2,
        1e-12,
    )?;
    let tail = integrate_semi_infinite(
        |u: f64| {
            let v = u * u;
            (-v).exp() / ((t3 - t1 + v) * (t3 - t2 + v)).sqrt()
        },
        0.0,
        1e-12,
    )?;
    Ok(4.0 * PI.sqrt() * ((-t1).exp() * cut.value - (-t3).exp() * tail.value))
}

/// Four distinct unit multiplicities: two elementary cuts with opposite signs.
fn bingham_c4(th: [f64; 4]) -> Result<f64> {
    let [t1, t2, t3, t4] = th;
    let cut = |a: f64, b: f64, o1: f64, o2: f64| {
        integrate_finite(
            |u: f64| {
                let sn2 = u.sin().powi(2);
                let tau = a + (b - a) * sn2;
                (-(b - a) * sn2).exp() / ((o1 - tau) * (o2 - tau)).abs().sqrt()
            },
            0.0,
            std::f64::consts::FRAC_PI_2,
            1e-12,
        )
    };
    let first = cut(t1, t2, t3, t4)?;
    let second = cut(t3, t4, t1, t2)?;
    Ok(4.0 * PI * ((-t1).exp() * first.value - (-t3).exp() * second.value))
}

fn fisher_theta_star(phi: &[f64; 3]) -> [f64; 4] {
    [
        0.0,
        2.0 * (phi[1] + phi[2]),
        2.0 * (phi[0] + phi[2]),
        2.0 * (phi[0] + phi[1]),
    ]
}

/// `int exp(tr(Phi R)) dR` over the rotation group with the measure inherited
/// from the unit quaternion sphere (total mass `pi^2`), for diagonal `Phi`.
/// Writing `tr(Phi R)` as a quadratic form in the quaternion coordinates
/// gives `exp(phi1+phi2+phi3)/2` times the Bingham constant at
/// `theta = (0, 2(phi2+phi3), 2(phi1+phi3), 2(phi1+phi2))`.
pub fn fisher_so3_const(phi: &[f64; 3]) -> Result<f64> {
    let c = bingham_const(&BinghamParams::simple(&fisher_theta_star(phi)))?;
    Ok(0.5 * (phi.iter().sum::<f64>()).exp() * c)
}

/// [`fisher_so3_const`] divided by its value at zero, i.e. against the
/// normalized Haar measure.
pub fn fisher_so3_const_normalized(phi: &[f64; 3]) -> Result<f64> {
    Ok(fisher_so3_const(phi)? / (PI * PI))
}

/// Gradient of `log fisher_so3_const` in `phi`, via analytic derivatives of
/// the underlying constant: each `phi_i` enters two of the four thetas with
/// weight 2, and `d log C / d theta_j` comes from the multiplicity-raised
/// density (no finite differences anywhere).
pub fn fisher_so3_grad(phi: &[f64; 3]) -> Result<[f64; 3]> {
    let theta_star = fisher_theta_star(phi);
    let (spec, _) = shifted_spec(&theta_star, &[1; 4])?;
    let f = pdf(&spec, 1.0)?.value;

    // d log C / d theta_star_j, attributed per original coordinate through
    // the merged term containing it
    let mut dlog = [0.0_f64; 4];
    let c_shift = theta_star.iter().cloned().fold(f64::INFINITY, f64::min) - 1.0;
    for (j, &tj) in theta_star.iter().enumerate() {
        let w = tj - c_shift;
        let m = spec
            .positive()
            .iter()
            .position(|t| (t.theta - w).abs() <= 1e-9 * w.abs().max(1.0))
            .expect("shifted coordinate must land in a merged term");
        let lifted = multiplicity_lift(&spec, m)?.pdf(1.0)?.value;
        dlog[j] = -(1.0 / (2.0 * spec.positive()[m].theta)) * lifted / f;
    }

    Ok([
        1.0 + 2.0 * (dlog[2] + dlog[3]),
        1.0 + 2.0 * (dlog[1] + dlog[3]),
        1.0 + 2.0 * (dlog[1] + dlog[2]),
    ])
}

/// Closed-form constant for pairwise-equal thetas (the complex sphere case):
/// with `k` distinct values of multiplicity two each, every pole is simple
/// and the residues give `2 pi^k sum_r e^{-theta_r} / prod_{i != r}
/// (theta_i - theta_r)`.
pub fn complex_bingham_const(theta: &[f64]) -> Result<f64> {
    let k = theta.len();
    if k == 0 {
        return Err(Error::EmptyPositiveList);
    }
    for (i, &a) in theta.iter().enumerate() {
        for &b in &theta[i + 1..] {
            if (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1.0) {
                return Err(Error::DuplicateRates(format!("theta {a} repeated")));
            }
        }
    }
    let mut sum = 0.0;
    for (r, &tr) in theta.iter().enumerate() {
        let mut denom = 1.0;
        for (i, &ti) in theta.iter().enumerate() {
            if i != r {
                denom *= ti - tr;
            }
        }
        sum += (-tr).exp() / denom;
    }
    Ok(2.0 * PI.powi(k as i32) * sum)
}

/// Parameters of the one-linear-term family on the two-sphere with equally
/// spaced thetas `(0, 2 beta, 4 beta)` and mean-direction weight `kappa` on
/// the middle coordinate.
#[derive(Debug, Clone, Copy)]
pub struct KentParams {
    /// Ovalness; the theta spacing is `alpha = 2 beta`.
    pub beta: f64,
    /// Concentration along the mean axis.
    pub kappa: f64,
}

/// Normalizing constant, assembled from one circle around the finite cut
/// (the non-central endpoint forbids collapsing it) and the collapsed tail:
///
/// `C = 2 pi^{3/2} Re[(1/2 pi i) closed-circle integral of g e^t]
///      - 4 sqrt(pi) e^{-2 alpha} int_0^inf exp(-u^2 - kappa^2/(4(alpha+u^2)))
///        / sqrt((alpha+u^2)(2 alpha+u^2)) du`.
pub fn kent_const(params: &KentParams) -> Result<f64> {
    kent_const_with_radius(params, 1.5 * params.beta)
}

/// Same with an explicit circle radius in `(alpha/2, alpha)`; results are
/// radius-independent by contour deformation, which makes a good self-check.
pub fn kent_const_with_radius(params: &KentParams, radius: f64) -> Result<f64> {
    let KentParams { beta, kappa } = *params;
    if !(beta > 0.0) || !(kappa >= 0.0) {
        return Err(Error::InvalidSpec(format!(
            "need beta > 0 and kappa >= 0, got beta={beta} kappa={kappa}"
        )));
    }
    let alpha = 2.0 * beta;
    if !(radius > 0.5 * alpha && radius < alpha) {
        return Err(Error::InvalidSpec(format!(
            "circle radius {radius} outside (alpha/2, alpha) = ({}, {alpha})",
            0.5 * alpha
        )));
    }
    let g2 = kappa * kappa;
    let g = move |t: Complex64| -> Complex64 {
        let e = (t + ((t + alpha) * 4.0).inv() * g2).exp();
        e / (t.sqrt() * (t + alpha).sqrt() * (t + 2.0 * alpha).sqrt())
    };
    let circle = integrate_circle(g, -0.5 * alpha, radius, 1e-12, CircleRoute::ResidueNormalized)?;
    let tail = integrate_semi_infinite(
        |u: f64| {
            let v = u * u;
            (-v - g2 / (4.0 * (alpha + v))).exp() / ((alpha + v) * (2.0 * alpha + v)).sqrt()
        },
        0.0,
        1e-12,
    )?;
    Ok(2.0 * PI.powf(1.5) * circle.value.re - 4.0 * PI.sqrt() * (-2.0 * alpha).exp() * tail.value)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bessel_i0(x: f64) -> f64 {
        let q = x * x / 4.0;
        let (mut term, mut sum) = (1.0, 1.0);
        for k in 1..200 {
            term *= q / ((k * k) as f64);
            sum += term;
            if term < 1e-18 * sum {
                break;
            }
        }
        sum
    }

    #[test]
    fn constant_integrand_on_s2() {
        let c = bingham_const(&BinghamParams::simple(&[2.0, 2.0, 2.0])).unwrap();
        let want = 4.0 * PI * (-2.0_f64).exp();
        assert!((c - want).abs() < 1e-9 * want, "{c} vs {want}");
    }

    #[test]
    fn circle_constant_matches_bessel() {
        // S^1 with thetas (0, 2): 2 pi e^{-1} I0(1)
        let c = bingham_const(&BinghamParams::simple(&[0.0, 2.0])).unwrap();
        let want = 2.0 * PI * (-1.0_f64).exp() * bessel_i0(1.0);
        assert!((c - want).abs() < 1e-8 * want, "{c} vs {want}");
    }

    #[test]
    fn explicit_low_dimension_paths_match_generic() {
        let p3 = BinghamParams::simple(&[1.0, 2.0, 3.0]);
        let a3 = bingham_const(&p3).unwrap();
        let b3 = bingham_const_generic(&p3).unwrap();
        assert!((a3 - b3).abs() < 1e-9 * a3.abs());

        let p4 = BinghamParams::simple(&[1.0, 2.0, 3.0, 4.0]);
        let a4 = bingham_const(&p4).unwrap();
        let b4 = bingham_const_generic(&p4).unwrap();
        assert!((a4 - b4).abs() < 1e-9 * a4.abs(), "{a4} vs {b4}");
    }

    #[test]
    fn shift_and_permutation_invariance() {
        let base = BinghamParams::simple(&[0.4, 1.9, 3.3]);
        let c = bingham_const(&base).unwrap();
        for shift in [-2.0, 0.7, 5.0] {
            let shifted = BinghamParams::simple(&[0.4 + shift, 1.9 + shift, 3.3 + shift]);
            let cs = bingham_const(&shifted).unwrap();
            assert!(
                (cs - (-shift_f(shift)).exp() * c).abs() < 1e-9 * c,
                "shift {shift}"
            );
        }
        let perm = BinghamParams::simple(&[3.3, 0.4, 1.9]);
        let cp = bingham_const(&perm).unwrap();
        assert!((cp - c).abs() < 1e-12 * c);

        fn shift_f(s: f64) -> f64 {
            s
        }
    }

    #[test]
    fn monotone_decreasing_in_each_theta() {
        let c0 = bingham_const(&BinghamParams::simple(&[0.5, 1.5, 2.5])).unwrap();
        for j in 0..3 {
            let mut th = [0.5, 1.5, 2.5];
            th[j] += 0.05;
            let c1 = bingham_const(&BinghamParams::simple(&th)).unwrap();
            assert!(c1 < c0, "raising theta_{j} must lower the constant");
        }
    }

    #[test]
    fn complex_two_rate_value() {
        let c = complex_bingham_const(&[1.0, 2.0]).unwrap();
        let want = 2.0 * PI * PI * ((-1.0_f64).exp() - (-2.0_f64).exp());
        assert!((c - want).abs() < 1e-12 * want, "{c} vs {want}");
    }

    #[test]
    fn complex_degenerate_limit_is_sphere_volume() {
        let c = complex_bingham_const(&[0.0, 1e-6]).unwrap();
        let want = 2.0 * PI * PI;
        assert!((c - want).abs() < 1e-5 * want);
    }

    #[test]
    fn complex_matches_doubled_bingham() {
        for theta in [vec![1.0, 2.0], vec![1.0, 2.0, 4.0], vec![0.5, 1.2, 2.0, 3.7]] {
            let cb = complex_bingham_const(&theta).unwrap();
            let doubled = BinghamParams { theta: theta.clone(), n: vec![2; theta.len()] };
            let b = bingham_const(&doubled).unwrap();
            assert!((cb - b).abs() < 1e-9 * b.abs(), "{theta:?}: {cb} vs {b}");
        }
    }

    #[test]
    fn complex_positive_for_random_inputs() {
        use rand::Rng;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let k = rng.random_range(2..=6);
            let mut th: Vec<f64> = (0..k).map(|_| rng.random_range(0.0..8.0)).collect();
            th.sort_by(f64::total_cmp);
            if th.windows(2).any(|w| w[1] - w[0] < 1e-3) {
                continue;
            }
            let c = complex_bingham_const(&th).unwrap();
            assert!(c > 0.0, "{th:?} gave {c}");
        }
    }

    #[test]
    fn complex_rejects_duplicates() {
        assert!(matches!(
            complex_bingham_const(&[1.0, 1.0]),
            Err(Error::DuplicateRates(_))
        ));
    }

    #[test]
    fn kent_reduces_to_bingham_at_zero_kappa() {
        for beta in [0.5, 1.0, 2.0] {
            let k = kent_const(&KentParams { beta, kappa: 0.0 }).unwrap();
            let alpha = 2.0 * beta;
            let b = bingham_const(&BinghamParams::simple(&[0.0, alpha, 2.0 * alpha])).unwrap();
            assert!((k - b).abs() < 1e-8 * b.abs(), "beta={beta}: {k} vs {b}");
        }
    }

    #[test]
    fn kent_radius_deformation_invariance() {
        let p = KentParams { beta: 1.0, kappa: 2.0 };
        let alpha = 2.0 * p.beta;
        let a = kent_const_with_radius(&p, 0.6 * alpha).unwrap();
        let b = kent_const_with_radius(&p, 0.9 * alpha).unwrap();
        assert!((a - b).abs() < 1e-8 * a.abs(), "{a} vs {b}");
    }

    #[test]
    fn kent_matches_direct_sphere_quadrature() {
        // collapse the azimuth analytically: C = 2 pi e^{-alpha}
        // int_{-1}^{1} e^{kappa c} I0(alpha (1 - c^2)) dc
        let p = KentParams { beta: 1.0, kappa: 2.0 };
        let alpha = 2.0 * p.beta;
        let oracle = 2.0
            * PI
            * (-alpha).exp()
            * integrate_finite(
                |c: f64| (p.kappa * c).exp() * bessel_i0(alpha * (1.0 - c * c)),
                -1.0,
                1.0,
                1e-12,
            )
            .unwrap()
            .value;
        let got = kent_const(&p).unwrap();
        assert!((got - oracle).abs() < 1e-6 * oracle, "{got} vs {oracle}");
    }

    #[test]
    fn kent_rejects_inadmissible_radius() {
        let p = KentParams { beta: 1.0, kappa: 1.0 };
        assert!(kent_const_with_radius(&p, 0.4 * 2.0).is_err());
        assert!(kent_const_with_radius(&p, 1.1 * 2.0).is_err());
    }

    #[test]
    fn fisher_value_and_gradient_at_zero() {
        let c = fisher_so3_const(&[0.0; 3]).unwrap();
        assert!((c - PI * PI).abs() < 1e-9 * c, "{c}");
        assert!((fisher_so3_const_normalized(&[0.0; 3]).unwrap() - 1.0).abs() < 1e-9);
        let g = fisher_so3_grad(&[0.0; 3]).unwrap();
        for gi in g {
            assert!(gi.abs() < 1e-8, "{g:?}");
        }
    }

    #[test]
    fn fisher_gradient_matches_finite_differences() {
        let phi = [0.3, -0.2, 0.7];
        let g = fisher_so3_grad(&phi).unwrap();
        let h = 1e-5;
        for i in 0..3 {
            let mut hi = phi;
            let mut lo = phi;
            hi[i] += h;
            lo[i] -= h;
            let fd = (fisher_so3_const(&hi).unwrap().ln() - fisher_so3_const(&lo).unwrap().ln())
                / (2.0 * h);
            assert!(
                (g[i] - fd).abs() < 1e-5 * fd.abs().max(1.0),
                "i={i}: {} vs {fd}",
                g[i]
            );
        }
    }
}
