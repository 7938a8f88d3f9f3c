//! Acceptance suite: one test per criterion, each printing a PASS line with
//! the achieved worst-case error. Expected values come from frozen benchmark
//! numbers, independent closed forms, or independent oracles — never from
//! the code paths under test.

use chiquad::checks::{
    self, bessel_i0, chi2_cdf, chi2_pdf, hypoexp_cdf, hypoexp_pdf, random_difference_spec,
    random_positive_spec,
};
use chiquad::difference::{cdf_diff, pdf_diff};
use chiquad::directional::{
    bingham_const, complex_bingham_const, fisher_so3_const, fisher_so3_grad, kent_const,
    kent_const_with_radius, BinghamParams, KentParams,
};
use chiquad::inversion::{
    cdf, multiplicity_lift, pdf, pdf_central_simple, pdf_general_contour, EvalOptions,
};
use chiquad::model::QuadraticFormSpec;
use chiquad::oracles::{convolve_pdf_diff, imhof_cdf, mc_estimate};
use chiquad::quad::integrate_finite;
use chiquad::spa::{spa_cdf_via_pdf, spa_pdf, CgfContext};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn spec(pos: &[(f64, u32, f64)], neg: &[(f64, u32, f64)]) -> QuadraticFormSpec {
    QuadraticFormSpec::from_triples(pos, neg).unwrap()
}

fn theta1_spec() -> QuadraticFormSpec {
    // three simple central components with coefficients 0.6, 0.3, 0.1
    spec(
        &[
            (1.0 / 1.2, 1, 0.0),
            (1.0 / 0.6, 1, 0.0),
            (5.0, 1, 0.0),
        ],
        &[],
    )
}

#[test]
fn criterion_1_difference_benchmark_reproduction() {
    let cases = checks::table1_suite().unwrap();
    assert_eq!(cases.len(), 9);
    let mut worst = 0.0_f64;
    for c in &cases {
        assert!(c.pass(), "{}", c.line());
        assert!(c.seconds < 1.0, "evaluation took {:.3}s", c.seconds);
        worst = worst.max((c.got - c.want).abs());
    }
    println!("criterion 1 PASS: nine benchmark survivor values, worst |diff| {worst:.2e} <= 1e-6, all < 1 s");
}

#[test]
fn criterion_2_closed_form_families() {
    let t0 = std::time::Instant::now();
    let tight = EvalOptions { rel_tol: 1e-12 };

    let mut worst_gamma = 0.0_f64;
    for n in 1..=8u32 {
        for theta in [0.5, 1.3] {
            let sp = spec(&[(theta, n, 0.0)], &[]);
            for s in [0.4, 1.0, 3.1] {
                let got = chiquad::inversion::pdf_with(&sp, s, &tight).unwrap().value;
                let want = 2.0 * theta * chi2_pdf(n, 2.0 * theta * s);
                let rel = (got - want).abs() / want.abs();
                assert!(rel <= 1e-10, "pdf n={n} theta={theta} s={s}: rel {rel:.2e}");
                worst_gamma = worst_gamma.max(rel);
                let got = chiquad::inversion::cdf_with(&sp, s, None, &tight).unwrap().value;
                let want = chi2_cdf(n, 2.0 * theta * s);
                let rel = (got - want).abs() / want.abs();
                assert!(rel <= 1e-10, "cdf n={n} theta={theta} s={s}: rel {rel:.2e}");
                worst_gamma = worst_gamma.max(rel);
            }
        }
    }

    let mut worst_hypo = 0.0_f64;
    let rate_sets: [&[f64]; 3] = [&[1.0, 2.0], &[0.6, 1.7, 3.2], &[0.5, 1.1, 2.3, 4.9]];
    for rates in rate_sets {
        let terms: Vec<(f64, u32, f64)> = rates.iter().map(|&r| (r, 2, 0.0)).collect();
        let sp = spec(&terms, &[]);
        for s in [0.5, 1.5, 4.0] {
            let got = chiquad::inversion::pdf_with(&sp, s, &tight).unwrap().value;
            let rel = (got - hypoexp_pdf(rates, s)).abs() / hypoexp_pdf(rates, s);
            assert!(rel <= 1e-9, "hypoexp pdf {rates:?} s={s}: rel {rel:.2e}");
            worst_hypo = worst_hypo.max(rel);
            let got = chiquad::inversion::cdf_with(&sp, s, None, &tight).unwrap().value;
            let rel = (got - hypoexp_cdf(rates, s)).abs() / hypoexp_cdf(rates, s);
            assert!(rel <= 1e-9, "hypoexp cdf {rates:?} s={s}: rel {rel:.2e}");
            worst_hypo = worst_hypo.max(rel);
        }
    }

    let secs = t0.elapsed().as_secs_f64();
    assert!(secs < 5.0, "closed-form suite took {secs:.2}s");
    println!(
        "criterion 2 PASS: gamma family worst rel {worst_gamma:.2e} <= 1e-10, \
         exponential sums worst rel {worst_hypo:.2e} <= 1e-9, {secs:.2}s < 5s"
    );
}

#[test]
fn criterion_3_route_equivalence() {
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    let mut worst = 0.0_f64;
    for _ in 0..20 {
        // random central simple-multiplicity spec with up to six components
        let p = rng.random_range(2..=6);
        let mut thetas: Vec<f64>;
        loop {
            thetas = (0..p).map(|_| rng.random_range(0.3..6.0)).collect();
            thetas.sort_by(f64::total_cmp);
            if thetas.windows(2).all(|w| w[1] - w[0] > 0.1) {
                break;
            }
        }
        let terms: Vec<(f64, u32, f64)> = thetas.iter().map(|&t| (t, 1, 0.0)).collect();
        let sp = spec(&terms, &[]);
        for frac in [0.5, 1.0, 2.0] {
            let s = frac * sp.mean();
            let a = pdf_central_simple(&sp, s).unwrap().value;
            let b = pdf_general_contour(&sp, s).unwrap().value;
            let rel = (a - b).abs() / a.abs();
            assert!(rel <= 1e-9, "{thetas:?} at {s}: rel {rel:.2e}");
            worst = worst.max(rel);
        }
    }

    let mut worst_cb = 0.0_f64;
    for theta in [vec![1.0, 2.0], vec![0.7, 1.9, 3.4], vec![0.5, 1.2, 2.0, 3.7]] {
        let a = complex_bingham_const(&theta).unwrap();
        let b = bingham_const(&BinghamParams { theta: theta.clone(), n: vec![2; theta.len()] })
            .unwrap();
        let rel = (a - b).abs() / b.abs();
        assert!(rel <= 1e-9, "k={}: rel {rel:.2e}", theta.len());
        worst_cb = worst_cb.max(rel);
    }
    println!(
        "criterion 3 PASS: central-simple vs general worst rel {worst:.2e} <= 1e-9 on 20 specs, \
         paired-theta vs doubled worst rel {worst_cb:.2e} <= 1e-9 for k = 2,3,4"
    );
}

#[test]
fn criterion_4_identity_suite() {
    // distribution-function pole-shift invariance
    let sp = spec(&[(0.8, 1, 0.5), (2.0, 3, 0.0), (3.0, 2, 1.0)], &[]);
    let x = 1.3;
    let vals: Vec<f64> =
        [0.25, 1.0, 4.0].iter().map(|&t0| cdf(&sp, x, Some(t0)).unwrap().value).collect();
    let mut worst_t0 = 0.0_f64;
    for i in 0..vals.len() {
        for j in i + 1..vals.len() {
            worst_t0 = worst_t0.max((vals[i] - vals[j]).abs() / vals[i].abs());
        }
    }
    assert!(worst_t0 < 1e-7, "pole-shift invariance broke: {vals:?}");

    // rescale-and-shift identity at random parameters
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    let mut worst_shift = 0.0_f64;
    for _ in 0..10 {
        let sp = random_positive_spec(&mut rng, 4.0);
        let s = rng.random_range(0.3..2.5) * sp.mean();
        let c = rng.random_range(-1.0..0.9) * sp.min_theta();
        let direct = pdf(&sp, s).unwrap().value;
        let (shifted, pref) = sp.rescale_shift(s, c).unwrap();
        let via = pref * pdf(&shifted, 1.0).unwrap().value;
        let rel = (direct - via).abs() / direct.abs();
        assert!(rel < 1e-8, "s={s} c={c}: rel {rel:.2e}");
        worst_shift = worst_shift.max(rel);
    }

    // multiplicity raise against central finite differences of the transform
    let base = spec(&[(1.0, 1, 0.0), (2.0, 1, 0.0), (3.5, 1, 0.0)], &[]);
    let s = 1.2;
    let h = 1e-4;
    let kappa_of = |th: f64| th.sqrt() * 2.0_f64.sqrt() * 3.5_f64.sqrt();
    let i_of = |th: f64| {
        let sp = spec(&[(th, 1, 0.0), (2.0, 1, 0.0), (3.5, 1, 0.0)], &[]);
        pdf(&sp, s).unwrap().value / kappa_of(th)
    };
    let fd = (i_of(1.0 + h) - i_of(1.0 - h)) / (2.0 * h);
    let lifted = multiplicity_lift(&base, 0).unwrap().pdf(s).unwrap().value;
    // f_{n+2} = kappa * theta_j * (-2/n_j) * dI/dtheta_j
    let via_fd = kappa_of(1.0) * 1.0 * (-2.0) * fd;
    let rel_fd = (lifted - via_fd).abs() / lifted.abs();
    assert!(rel_fd < 1e-5, "lift vs finite difference: rel {rel_fd:.2e}");

    // coalescing-pair continuity: nearly equal endpoints against the merged
    // order-one pole closed form
    let eps = 1e-6;
    let near = spec(&[(1.0, 1, 0.0), (1.0 + eps, 1, 0.0), (3.0, 1, 0.0)], &[]);
    let merged = spec(&[(1.0, 2, 0.0), (3.0, 1, 0.0)], &[]);
    let mut worst_pair = 0.0_f64;
    for s in [0.7, 1.0, 2.0] {
        let a = pdf(&near, s).unwrap().value;
        let b = pdf(&merged, s).unwrap().value;
        let rel = (a - b).abs() / b.abs();
        assert!(rel < 1e-4, "s={s}: rel {rel:.2e}");
        worst_pair = worst_pair.max(rel);
    }

    println!(
        "criterion 4 PASS: pole-shift invariance {worst_t0:.2e} < 1e-7, rescale identity \
         {worst_shift:.2e} < 1e-8, raise vs finite differences {rel_fd:.2e} < 1e-5, \
         coalescing-pair continuity {worst_pair:.2e} < 1e-4"
    );
}

#[test]
fn criterion_5_oracle_suite() {
    // vertical-line oracle on 30 randomized mixed-sign specs
    let mut rng = ChaCha8Rng::seed_from_u64(505);
    let mut worst_im = 0.0_f64;
    for i in 0..30 {
        let sp = random_difference_spec(&mut rng, 6.0);
        let x = sp.mean() + rng.random_range(-2.0..2.0) * sp.std_dev();
        let got = cdf_diff(&sp, x, None).unwrap().value;
        let want = imhof_cdf(&sp, x).unwrap();
        let diff = (got - want).abs();
        assert!(diff <= 1e-6, "spec #{i}: |diff| {diff:.2e}");
        worst_im = worst_im.max(diff);
    }

    // direct convolution on non-central differences
    let mut worst_conv = 0.0_f64;
    for _ in 0..4 {
        let sx = random_positive_spec(&mut rng, 4.0);
        let sy = random_positive_spec(&mut rng, 4.0);
        let both =
            QuadraticFormSpec::new(sx.positive().to_vec(), sy.positive().to_vec()).unwrap();
        let z = rng.random_range(0.1..1.5) * both.std_dev();
        let got = pdf_diff(&both, z).unwrap().value;
        let want = convolve_pdf_diff(&sx, &sy, z).unwrap();
        let diff = (got - want).abs();
        assert!(diff <= 1e-6, "|diff| {diff:.2e}");
        worst_conv = worst_conv.max(diff);
    }

    // full-size seeded sampling bracket
    let sp = spec(
        &[(1.0 / 0.7, 6, 2.0 / 0.7 * 6.0 / 2.0), (1.0 / 0.3, 2, 2.0 / 0.3)],
        &[(1.0 / 0.7, 1, 2.0 / 0.7 * 6.0 / 2.0), (1.0 / 0.3, 1, 2.0 / 0.3)],
    );
    let grid = [-2.0, 0.5, 2.0, 5.0, 7.0];
    let mc = mc_estimate(&sp, &grid, 10_000_000, 31415);
    let mut worst_sigma = 0.0_f64;
    for (i, &x) in grid.iter().enumerate() {
        let got = cdf_diff(&sp, x, None).unwrap().value;
        let sigmas = (got - mc.cdf[i]).abs() / mc.cdf_se[i];
        assert!(sigmas <= 4.0, "x={x}: {sigmas:.2} standard errors");
        worst_sigma = worst_sigma.max(sigmas);
    }

    println!(
        "criterion 5 PASS: vertical-line worst |diff| {worst_im:.2e} <= 1e-6 on 30 specs, \
         convolution worst |diff| {worst_conv:.2e} <= 1e-6, sampling bracket worst \
         {worst_sigma:.2} standard errors <= 4 at 1e7 samples"
    );
}

fn one_sided_mass(sp: &QuadraticFormSpec) -> f64 {
    let hi = (sp.mean().max(0.0) + 40.0 * sp.std_dev()).max(2.0);
    let split = 1.0_f64.min(0.25 * hi);
    let head = integrate_finite(
        |v: f64| 2.0 * v * pdf_diff(sp, v * v).unwrap().value,
        0.0,
        split.sqrt(),
        1e-8,
    )
    .unwrap()
    .value;
    let tail = integrate_finite(|z: f64| pdf_diff(sp, z).unwrap().value, split, hi, 1e-8)
        .unwrap()
        .value;
    head + tail
}

#[test]
fn criterion_6_normalization() {
    let mut rng = ChaCha8Rng::seed_from_u64(606);
    let mut worst = 0.0_f64;
    for i in 0..20 {
        let sp = random_positive_spec(&mut rng, 5.0);
        let mass = one_sided_mass(&sp);
        let diff = (mass - 1.0).abs();
        assert!(diff < 1e-6, "positive spec #{i}: mass {mass}");
        worst = worst.max(diff);
    }
    for i in 0..10 {
        let sp = random_difference_spec(&mut rng, 5.0);
        let mass = one_sided_mass(&sp) + one_sided_mass(&sp.swapped().unwrap());
        let diff = (mass - 1.0).abs();
        assert!(diff < 1e-6, "difference spec #{i}: mass {mass}");
        worst = worst.max(diff);
    }
    println!("criterion 6 PASS: total mass within {worst:.2e} of 1 on 20 positive and 10 difference specs");
}

#[test]
fn criterion_7_directional_constants() {
    // circle constant against the Bessel identity
    let got = bingham_const(&BinghamParams::simple(&[0.0, 2.0])).unwrap();
    let want = 2.0 * std::f64::consts::PI * (-1.0_f64).exp() * bessel_i0(1.0);
    let bessel_rel = (got - want).abs() / want;
    assert!(bessel_rel < 1e-8, "circle constant rel {bessel_rel:.2e}");

    // two-sphere constant against direct quadrature (azimuth reduced to a
    // Bessel factor, polar angle integrated numerically)
    let mut worst_kent = 0.0_f64;
    for beta in [0.5_f64, 1.0, 2.0] {
        for kappa in [0.5_f64, 1.0, 2.0] {
            let alpha: f64 = 2.0 * beta;
            let oracle = 2.0
                * std::f64::consts::PI
                * (-alpha).exp()
                * integrate_finite(
                    |c: f64| (kappa * c).exp() * bessel_i0(alpha * (1.0 - c * c)),
                    -1.0,
                    1.0,
                    1e-12,
                )
                .unwrap()
                .value;
            let got = kent_const(&KentParams { beta, kappa }).unwrap();
            let rel = (got - oracle).abs() / oracle;
            assert!(rel < 1e-6, "beta={beta} kappa={kappa}: rel {rel:.2e}");
            worst_kent = worst_kent.max(rel);
        }
    }

    // contour-deformation invariance of the circle piece
    let p = KentParams { beta: 1.0, kappa: 2.0 };
    let alpha = 2.0 * p.beta;
    let a = kent_const_with_radius(&p, 0.6 * alpha).unwrap();
    let b = kent_const_with_radius(&p, 0.9 * alpha).unwrap();
    let deform_rel = (a - b).abs() / a.abs();
    assert!(deform_rel < 1e-8, "radius deformation rel {deform_rel:.2e}");

    // rotation-group gradient: exactly zero at the origin, finite differences
    // elsewhere
    let g0 = fisher_so3_grad(&[0.0; 3]).unwrap();
    let worst_g0 = g0.iter().fold(0.0_f64, |m, &v| m.max(v.abs()));
    assert!(worst_g0 < 1e-8, "gradient at zero: {g0:?}");
    let phi = [0.4, -0.3, 0.8];
    let g = fisher_so3_grad(&phi).unwrap();
    let h = 1e-5;
    let mut worst_fd = 0.0_f64;
    for i in 0..3 {
        let mut hi = phi;
        let mut lo = phi;
        hi[i] += h;
        lo[i] -= h;
        let fd = (fisher_so3_const(&hi).unwrap().ln() - fisher_so3_const(&lo).unwrap().ln())
            / (2.0 * h);
        let rel = (g[i] - fd).abs() / fd.abs().max(1.0);
        assert!(rel < 1e-5, "component {i}: {} vs {fd}", g[i]);
        worst_fd = worst_fd.max(rel);
    }

    println!(
        "criterion 7 PASS: circle Bessel value rel {bessel_rel:.2e} < 1e-8, two-sphere constant \
         worst rel {worst_kent:.2e} < 1e-6 over 9 parameter pairs, deformation {deform_rel:.2e} \
         < 1e-8, gradient at origin {worst_g0:.2e} < 1e-8 with finite-difference agreement \
         {worst_fd:.2e} < 1e-5"
    );
}

#[test]
fn criterion_8_saddlepoint_quality() {
    // the analytic overshoot ratio of the unnormalized approximation on the
    // exponential family
    let exp1 = spec(&[(1.0, 2, 0.0)], &[]);
    let ctx = CgfContext::new(&exp1);
    let ratio = std::f64::consts::E / (2.0 * std::f64::consts::PI).sqrt();
    let mut worst_ratio = 0.0_f64;
    for s in [0.3, 1.0, 2.7, 6.0] {
        let got = spa_pdf(&ctx, s).unwrap() / (-s).exp();
        worst_ratio = worst_ratio.max((got / ratio - 1.0).abs());
    }
    assert!(worst_ratio < 1e-10, "ratio drift {worst_ratio:.2e}");

    // percentile grid of the three-component benchmark spec
    let sp = theta1_spec();
    let quantile = |p: f64| -> f64 {
        let (mut lo, mut hi) = (1e-9, sp.mean() + 40.0 * sp.std_dev());
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if cdf(&sp, mid, None).unwrap().value < p {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    };
    let (q05, q95) = (quantile(0.05), quantile(0.95));
    let ctx = CgfContext::new(&sp);
    let mut worst_pdf = 0.0_f64;
    let mut worst_cdf = 0.0_f64;
    let n_pts = 25;
    for k in 0..n_pts {
        let s = q05 + (q95 - q05) * k as f64 / (n_pts - 1) as f64;
        let exact_pdf = pdf(&sp, s).unwrap().value;
        let approx_pdf = spa_pdf(&ctx, s).unwrap();
        worst_pdf = worst_pdf.max((approx_pdf / exact_pdf - 1.0).abs());
        let exact_cdf = cdf(&sp, s, None).unwrap().value;
        let approx_cdf = spa_cdf_via_pdf(&sp, s, None).unwrap();
        worst_cdf = worst_cdf.max((approx_cdf / exact_cdf - 1.0).abs());
    }
    assert!(worst_pdf < 0.05, "density approximation worst rel {worst_pdf:.3}");
    assert!(worst_cdf < 0.05, "distribution approximation worst rel {worst_cdf:.3}");

    println!(
        "criterion 8 PASS: exponential ratio reproduced within {worst_ratio:.2e}, density \
         approximation worst rel {worst_pdf:.4} and distribution-via-density worst rel \
         {worst_cdf:.4} < 5% over the 5th-95th percentile grid"
    );
}
