//! Named validation suites shared by the `check` command and the acceptance
//! tests, plus the reference closed forms and randomized spec generators they
//! rely on. Every expected value here is either a frozen benchmark number or
//! computed by an independent closed form, never by the code under test.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::difference::{hypoexp_diff_closed_form, pdf_diff, survivor_diff};
use crate::directional::{bingham_const, complex_bingham_const, BinghamParams};
use crate::error::Result;
use crate::inversion::{cdf_with, pdf_with, EvalOptions};
use crate::model::QuadraticFormSpec;
use crate::oracles::{convolve_pdf_diff, imhof_cdf, mc_estimate};

/// One validated case: pass iff `|got - want| <= tol`.
#[derive(Debug, Clone)]
pub struct CaseResult {
    pub name: String,
    pub got: f64,
    pub want: f64,
    pub tol: f64,
    pub seconds: f64,
}

impl CaseResult {
    pub fn pass(&self) -> bool {
        (self.got - self.want).abs() <= self.tol
    }

    pub fn line(&self) -> String {
        format!(
            "{} {}: got {:.9e}, want {:.9e}, |diff| {:.2e} (tol {:.1e}, {:.0} ms)",
            if self.pass() { "PASS" } else { "FAIL" },
            self.name,
            self.got,
            self.want,
            (self.got - self.want).abs(),
            self.tol,
            self.seconds * 1e3,
        )
    }
}

fn case(name: impl Into<String>, got: f64, want: f64, tol: f64, seconds: f64) -> CaseResult {
    CaseResult { name: name.into(), got, want, tol, seconds }
}

/// The three difference benchmark specs, parsed from the frozen fixture
/// files embedded at build time.
pub fn table1_specs() -> Vec<(String, QuadraticFormSpec)> {
    [
        ("row1", include_str!("../../../fixtures/table1_row1.json")),
        ("row2", include_str!("../../../fixtures/table1_row2.json")),
        ("row3", include_str!("../../../fixtures/table1_row3.json")),
    ]
    .into_iter()
    .map(|(name, text)| {
        (
            name.to_string(),
            QuadraticFormSpec::from_json_str(text).expect("embedded fixture must parse"),
        )
    })
    .collect()
}

/// Benchmark survivor values `(s, P(Z > s))` per row.
pub fn table1_targets() -> Vec<Vec<(f64, f64)>> {
    vec![
        vec![(-2.0, 0.9102254), (0.0, 0.4061061), (2.5, 0.0097598)],
        vec![(-2.0, 0.921792), (2.0, 0.4778933), (7.0, 0.0396319)],
        vec![(-3.0, 0.9861469), (0.0, 0.5170232), (4.0, 0.0152041)],
    ]
}

/// Nine tabulated survivor probabilities of the three benchmark differences.
pub fn table1_suite() -> Result<Vec<CaseResult>> {
    let mut out = Vec::new();
    for ((name, spec), targets) in table1_specs().into_iter().zip(table1_targets()) {
        for (s, want) in targets {
            let t0 = std::time::Instant::now();
            let got = survivor_diff(&spec, s)?.value;
            out.push(case(format!("table1 {name} s={s}"), got, want, 1e-6, t0.elapsed().as_secs_f64()));
        }
    }
    Ok(out)
}

/// Regularized chi-square distribution function at half-integer shape,
/// climbed up from the error function; reference closed form.
pub fn chi2_cdf(n: u32, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    let y = 0.5 * x;
    let mut a;
    let mut p;
    if n % 2 == 0 {
        a = 1.0;
        p = 1.0 - (-y).exp();
    } else {
        a = 0.5;
        p = libm::erf(y.sqrt());
    }
    while a + 1.0 <= 0.5 * n as f64 {
        p -= (a * y.ln() - y - libm::lgamma(a + 1.0)).exp();
        a += 1.0;
    }
    p
}

/// Chi-square density; reference closed form.
pub fn chi2_pdf(n: u32, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    let a = 0.5 * n as f64;
    ((a - 1.0) * x.ln() - 0.5 * x - a * std::f64::consts::LN_2 - libm::lgamma(a)).exp()
}

/// Density of a sum of independent exponentials with distinct rates.
pub fn hypoexp_pdf(rates: &[f64], x: f64) -> f64 {
    if x < 0.0 {
        return 0.0;
    }
    let scale: f64 = rates.iter().product();
    let mut sum = 0.0;
    for (i, &ri) in rates.iter().enumerate() {
        let mut denom = 1.0;
        for (j, &rj) in rates.iter().enumerate() {
            if j != i {
                denom *= rj - ri;
            }
        }
        sum += (-ri * x).exp() / denom;
    }
    scale * sum
}

/// Distribution function of the same sum.
pub fn hypoexp_cdf(rates: &[f64], x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    let scale: f64 = rates.iter().product();
    let mut sum = 0.0;
    for (i, &ri) in rates.iter().enumerate() {
        let mut denom = ri;
        for (j, &rj) in rates.iter().enumerate() {
            if j != i {
                denom *= rj - ri;
            }
        }
        sum += (-ri * x).exp() / denom;
    }
    1.0 - scale * sum
}

/// Modified Bessel function of the first kind, order zero; series form.
pub fn bessel_i0(x: f64) -> f64 {
    let q = x * x / 4.0;
    let (mut term, mut sum) = (1.0, 1.0);
    for k in 1..400 {
        term *= q / ((k * k) as f64);
        sum += term;
        if term < 1e-18 * sum {
            break;
        }
    }
    sum
}

/// Closed-form families: scaled chi-squares against the gamma forms,
/// exponential sums against partial fractions, and the pairwise-equal-theta
/// constant against both its analytic value and the doubled-spec route.
pub fn closed_forms_suite() -> Result<Vec<CaseResult>> {
    let tight = EvalOptions { rel_tol: 1e-12 };
    let mut out = Vec::new();

    for n in 1..=8u32 {
        for theta in [0.5, 1.3] {
            let spec = QuadraticFormSpec::from_triples(&[(theta, n, 0.0)], &[])?;
            for s in [0.4, 1.0, 3.1] {
                let t0 = std::time::Instant::now();
                let got = pdf_with(&spec, s, &tight)?.value;
                let want = 2.0 * theta * chi2_pdf(n, 2.0 * theta * s);
                out.push(case(
                    format!("gamma pdf n={n} theta={theta} s={s}"),
                    got,
                    want,
                    1e-10 * want.abs(),
                    t0.elapsed().as_secs_f64(),
                ));
                let t0 = std::time::Instant::now();
                let got = cdf_with(&spec, s, None, &tight)?.value;
                let want = chi2_cdf(n, 2.0 * theta * s);
                out.push(case(
                    format!("gamma cdf n={n} theta={theta} s={s}"),
                    got,
                    want,
                    1e-10 * want.abs(),
                    t0.elapsed().as_secs_f64(),
                ));
            }
        }
    }

    let rate_sets: [&[f64]; 3] = [&[1.0, 2.0], &[0.6, 1.7, 3.2], &[0.5, 1.1, 2.3, 4.9]];
    for rates in rate_sets {
        let terms: Vec<(f64, u32, f64)> = rates.iter().map(|&r| (r, 2, 0.0)).collect();
        let spec = QuadraticFormSpec::from_triples(&terms, &[])?;
        for s in [0.5, 1.5, 4.0] {
            let t0 = std::time::Instant::now();
            let got = pdf_with(&spec, s, &tight)?.value;
            let want = hypoexp_pdf(rates, s);
            out.push(case(
                format!("hypoexp pdf rates={rates:?} s={s}"),
                got,
                want,
                1e-9 * want.abs(),
                t0.elapsed().as_secs_f64(),
            ));
            let t0 = std::time::Instant::now();
            let got = cdf_with(&spec, s, None, &tight)?.value;
            let want = hypoexp_cdf(rates, s);
            out.push(case(
                format!("hypoexp cdf rates={rates:?} s={s}"),
                got,
                want,
                1e-9 * want.abs(),
                t0.elapsed().as_secs_f64(),
            ));
        }
    }

    // difference of exponential sums against the residue closed form
    let diff_spec = QuadraticFormSpec::from_triples(
        &[(0.7, 2, 0.0), (1.9, 2, 0.0)],
        &[(1.3, 2, 0.0), (2.6, 2, 0.0)],
    )?;
    for z in [-1.0, 0.0, 1.4] {
        let t0 = std::time::Instant::now();
        let got = pdf_diff(&diff_spec, z)?.value;
        let want = hypoexp_diff_closed_form(&[0.7, 1.9], &[1.3, 2.6], z)?;
        out.push(case(
            format!("exponential difference z={z}"),
            got,
            want,
            1e-8 * want.abs(),
            t0.elapsed().as_secs_f64(),
        ));
    }

    // pairwise-equal-theta constant: analytic two-rate value and the doubled route
    let t0 = std::time::Instant::now();
    let got = complex_bingham_const(&[1.0, 2.0])?;
    let want = 2.0 * std::f64::consts::PI.powi(2) * ((-1.0_f64).exp() - (-2.0_f64).exp());
    out.push(case("paired-theta constant k=2", got, want, 1e-10 * want, t0.elapsed().as_secs_f64()));
    for theta in [vec![1.0, 2.0], vec![1.0, 2.0, 4.0], vec![0.5, 1.2, 2.0, 3.7]] {
        let t0 = std::time::Instant::now();
        let got = complex_bingham_const(&theta)?;
        let doubled = BinghamParams { theta: theta.clone(), n: vec![2; theta.len()] };
        let want = bingham_const(&doubled)?;
        out.push(case(
            format!("paired-theta vs doubled k={}", theta.len()),
            got,
            want,
            1e-9 * want.abs(),
            t0.elapsed().as_secs_f64(),
        ));
    }

    Ok(out)
}

/// Draw a positive combination with distinct thetas in `[0.3, 6]`, degrees of
/// freedom up to 4 and noncentralities up to `max_delta`.
pub fn random_positive_spec(rng: &mut ChaCha8Rng, max_delta: f64) -> QuadraticFormSpec {
    loop {
        let p = rng.random_range(1..=5);
        let mut terms = Vec::with_capacity(p);
        for _ in 0..p {
            let theta: f64 = rng.random_range(0.3..6.0);
            let n = rng.random_range(1..=4);
            let delta = if rng.random_bool(0.5) { rng.random_range(0.0..max_delta) } else { 0.0 };
            terms.push((theta, n, 2.0 * theta * delta));
        }
        terms.sort_by(|a, b| a.0.total_cmp(&b.0));
        if terms.windows(2).any(|w| w[1].0 - w[0].0 < 0.05) {
            continue;
        }
        return QuadraticFormSpec::from_triples(&terms, &[]).unwrap();
    }
}

/// Draw a two-sided spec with up to three terms a side.
pub fn random_difference_spec(rng: &mut ChaCha8Rng, max_delta: f64) -> QuadraticFormSpec {
    loop {
        let draw = |rng: &mut ChaCha8Rng, count: usize| -> Vec<(f64, u32, f64)> {
            (0..count)
                .map(|_| {
                    let theta: f64 = rng.random_range(0.3..6.0);
                    let n = rng.random_range(1..=4);
                    let delta =
                        if rng.random_bool(0.5) { rng.random_range(0.0..max_delta) } else { 0.0 };
                    (theta, n, 2.0 * theta * delta)
                })
                .collect()
        };
        let n_pos = rng.random_range(1..=3);
        let pos = draw(rng, n_pos);
        let n_neg = rng.random_range(1..=3);
        let neg = draw(rng, n_neg);
        let mut all: Vec<f64> = pos.iter().chain(&neg).map(|t| t.0).collect();
        all.sort_by(f64::total_cmp);
        if all.windows(2).any(|w| w[1] - w[0] < 0.05) {
            continue;
        }
        return QuadraticFormSpec::from_triples(&pos, &neg).unwrap();
    }
}

/// Cross-checks against the independent oracles: the vertical-line inversion
/// on randomized mixed-sign specs, the direct convolution on non-central
/// differences, and a seeded sampling bracket.
pub fn oracles_suite(seed: u64) -> Result<Vec<CaseResult>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();

    for i in 0..30 {
        let spec = random_difference_spec(&mut rng, 6.0);
        let x = spec.mean() + rng.random_range(-2.0..2.0) * spec.std_dev();
        let t0 = std::time::Instant::now();
        let got = crate::difference::cdf_diff(&spec, x, None)?.value;
        let want = imhof_cdf(&spec, x)?;
        out.push(case(
            format!("inversion vs vertical line #{i}"),
            got,
            want,
            1e-6,
            t0.elapsed().as_secs_f64(),
        ));
    }

    for i in 0..4 {
        let sx = random_positive_spec(&mut rng, 4.0);
        let sy = random_positive_spec(&mut rng, 4.0);
        let both = QuadraticFormSpec::new(sx.positive().to_vec(), sy.positive().to_vec())?;
        let z = rng.random_range(0.1..1.5) * both.std_dev();
        let t0 = std::time::Instant::now();
        let got = pdf_diff(&both, z)?.value;
        let want = convolve_pdf_diff(&sx, &sy, z)?;
        out.push(case(
            format!("difference vs convolution #{i}"),
            got,
            want,
            1e-6,
            t0.elapsed().as_secs_f64(),
        ));
    }

    // sampling bracket at a modest sample count; the acceptance suite runs
    // the full-size version
    let spec = random_positive_spec(&mut rng, 3.0);
    let grid = [spec.mean() - spec.std_dev(), spec.mean(), spec.mean() + 2.0 * spec.std_dev()];
    let n_samples = 200_000;
    let mc = mc_estimate(&spec, &grid, n_samples, seed ^ 0x5eed);
    for (i, &x) in grid.iter().enumerate() {
        if x <= 0.0 {
            continue;
        }
        let t0 = std::time::Instant::now();
        let got = crate::inversion::cdf(&spec, x, None)?.value;
        out.push(case(
            format!("sampling bracket x={x:.3}"),
            got,
            mc.cdf[i],
            4.0 * mc.cdf_se[i].max(1e-4),
            t0.elapsed().as_secs_f64(),
        ));
    }

    Ok(out)
}
