//! Analytic constants, densities, and series of the CTBP limit theory.
//!
//! Everything here is computable without randomness: the Malthusian rate
//! `lambda(s) = Gamma(1 + 1/s)^s`, the stable-age (Gamma) density with
//! mean `beta1 = 1/(s*lambda)` and standard deviation
//! `beta2 = 1/(lambda*sqrt(s))`, the j-fold convolution densities of the
//! intensity measure, and the generation-weighted intensity density
//! `p_a(u)`.

use crate::quad::adaptive_simpson;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum LimitsError {
    #[error("disorder exponent must be positive and finite, got {0}")]
    BadDisorder(f64),
    #[error("gamma function domain is 0 < x <= 170, got {0}")]
    GammaDomain(f64),
    #[error("stable-age density diverges at t = 0 for s > 1")]
    DensityAtZero,
    #[error("series for p_a(u) did not reach tolerance within {0} terms")]
    SeriesNonConvergence(usize),
}

/// The disorder exponent `s` of the edge weights `E^s`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Disorder {
    s: f64,
}

impl Disorder {
    pub fn new(s: f64) -> Result<Self, LimitsError> {
        if !s.is_finite() || s <= 0.0 {
            return Err(LimitsError::BadDisorder(s));
        }
        Ok(Disorder { s })
    }

    #[inline]
    pub fn s(&self) -> f64 {
        self.s
    }

    /// `1/s`, the exponent appearing in cumulative hazards.
    #[inline]
    pub fn inv_s(&self) -> f64 {
        1.0 / self.s
    }

    /// `p = 1/s - 1`, the exponent of the two-vertex characteristic.
    #[inline]
    pub fn p(&self) -> f64 {
        1.0 / self.s - 1.0
    }
}

/// Limiting parameters of the CTBP: the Malthusian rate and the mean and
/// standard deviation of the stable-age distribution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LimitConstants {
    pub lambda: f64,
    pub beta1: f64,
    pub beta2: f64,
}

// Lanczos approximation, g = 7, 9 coefficients (as used by GSL / Boost).
const LANCZOS_G: f64 = 7.0;
const LANCZOS_P: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

fn lanczos_sum(x: f64) -> f64 {
    let mut acc = LANCZOS_P[0];
    for (i, p) in LANCZOS_P.iter().enumerate().skip(1) {
        acc += p / (x + i as f64);
    }
    acc
}

/// Gamma function on `0 < x <= 170` via the Lanczos approximation.
pub fn gamma_fn(x: f64) -> Result<f64, LimitsError> {
    if !x.is_finite() || x <= 0.0 || x > 170.0 {
        return Err(LimitsError::GammaDomain(x));
    }
    if x < 0.5 {
        // Reflection keeps the series argument in the accurate range.
        let v = std::f64::consts::PI
            / ((std::f64::consts::PI * x).sin() * gamma_fn(1.0 - x)?);
        return Ok(v);
    }
    let z = x - 1.0;
    let t = z + LANCZOS_G + 0.5;
    // Split the power so the intermediate stays finite up to x = 170.
    let half = t.powf(0.5 * (z + 0.5));
    Ok((2.0 * std::f64::consts::PI).sqrt() * half * (-t).exp() * half * lanczos_sum(z))
}

/// `ln Gamma(x)` for any `x > 0`; used for log-space Gamma-ratio terms
/// where `Gamma` itself would overflow.
pub fn ln_gamma(x: f64) -> f64 {
    assert!(x > 0.0 && x.is_finite(), "ln_gamma domain: x > 0, got {x}");
    if x < 0.5 {
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let z = x - 1.0;
    let t = z + LANCZOS_G + 0.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (z + 0.5) * t.ln() - t + lanczos_sum(z).ln()
}

/// The Malthusian rate `lambda = Gamma(1 + 1/s)^s` and the stable-age
/// mean/sd derived from it.
pub fn malthusian(d: Disorder) -> LimitConstants {
    let s = d.s();
    let lambda = gamma_fn(1.0 + 1.0 / s)
        .expect("1 + 1/s is always in the gamma domain for valid Disorder")
        .powf(s);
    LimitConstants {
        lambda,
        beta1: 1.0 / (s * lambda),
        beta2: 1.0 / (lambda * s.sqrt()),
    }
}

/// Residual of the defining relation of the Malthusian rate,
/// `integral_0^inf e^{-lambda t^s} dt = 1`, evaluated by quadrature.
///
/// For `s >= 1` the integrand is integrated directly in `t`; for `s < 1`
/// the substitution `y = t^s` removes the heavy tail.
pub fn malthusian_quadrature_residual(d: Disorder) -> f64 {
    let s = d.s();
    let lambda = malthusian(d).lambda;
    let integral = if s >= 1.0 {
        let t_max = (45.0 / lambda).powf(1.0 / s);
        adaptive_simpson(|t| (-lambda * t.powf(s)).exp(), 0.0, t_max, 1e-10)
    } else {
        // y = t^s, dt = (1/s) y^{1/s - 1} dy; the exponent is positive.
        let y_max = 45.0 / lambda;
        adaptive_simpson(
            |y| (-lambda * y).exp() * y.powf(1.0 / s - 1.0) / s,
            0.0,
            y_max,
            1e-10,
        )
    };
    integral - 1.0
}

/// Density of the stable-age distribution,
/// `f(t) = lambda^{1/s} / Gamma(1/s) * e^{-lambda t} * t^{1/s - 1}`.
pub fn stable_age_density(d: Disorder, t: f64) -> Result<f64, LimitsError> {
    let s = d.s();
    if t < 0.0 || !t.is_finite() {
        return Err(LimitsError::DensityAtZero);
    }
    if t == 0.0 && s > 1.0 {
        return Err(LimitsError::DensityAtZero);
    }
    let lambda = malthusian(d).lambda;
    let inv_s = 1.0 / s;
    if t == 0.0 {
        // Only reachable for s <= 1; at s = 1 the density is lambda.
        if s == 1.0 {
            return Ok(lambda);
        }
        return Ok(0.0);
    }
    let log_f = inv_s * lambda.ln() - ln_gamma(inv_s) - lambda * t + (inv_s - 1.0) * t.ln();
    Ok(log_f.exp())
}

/// Quadrature moments of the stable-age density: `(mass, mean, variance)`.
///
/// The substitution `t = y^s` turns the integrand into a smooth function
/// for every `s > 0`, removing the `t^{1/s-1}` endpoint singularity.
pub fn stable_age_quadrature_moments(d: Disorder) -> (f64, f64, f64) {
    let s = d.s();
    let lambda = malthusian(d).lambda;
    let inv_s = 1.0 / s;
    let c = (inv_s * lambda.ln() - ln_gamma(inv_s)).exp();
    // f(y^s) * s * y^{s-1} = c * s * e^{-lambda y^s}
    let y_max = (45.0 / lambda).powf(inv_s);
    let weighted = |k: u32| {
        adaptive_simpson(
            |y: f64| c * s * (-lambda * y.powf(s)).exp() * y.powf(s * k as f64),
            0.0,
            y_max,
            1e-12,
        )
    };
    let mass = weighted(0);
    let mean = weighted(1);
    let second = weighted(2);
    (mass, mean, second - mean * mean)
}

/// Density at `u` of the j-fold convolution of the intensity measure,
/// `u^{j/s - 1} * lambda^{j/s} / Gamma(j/s)`, evaluated in log space.
pub fn convolution_density(d: Disorder, j: u32, u: f64) -> Result<f64, LimitsError> {
    if j == 0 || u <= 0.0 || !u.is_finite() {
        return Err(LimitsError::GammaDomain(u));
    }
    let lambda = malthusian(d).lambda;
    let a = j as f64 / d.s();
    let log_v = (a - 1.0) * u.ln() + a * lambda.ln() - ln_gamma(a);
    Ok(log_v.exp())
}

/// The density `p_a(u)` of the exponentially tilted generation-weighted
/// intensity measure:
/// `p_a(u) = e^{-lambda a^s u} * sum_{j>=1} a^j u^{j/s-1} lambda^{j/s} / Gamma(j/s)`.
///
/// The series is truncated once terms are past their peak and the next
/// term falls below `tol` times the partial sum.
pub fn tilde_mu_density(d: Disorder, a: f64, u: f64, tol: f64) -> Result<f64, LimitsError> {
    const MAX_TERMS: usize = 100_000;
    if u <= 0.0 || a < 0.0 || tol <= 0.0 {
        return Err(LimitsError::GammaDomain(u));
    }
    if a == 0.0 {
        return Ok(0.0);
    }
    let s = d.s();
    let lambda = malthusian(d).lambda;
    let ln_a = a.ln();
    let ln_u = u.ln();
    let ln_lambda = lambda.ln();
    let mut sum = 0.0_f64;
    let mut prev_term = f64::NEG_INFINITY;
    let mut decreasing = false;
    for j in 1..=MAX_TERMS {
        let jf = j as f64;
        let js = jf / s;
        let ln_term = jf * ln_a + (js - 1.0) * ln_u + js * ln_lambda - ln_gamma(js);
        let term = ln_term.exp();
        sum += term;
        if term < prev_term {
            decreasing = true;
        }
        if decreasing && term < tol * sum {
            let prefactor = (-lambda * a.powf(s) * u).exp();
            return Ok(prefactor * sum);
        }
        prev_term = term;
    }
    Err(LimitsError::SeriesNonConvergence(MAX_TERMS))
}

#[cfg(test)]
mod tests {
    use super::*;

    const SQRT_PI: f64 = 1.772_453_850_905_516;

    #[test]
    fn disorder_rejects_bad_values() {
        assert!(Disorder::new(0.0).is_err());
        assert!(Disorder::new(-1.0).is_err());
        assert!(Disorder::new(f64::NAN).is_err());
        assert!(Disorder::new(f64::INFINITY).is_err());
        assert_eq!(Disorder::new(2.0).unwrap().p(), -0.5);
    }

    #[test]
    fn gamma_known_values() {
        // References from a 30-digit evaluation.
        let cases = [
            (1.0, 1.0),
            (0.5, SQRT_PI),
            (5.0, 24.0),
            (1.5, 0.886_226_925_452_758_0),
            (10.25, 639_232.598_779_576_8),
            (20.5, 5.406_242_982_335_075e17),
            (30.0, 8.841_761_993_739_702e30),
            (0.1, 9.513_507_698_668_731),
        ];
        for (x, want) in cases {
            let got = gamma_fn(x).unwrap();
            assert!(
                ((got - want) / want).abs() < 1e-13,
                "gamma({x}) = {got}, want {want}"
            );
        }
    }

    #[test]
    fn gamma_domain_errors() {
        assert!(gamma_fn(0.0).is_err());
        assert!(gamma_fn(-3.0).is_err());
        assert!(gamma_fn(171.0).is_err());
        assert!(gamma_fn(f64::NAN).is_err());
    }

    #[test]
    fn ln_gamma_matches_gamma() {
        for x in [0.25, 0.5, 1.0, 3.7, 42.0, 169.5] {
            let lg = ln_gamma(x);
            let g = gamma_fn(x).unwrap();
            assert!((lg - g.ln()).abs() < 1e-12 * lg.abs().max(1.0), "x = {x}");
        }
        // Gamma(169.5) ~ 3.2815e303; log reference from mpmath.
        assert!((gamma_fn(169.5).unwrap() / 3.281_470_451_067_846e303 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn malthusian_closed_forms() {
        let lc1 = malthusian(Disorder::new(1.0).unwrap());
        assert!((lc1.lambda - 1.0).abs() < 1e-12);
        assert!((lc1.beta1 - 1.0).abs() < 1e-12);
        assert!((lc1.beta2 - 1.0).abs() < 1e-12);

        let lc2 = malthusian(Disorder::new(2.0).unwrap());
        assert!((lc2.lambda - std::f64::consts::PI / 4.0).abs() < 1e-12);

        let lc_half = malthusian(Disorder::new(0.5).unwrap());
        assert!((lc_half.lambda - std::f64::consts::SQRT_2).abs() < 1e-12);
    }

    #[test]
    fn malthusian_beta_relations() {
        for s in [0.25, 0.5, 1.0, 2.0, 4.0] {
            let d = Disorder::new(s).unwrap();
            let lc = malthusian(d);
            assert!((lc.beta1 - 1.0 / (s * lc.lambda)).abs() < 1e-14);
            assert!((lc.beta2 - 1.0 / (lc.lambda * s.sqrt())).abs() < 1e-14);
        }
    }

    #[test]
    fn malthusian_quadrature_identity() {
        for s in [0.25, 0.5, 1.0, 2.0, 4.0] {
            let d = Disorder::new(s).unwrap();
            let res = malthusian_quadrature_residual(d);
            assert!(res.abs() < 1e-8, "s = {s}: residual {res}");
        }
    }

    #[test]
    fn stable_age_values() {
        let d1 = Disorder::new(1.0).unwrap();
        assert!((stable_age_density(d1, 0.7).unwrap() - 0.496_585_303_791_409_5).abs() < 1e-12);
        assert!((stable_age_density(d1, 0.0).unwrap() - 1.0).abs() < 1e-12);

        let d2 = Disorder::new(2.0).unwrap();
        assert!(
            (stable_age_density(d2, 1.0).unwrap() - 0.227_969_063_882_998_1).abs() < 1e-12
        );
        assert_eq!(stable_age_density(d2, 0.0), Err(LimitsError::DensityAtZero));
    }

    #[test]
    fn stable_age_moments() {
        for s in [0.25, 0.5, 1.0, 2.0, 4.0] {
            let d = Disorder::new(s).unwrap();
            let lc = malthusian(d);
            let (mass, mean, var) = stable_age_quadrature_moments(d);
            assert!((mass - 1.0).abs() < 1e-8, "s = {s}: mass {mass}");
            assert!((mean - lc.beta1).abs() < 1e-8, "s = {s}: mean {mean}");
            assert!(
                (var - lc.beta2 * lc.beta2).abs() < 1e-8,
                "s = {s}: var {var}"
            );
        }
    }

    #[test]
    fn convolution_density_values() {
        let d1 = Disorder::new(1.0).unwrap();
        assert!((convolution_density(d1, 1, 2.0).unwrap() - 1.0).abs() < 1e-12);
        assert!((convolution_density(d1, 3, 1.0).unwrap() - 0.5).abs() < 1e-12);
        let dh = Disorder::new(0.5).unwrap();
        // u^{1/s-1} lambda^{1/s} / Gamma(1/s) at u=1: lambda^2 / Gamma(2) = 2.
        assert!((convolution_density(dh, 1, 1.0).unwrap() - 2.0).abs() < 1e-12);
        // Large j stays finite through log-space evaluation.
        let big = convolution_density(d1, 50_000, 1.0).unwrap();
        assert!(big.is_finite());
    }

    #[test]
    fn convolution_self_convolution_oracle() {
        // j=2 density equals the numerical self-convolution of j=1.
        // The substitution v = u sin^2(theta) absorbs both endpoint
        // singularities of the convolution integral.
        for s in [0.5, 1.0, 2.0] {
            let d = Disorder::new(s).unwrap();
            for i in 1..=20 {
                let u = 0.25 * i as f64;
                let direct = convolution_density(d, 2, u).unwrap();
                // f1(v) f1(u-v) dv with v = u sin^2(theta); the endpoint
                // singularities cancel against the jacobian, leaving
                // (sin cos)^{2/s - 1}, smooth for s <= 2.
                let lambda = malthusian(d).lambda;
                let c = (lambda.powf(1.0 / s) / gamma_fn(1.0 / s).unwrap()).powi(2);
                let q = 2.0 / s - 1.0;
                let conv = adaptive_simpson(
                    |theta: f64| {
                        2.0 * c * u.powf(q) * (theta.sin() * theta.cos()).powf(q)
                    },
                    0.0,
                    std::f64::consts::FRAC_PI_2,
                    1e-10,
                );
                assert!(
                    (direct - conv).abs() < 1e-6 * direct.max(1.0),
                    "s = {s}, u = {u}: direct {direct}, conv {conv}"
                );
            }
        }
    }

    #[test]
    fn tilde_mu_exact_at_s1() {
        // At s=1 the series telescopes to 1 for a=1 and all u.
        let d = Disorder::new(1.0).unwrap();
        let v = tilde_mu_density(d, 1.0, 5.0, 1e-12).unwrap();
        assert!((v - 1.0).abs() < 1e-10, "got {v}");
    }

    #[test]
    fn tilde_mu_asymptote_s2() {
        let d = Disorder::new(2.0).unwrap();
        let v = tilde_mu_density(d, 1.0, 40.0, 1e-12).unwrap();
        let target = std::f64::consts::FRAC_PI_2;
        assert!((v / target - 1.0).abs() < 0.02, "got {v}, asymptote {target}");
    }

    #[test]
    fn tilde_mu_empty_series() {
        let d = Disorder::new(2.0).unwrap();
        assert_eq!(tilde_mu_density(d, 0.0, 1.0, 1e-10).unwrap(), 0.0);
    }

    #[test]
    fn tilde_mu_scaling_identity() {
        for s in [0.5, 1.0, 2.0] {
            let d = Disorder::new(s).unwrap();
            for a in [0.5, 0.9, 1.1] {
                for u in [0.1, 1.0, 10.0] {
                    let lhs = tilde_mu_density(d, a, u, 1e-13).unwrap();
                    let rhs =
                        a.powf(s) * tilde_mu_density(d, 1.0, u * a.powf(s), 1e-13).unwrap();
                    assert!(
                        (lhs - rhs).abs() < 1e-10 * lhs.abs().max(1.0),
                        "s={s} a={a} u={u}: {lhs} vs {rhs}"
                    );
                }
            }
        }
    }

    #[test]
    fn tilde_mu_converges_to_lambda_s() {
        for s in [0.5, 1.0, 2.0] {
            let d = Disorder::new(s).unwrap();
            let ls = malthusian(d).lambda * s;
            let mut prev = f64::INFINITY;
            for u in [10.0, 20.0, 40.0, 80.0] {
                let rel = (tilde_mu_density(d, 1.0, u, 1e-13).unwrap() / ls - 1.0).abs();
                assert!(rel <= prev + 1e-12, "s={s} u={u}: not decreasing");
                prev = rel;
            }
            assert!(prev < 0.02, "s={s}: rel error at u=80 is {prev}");
        }
    }
}
