//! Estimators and hypothesis tests for the verification harness:
//! Kolmogorov-Smirnov tests (asymptotic p-values), chi-square
//! goodness-of-fit, summary statistics, the hopcount/weight
//! standardizations of the limit theorems, and weighted least squares.

use crate::limits::{ln_gamma, Disorder, LimitConstants};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum StatsError {
    #[error("need at least {need} samples, got {got}")]
    TooFewSamples { need: usize, got: usize },
    #[error("input has zero variance")]
    ZeroVariance,
    #[error("singular design (fewer than 3 distinct x values)")]
    SingularDesign,
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
}

/// Count, mean, unbiased variance, and standard error of the mean.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SummaryStats {
    pub count: usize,
    pub mean: f64,
    pub variance: f64,
    pub std_error: f64,
}

impl SummaryStats {
    pub fn from_slice(xs: &[f64]) -> Self {
        let n = xs.len();
        // Welford's online update.
        let mut mean = 0.0;
        let mut m2 = 0.0;
        for (i, &x) in xs.iter().enumerate() {
            let delta = x - mean;
            mean += delta / (i + 1) as f64;
            m2 += delta * (x - mean);
        }
        let variance = if n > 1 { m2 / (n - 1) as f64 } else { 0.0 };
        SummaryStats {
            count: n,
            mean,
            variance,
            std_error: (variance / n.max(1) as f64).sqrt(),
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct KsResult {
    pub statistic: f64,
    pub p_value: f64,
    pub n1: usize,
    pub n2: Option<usize>,
}

/// One line of a verification report.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TestReport {
    pub test_name: String,
    pub statistic: f64,
    pub p_value: Option<f64>,
    pub pass: bool,
    pub config: String,
}

const MIN_KS_SAMPLES: usize = 8;

/// Asymptotic Kolmogorov survival function
/// `Q(x) = 2 * sum_{k>=1} (-1)^{k-1} e^{-2 k^2 x^2}`.
pub fn kolmogorov_q(x: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    let mut sum = 0.0_f64;
    for k in 1..=100 {
        let term = (-2.0 * (k * k) as f64 * x * x).exp();
        sum += if k % 2 == 1 { term } else { -term };
        if term < 1e-16 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

fn ks_p(d: f64, n_eff: f64) -> f64 {
    let sn = n_eff.sqrt();
    kolmogorov_q((sn + 0.12 + 0.11 / sn) * d)
}

/// One-sample KS test of `samples` against the continuous CDF `cdf`.
pub fn ks_one_sample<F>(samples: &[f64], cdf: F) -> Result<KsResult, StatsError>
where
    F: Fn(f64) -> f64,
{
    let n = samples.len();
    if n < MIN_KS_SAMPLES {
        return Err(StatsError::TooFewSamples {
            need: MIN_KS_SAMPLES,
            got: n,
        });
    }
    let mut xs = samples.to_vec();
    xs.sort_by(f64::total_cmp);
    let nf = n as f64;
    let mut d = 0.0_f64;
    for (i, &x) in xs.iter().enumerate() {
        let f = cdf(x);
        d = d.max((f - i as f64 / nf).abs());
        d = d.max(((i + 1) as f64 / nf - f).abs());
    }
    Ok(KsResult {
        statistic: d,
        p_value: ks_p(d, nf),
        n1: n,
        n2: None,
    })
}

/// Two-sample KS test.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<KsResult, StatsError> {
    let (n1, n2) = (a.len(), b.len());
    if n1 < MIN_KS_SAMPLES || n2 < MIN_KS_SAMPLES {
        return Err(StatsError::TooFewSamples {
            need: MIN_KS_SAMPLES,
            got: n1.min(n2),
        });
    }
    let mut xs = a.to_vec();
    let mut ys = b.to_vec();
    xs.sort_by(f64::total_cmp);
    ys.sort_by(f64::total_cmp);
    let mut i = 0;
    let mut j = 0;
    let mut d = 0.0_f64;
    while i < n1 && j < n2 {
        // Advance past ties on both sides before measuring the gap.
        let v = xs[i].min(ys[j]);
        while i < n1 && xs[i] <= v {
            i += 1;
        }
        while j < n2 && ys[j] <= v {
            j += 1;
        }
        d = d.max((i as f64 / n1 as f64 - j as f64 / n2 as f64).abs());
    }
    let n_eff = (n1 * n2) as f64 / (n1 + n2) as f64;
    Ok(KsResult {
        statistic: d,
        p_value: ks_p(d, n_eff),
        n1,
        n2: Some(n2),
    })
}

/// Chi-square goodness-of-fit p-value for observed vs expected counts.
/// Bins with expected count below `min_expected` are pooled into the
/// last kept bin. Returns `(statistic, dof, p)`.
pub fn chi_square_gof(
    observed: &[f64],
    expected: &[f64],
    min_expected: f64,
) -> Result<(f64, usize, f64), StatsError> {
    if observed.len() != expected.len() {
        return Err(StatsError::LengthMismatch(observed.len(), expected.len()));
    }
    let mut stat = 0.0;
    let mut bins = 0usize;
    let mut pool_obs = 0.0;
    let mut pool_exp = 0.0;
    for (&o, &e) in observed.iter().zip(expected) {
        pool_obs += o;
        pool_exp += e;
        if pool_exp >= min_expected {
            stat += (pool_obs - pool_exp).powi(2) / pool_exp;
            bins += 1;
            pool_obs = 0.0;
            pool_exp = 0.0;
        }
    }
    if pool_exp > 0.0 && bins > 0 {
        stat += (pool_obs - pool_exp).powi(2) / pool_exp;
        bins += 1;
    }
    if bins < 2 {
        return Err(StatsError::TooFewSamples { need: 2, got: bins });
    }
    let dof = bins - 1;
    Ok((stat, dof, gamma_q(dof as f64 / 2.0, stat / 2.0)))
}

/// Two-sample chi-square homogeneity test over shared bins of counts.
/// Adjacent bins are pooled until the combined count reaches
/// `min_total`. Returns (statistic, dof, p-value).
pub fn chi_square_two_sample(
    counts1: &[f64],
    counts2: &[f64],
    min_total: f64,
) -> Result<(f64, usize, f64), StatsError> {
    if counts1.len() != counts2.len() {
        return Err(StatsError::LengthMismatch(counts1.len(), counts2.len()));
    }
    let n1: f64 = counts1.iter().sum();
    let n2: f64 = counts2.iter().sum();
    if n1 == 0.0 || n2 == 0.0 {
        return Err(StatsError::TooFewSamples { need: 1, got: 0 });
    }
    // (sqrt(n2/n1) a - sqrt(n1/n2) b)^2 / (a + b) per pooled bin.
    let (r12, r21) = ((n2 / n1).sqrt(), (n1 / n2).sqrt());
    let mut stat = 0.0;
    let mut bins = 0usize;
    let mut a = 0.0;
    let mut b = 0.0;
    for (&c1, &c2) in counts1.iter().zip(counts2) {
        a += c1;
        b += c2;
        if a + b >= min_total {
            stat += (r12 * a - r21 * b).powi(2) / (a + b);
            bins += 1;
            a = 0.0;
            b = 0.0;
        }
    }
    if a + b > 0.0 && bins > 0 {
        stat += (r12 * a - r21 * b).powi(2) / (a + b);
        bins += 1;
    }
    if bins < 2 {
        return Err(StatsError::TooFewSamples { need: 2, got: bins });
    }
    let dof = bins - 1;
    Ok((stat, dof, gamma_q(dof as f64 / 2.0, stat / 2.0)))
}

/// Regularized lower incomplete gamma `P(a, x)`.
pub fn gamma_p(a: f64, x: f64) -> f64 {
    assert!(a > 0.0 && x >= 0.0);
    if x == 0.0 {
        return 0.0;
    }
    if x < a + 1.0 {
        lower_series(a, x)
    } else {
        1.0 - upper_cf(a, x)
    }
}

/// Regularized upper incomplete gamma `Q(a, x) = 1 - P(a, x)`.
pub fn gamma_q(a: f64, x: f64) -> f64 {
    assert!(a > 0.0 && x >= 0.0);
    if x == 0.0 {
        return 1.0;
    }
    if x < a + 1.0 {
        1.0 - lower_series(a, x)
    } else {
        upper_cf(a, x)
    }
}

fn lower_series(a: f64, x: f64) -> f64 {
    let mut ap = a;
    let mut sum = 1.0 / a;
    let mut term = sum;
    for _ in 0..500 {
        ap += 1.0;
        term *= x / ap;
        sum += term;
        if term.abs() < sum.abs() * 1e-16 {
            break;
        }
    }
    (sum.ln() + a * x.ln() - x - ln_gamma(a)).exp().min(1.0)
}

fn upper_cf(a: f64, x: f64) -> f64 {
    // Lentz's algorithm for the continued fraction.
    const TINY: f64 = 1e-300;
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..500 {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < TINY {
            d = TINY;
        }
        c = b + an / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() < 1e-16 {
            break;
        }
    }
    ((a * x.ln() - x - ln_gamma(a)).exp() * h).clamp(0.0, 1.0)
}

/// `erf` via the regularized incomplete gamma.
pub fn erf(x: f64) -> f64 {
    let v = gamma_p(0.5, x * x);
    if x >= 0.0 {
        v
    } else {
        -v
    }
}

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * (1.0 + erf(x / std::f64::consts::SQRT_2))
}

/// `(h - s log n) / sqrt(s^2 log n)`, the hopcount standardization of
/// the CLT.
pub fn standardize_hopcount(h: u64, n: u64, d: Disorder) -> f64 {
    let s = d.s();
    let ln_n = (n as f64).ln();
    (h as f64 - s * ln_n) / (s * s * ln_n).sqrt()
}

/// `n^s * c - (1/lambda) log n`, the weight recentering of the limit
/// theorem; `c` is in original (unit-mean) units.
pub fn recenter_weight(c_original: f64, n: u64, d: Disorder, lc: LimitConstants) -> f64 {
    (n as f64).powf(d.s()) * c_original - (n as f64).ln() / lc.lambda
}

/// Weighted least squares line fit with per-point standard errors;
/// weights are `1/se^2`. Returns `(slope, intercept, slope_se)`.
pub fn slope_fit(x: &[f64], y: &[f64], y_se: &[f64]) -> Result<(f64, f64, f64), StatsError> {
    if x.len() != y.len() || x.len() != y_se.len() {
        return Err(StatsError::LengthMismatch(x.len(), y.len()));
    }
    if x.len() < 3 {
        return Err(StatsError::TooFewSamples {
            need: 3,
            got: x.len(),
        });
    }
    let w: Vec<f64> = y_se.iter().map(|se| 1.0 / (se * se)).collect();
    let sw: f64 = w.iter().sum();
    let sx: f64 = x.iter().zip(&w).map(|(xi, wi)| wi * xi).sum();
    let sy: f64 = y.iter().zip(&w).map(|(yi, wi)| wi * yi).sum();
    let xbar = sx / sw;
    let ybar = sy / sw;
    let sxx: f64 = x
        .iter()
        .zip(&w)
        .map(|(xi, wi)| wi * (xi - xbar).powi(2))
        .sum();
    if sxx <= 0.0 {
        return Err(StatsError::SingularDesign);
    }
    let sxy: f64 = x
        .iter()
        .zip(y)
        .zip(&w)
        .map(|((xi, yi), wi)| wi * (xi - xbar) * (yi - ybar))
        .sum();
    let slope = sxy / sxx;
    let intercept = ybar - slope * xbar;
    Ok((slope, intercept, (1.0 / sxx).sqrt()))
}

/// Pearson correlation coefficient.
pub fn correlation(a: &[f64], b: &[f64]) -> Result<f64, StatsError> {
    if a.len() != b.len() {
        return Err(StatsError::LengthMismatch(a.len(), b.len()));
    }
    if a.len() < MIN_KS_SAMPLES {
        return Err(StatsError::TooFewSamples {
            need: MIN_KS_SAMPLES,
            got: a.len(),
        });
    }
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let mut sab = 0.0;
    let mut saa = 0.0;
    let mut sbb = 0.0;
    for (&x, &y) in a.iter().zip(b) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma).powi(2);
        sbb += (y - mb).powi(2);
    }
    if saa == 0.0 || sbb == 0.0 {
        return Err(StatsError::ZeroVariance);
    }
    Ok(sab / (saa * sbb).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::RngStream;

    #[test]
    fn summary_stats_basic() {
        let st = SummaryStats::from_slice(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(st.count, 4);
        assert!((st.mean - 2.5).abs() < 1e-15);
        assert!((st.variance - 5.0 / 3.0).abs() < 1e-15);
        assert!((st.std_error - (st.variance / 4.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn ks_identical_sets() {
        let xs: Vec<f64> = (0..100).map(|i| i as f64).collect();
        let r = ks_two_sample(&xs, &xs).unwrap();
        assert_eq!(r.statistic, 0.0);
        assert!((r.p_value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ks_two_sample_symmetric() {
        let mut rng = RngStream::new(1, 0);
        let a: Vec<f64> = (0..500).map(|_| rng.uniform()).collect();
        let b: Vec<f64> = (0..900).map(|_| rng.exponential()).collect();
        let r1 = ks_two_sample(&a, &b).unwrap();
        let r2 = ks_two_sample(&b, &a).unwrap();
        assert_eq!(r1.statistic, r2.statistic);
        assert_eq!(r1.p_value, r2.p_value);
    }

    #[test]
    fn ks_uniform_self_consistency() {
        let mut rng = RngStream::new(2, 0);
        let xs: Vec<f64> = (0..10_000).map(|_| rng.uniform()).collect();
        let r = ks_one_sample(&xs, |x| x.clamp(0.0, 1.0)).unwrap();
        assert!(r.p_value > 0.01, "p = {}", r.p_value);
    }

    #[test]
    fn ks_gross_mismatch() {
        let mut rng = RngStream::new(2, 1);
        let xs: Vec<f64> = (0..10_000).map(|_| rng.uniform()).collect();
        let r = ks_one_sample(&xs, normal_cdf).unwrap();
        assert!(r.p_value < 1e-6, "p = {}", r.p_value);
    }

    #[test]
    fn ks_rejects_small_samples() {
        assert!(ks_one_sample(&[1.0; 5], |x| x).is_err());
    }

    #[test]
    fn incomplete_gamma_known_values() {
        // P(1, x) = 1 - e^{-x}.
        for x in [0.1, 1.0, 5.0] {
            assert!((gamma_p(1.0, x) - (1.0 - (-x as f64).exp())).abs() < 1e-12);
        }
        // Chi-square(2) survival at its mean: e^{-1}.
        assert!((gamma_q(1.0, 1.0) - (-1.0f64).exp()).abs() < 1e-12);
    }

    #[test]
    fn normal_cdf_values() {
        assert!((normal_cdf(0.0) - 0.5).abs() < 1e-14);
        assert!((normal_cdf(1.96) - 0.975_002_104_851_780).abs() < 1e-9);
        assert!((normal_cdf(-1.0) - 0.158_655_253_931_457_05).abs() < 1e-9);
    }

    #[test]
    fn chi_square_uniform_counts() {
        let obs = [98.0, 105.0, 95.0, 102.0];
        let exp = [100.0; 4];
        let (stat, dof, p) = chi_square_gof(&obs, &exp, 5.0).unwrap();
        assert_eq!(dof, 3);
        assert!(stat < 1.0);
        assert!(p > 0.5);
    }

    #[test]
    fn standardize_hopcount_examples() {
        let d1 = Disorder::new(1.0).unwrap();
        let n = (9.0f64.exp()).round() as u64; // log n ~ 9
        let z = (12.0 - (n as f64).ln()) / (n as f64).ln().sqrt();
        assert!((standardize_hopcount(12, n, d1) - z).abs() < 1e-12);
        // Affine invertibility.
        let h = z * (n as f64).ln().sqrt() + (n as f64).ln();
        assert!((h - 12.0).abs() < 1e-9);
    }

    #[test]
    fn recenter_weight_examples() {
        let d1 = Disorder::new(1.0).unwrap();
        let lc = crate::limits::malthusian(d1);
        let v = recenter_weight(0.05, 100, d1, lc);
        assert!((v - (5.0 - 100.0f64.ln())).abs() < 1e-12);
        // Conversion chain from rescaled W_n.
        let (n, wn) = (100u64, 3.7f64);
        let chained = recenter_weight(wn / 99.0, n, d1, lc);
        let direct = (100.0 / 99.0) * wn - 100.0f64.ln();
        assert!((chained - direct).abs() < 1e-12);
    }

    #[test]
    fn slope_fit_exact_line() {
        let x = [1.0, 2.0, 3.0, 4.0];
        let y = [3.0, 5.0, 7.0, 9.0];
        let se = [0.1; 4];
        let (slope, intercept, _) = slope_fit(&x, &y, &se).unwrap();
        assert!((slope - 2.0).abs() < 1e-12);
        assert!((intercept - 1.0).abs() < 1e-12);

        let yc = [4.0; 4];
        let (slope, _, _) = slope_fit(&x, &yc, &se).unwrap();
        assert!(slope.abs() < 1e-12);
    }

    #[test]
    fn slope_fit_recovers_noisy_slope() {
        let mut rng = RngStream::new(7, 0);
        let x: Vec<f64> = (0..20).map(|i| i as f64 / 2.0).collect();
        let s = 1.7;
        let y: Vec<f64> = x
            .iter()
            .map(|xi| s * xi + 0.01 * (rng.uniform() - 0.5) * 3.46)
            .collect();
        let se = vec![0.01; 20];
        let (slope, _, slope_se) = slope_fit(&x, &y, &se).unwrap();
        assert!((slope - s).abs() < 3.0 * slope_se, "slope {slope} +- {slope_se}");
    }

    #[test]
    fn slope_fit_translation_equivariance() {
        let x = [1.0, 2.0, 5.0, 9.0];
        let y = [2.0, 3.0, 9.0, 15.0];
        let se = [0.5, 0.2, 0.3, 0.4];
        let (s1, i1, se1) = slope_fit(&x, &y, &se).unwrap();
        let xs: Vec<f64> = x.iter().map(|v| v + 10.0).collect();
        let (s2, i2, se2) = slope_fit(&xs, &y, &se).unwrap();
        assert!((s1 - s2).abs() < 1e-10);
        assert!((se1 - se2).abs() < 1e-10);
        assert!((i2 - (i1 - 10.0 * s1)).abs() < 1e-9);
    }

    #[test]
    fn correlation_cases() {
        let a: Vec<f64> = (0..100).map(|i| i as f64).collect();
        assert!((correlation(&a, &a).unwrap() - 1.0).abs() < 1e-12);
        let neg: Vec<f64> = a.iter().map(|v| -v).collect();
        assert!((correlation(&a, &neg).unwrap() + 1.0).abs() < 1e-12);
        assert_eq!(
            correlation(&a, &vec![2.0; 100]).unwrap_err(),
            StatsError::ZeroVariance
        );

        let mut rng = RngStream::new(8, 0);
        let x: Vec<f64> = (0..10_000).map(|_| rng.uniform()).collect();
        let y: Vec<f64> = (0..10_000).map(|_| rng.uniform()).collect();
        assert!(correlation(&x, &y).unwrap().abs() < 0.05);
    }
}
