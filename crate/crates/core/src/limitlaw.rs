//! The limit objects: the martingale limit W, its Laplace transform phi,
//! and the Cox-process limit 2 Xi of the recentered weight.
//!
//! Gumbel convention: `G = log(-log U)` for U uniform, the minimum
//! convention with survival function `P(G > x) = exp(-e^x)`, so that
//! `xi2 = (1/lambda) (G - log w1 - log w2 - log(1/s))` agrees with the
//! conditional law `P(Xi > y | W) = exp(-(1/s) w1 w2 e^{2 lambda y})`.

use crate::ctbp::{self, CtbpError, DEFAULT_POPULATION_CAP};
use crate::limits::{malthusian, Disorder, LimitConstants};
use crate::quad::adaptive_simpson;
use crate::sampling::{OffspringStream, RngStream};
use crate::stats::{self, KsResult, StatsError};
use std::io::Write;
use thiserror::Error;

/// Smallest admissible `e^{lambda t}` for a finite-horizon W estimate.
pub const MIN_HORIZON_SCALE: f64 = 3.0e3;

/// Weight factors below this are dropped from the W-recursion sum.
pub const W_RECURSION_CUTOFF: f64 = 1e-8;

pub const PHI_MAX_ITERATIONS: usize = 500;

#[derive(Debug, Error)]
pub enum LimitLawError {
    #[error(transparent)]
    Ctbp(#[from] CtbpError),
    #[error(transparent)]
    Stats(#[from] StatsError),
    #[error("horizon policy gives e^(lambda t) = {0:.3e}, need >= {MIN_HORIZON_SCALE:.0e}")]
    HorizonTooShort(f64),
    #[error("phi grid needs u_max <= 50 and grid_size >= 64, got u_max = {u_max}, grid_size = {grid_size}")]
    BadPhiGrid { u_max: f64, grid_size: usize },
    #[error("phi iteration failed to reach tol = {tol} in {PHI_MAX_ITERATIONS} iterations (residual {residual:.3e})")]
    PhiNonConvergence { tol: f64, residual: f64 },
}

/// How far to grow a branching process before reading off the
/// martingale estimate.
#[derive(Debug, Clone, Copy)]
pub enum HorizonPolicy {
    /// Horizon `t = log(target) / lambda`, i.e. expected scale
    /// `e^{lambda t} = target`.
    TargetScale(f64),
    /// Explicit horizon in branching-process time.
    FixedTime(f64),
}

impl Default for HorizonPolicy {
    fn default() -> Self {
        HorizonPolicy::TargetScale(5.0e3)
    }
}

impl HorizonPolicy {
    pub fn horizon(&self, lc: LimitConstants) -> Result<f64, LimitLawError> {
        let t = match *self {
            HorizonPolicy::TargetScale(target) => target.ln() / lc.lambda,
            HorizonPolicy::FixedTime(t) => t,
        };
        let scale = (lc.lambda * t).exp();
        if scale < MIN_HORIZON_SCALE {
            return Err(LimitLawError::HorizonTooShort(scale));
        }
        Ok(t)
    }
}

/// One draw of the joint limit (2 Xi, G, W1, W2).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LimitSample {
    /// A sample of 2 Xi.
    pub xi2: f64,
    /// The Gumbel draw, minimum convention.
    pub gumbel: f64,
    pub w1: f64,
    pub w2: f64,
}

/// Finite-horizon martingale estimate of W. A biased approximation:
/// the bias vanishes as the horizon grows.
pub fn sample_w(
    d: Disorder,
    policy: HorizonPolicy,
    rng: &mut RngStream,
) -> Result<f64, LimitLawError> {
    let lc = malthusian(d);
    let t = policy.horizon(lc)?;
    let snap = ctbp::grow_until(d, t, DEFAULT_POPULATION_CAP, rng.fork())?;
    Ok(ctbp::martingale_estimate(&snap, lc))
}

/// Assemble a limit sample from its parts; `gumbel` is a minimum
/// convention draw.
pub fn assemble_limit(d: Disorder, gumbel: f64, w1: f64, w2: f64) -> LimitSample {
    let lc = malthusian(d);
    let xi2 = (gumbel - w1.ln() - w2.ln() - d.inv_s().ln()) / lc.lambda;
    LimitSample {
        xi2,
        gumbel,
        w1,
        w2,
    }
}

/// Draw 2 Xi by substituting two W draws and an independent Gumbel.
pub fn sample_limit<F>(d: Disorder, rng: &mut RngStream, mut w_source: F) -> LimitSample
where
    F: FnMut(&mut RngStream) -> f64,
{
    let w1 = w_source(rng);
    let w2 = w_source(rng);
    let gumbel = (-rng.uniform().ln()).ln();
    assemble_limit(d, gumbel, w1, w2)
}

/// Draw 2 Xi by inverting the conditional survival function
/// `P(Xi > y | W) = exp(-(1/s) w1 w2 e^{2 lambda y})` at a uniform.
pub fn sample_limit_conditional(d: Disorder, rng: &mut RngStream, w1: f64, w2: f64) -> f64 {
    let lc = malthusian(d);
    let u = rng.uniform();
    // exp(-(1/s) w1 w2 e^{2 lambda y}) = u, solved for 2y.
    ((-u.ln()).ln() + d.s().ln() - w1.ln() - w2.ln()) / lc.lambda
}

/// Tabulated Laplace transform of W on a log-spaced grid.
#[derive(Debug, Clone)]
pub struct PhiTable {
    pub u_grid: Vec<f64>,
    pub values: Vec<f64>,
}

impl PhiTable {
    /// Interpolate phi(u); linear in (log u, log(-log phi)), with the
    /// exact small-u asymptote -log phi ~ s u below the grid.
    pub fn eval(&self, u: f64) -> f64 {
        assert!(u >= 0.0, "phi argument must be nonnegative");
        if u == 0.0 {
            return 1.0;
        }
        let grid = &self.u_grid[1..];
        let vals = &self.values[1..];
        let z = |v: f64| (-v.ln()).ln();
        let lu = u.ln();
        if u <= grid[0] {
            // z(u) = z(u0) + (log u - log u0) exactly when -log phi is
            // linear in u, which holds as u -> 0.
            return (-(z(vals[0]) + lu - grid[0].ln()).exp()).exp();
        }
        let hi = grid.partition_point(|&g| g < u).min(grid.len() - 1);
        let lo = hi - 1;
        let (x0, x1) = (grid[lo].ln(), grid[hi].ln());
        let frac = (lu - x0) / (x1 - x0);
        let zi = z(vals[lo]) + frac * (z(vals[hi]) - z(vals[lo]));
        (-zi.exp()).exp()
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "u,phi")?;
        for (u, v) in self.u_grid.iter().zip(&self.values) {
            writeln!(w, "{:.16e},{:.16e}", u, v)?;
        }
        Ok(())
    }
}

/// Solve the fixed point `phi(u) = exp(-int_0^inf (1 - phi(u e^{-lambda
/// x^s})) dx)` by iteration from the mean-matched start `e^{-s u}`.
///
/// The offspring points are the image of a unit Poisson process under
/// `x -> x^s`, hence themselves a Poisson process; the log-Laplace
/// functional gives the `1 - phi` integrand above rather than a
/// `log phi` one.
pub fn solve_phi(
    d: Disorder,
    u_max: f64,
    grid_size: usize,
    tol: f64,
) -> Result<PhiTable, LimitLawError> {
    if !(u_max > 0.0 && u_max <= 50.0) || grid_size < 64 {
        return Err(LimitLawError::BadPhiGrid { u_max, grid_size });
    }
    let lc = malthusian(d);
    let s = d.s();
    let u_min = u_max * 1e-5;
    let ratio = (u_max / u_min).powf(1.0 / (grid_size - 2) as f64);
    let mut u_grid = Vec::with_capacity(grid_size);
    u_grid.push(0.0);
    for i in 0..grid_size - 1 {
        u_grid.push(u_min * ratio.powi(i as i32));
    }
    *u_grid.last_mut().unwrap() = u_max;
    let mut table = PhiTable {
        values: u_grid.iter().map(|&u| (-s * u).exp()).collect(),
        u_grid,
    };
    let mut residual = f64::INFINITY;
    for _ in 0..PHI_MAX_ITERATIONS {
        let next: Vec<f64> = table
            .u_grid
            .iter()
            .map(|&u| {
                if u == 0.0 {
                    return 1.0;
                }
                // The integrand decays like u e^{-lambda x^s}; cut where
                // that is far below quadrature tolerance.
                let x_max = ((u.max(1.0).ln() + 40.0) / lc.lambda).powf(1.0 / s);
                let integral = adaptive_simpson(
                    |x| 1.0 - table.eval(u * (-lc.lambda * x.powf(s)).exp()),
                    0.0,
                    x_max,
                    1e-10,
                );
                (-integral).exp()
            })
            .collect();
        // The recursion determines W only up to scale (the operator has
        // a neutral scaling mode), so re-anchor E[W] = s each sweep.
        // Mean from the two smallest grid points, Richardson-corrected:
        // -log phi(u) = m u - c u^2/2 + ...
        let (u1, u2) = (table.u_grid[1], table.u_grid[2]);
        let (m1, m2) = (-next[1].ln() / u1, -next[2].ln() / u2);
        let mean = (m1 * u2 - m2 * u1) / (u2 - u1);
        let scale = s / mean;
        let tmp = PhiTable {
            u_grid: table.u_grid.clone(),
            values: next,
        };
        let rescaled: Vec<f64> = table.u_grid.iter().map(|&u| tmp.eval(scale * u)).collect();
        residual = rescaled
            .iter()
            .zip(&table.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        table.values = rescaled;
        if residual < tol {
            return Ok(table);
        }
    }
    Err(LimitLawError::PhiNonConvergence { tol, residual })
}

/// Monte Carlo check of the distributional recursion
/// `W = sum_i e^{-lambda L_i} W_i`: resample the right-hand side with
/// fresh offspring streams and fresh finite-horizon W draws, then
/// two-sample KS against the supplied pool.
pub fn w_recursion_check(
    d: Disorder,
    w_samples: &[f64],
    rng: &mut RngStream,
) -> Result<KsResult, LimitLawError> {
    let lc = malthusian(d);
    let fresh_count = w_samples.len().min(2000).max(200);
    let fresh: Vec<f64> = (0..fresh_count)
        .map(|_| sample_w(d, HorizonPolicy::default(), rng))
        .collect::<Result<_, _>>()?;
    let resampled: Vec<f64> = (0..w_samples.len())
        .map(|_| {
            let mut stream = OffspringStream::new(d);
            let mut total = 0.0;
            loop {
                let factor = (-lc.lambda * stream.next_point(rng)).exp();
                if factor < W_RECURSION_CUTOFF {
                    break;
                }
                total += factor * fresh[rng.below(fresh.len())];
            }
            total
        })
        .collect();
    Ok(stats::ks_two_sample(w_samples, &resampled)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(s: f64) -> Disorder {
        Disorder::new(s).unwrap()
    }

    #[test]
    fn horizon_policy_bounds() {
        let lc = malthusian(d(1.0));
        assert!(HorizonPolicy::TargetScale(1000.0).horizon(lc).is_err());
        let t = HorizonPolicy::TargetScale(5000.0).horizon(lc).unwrap();
        assert!((t - 5000.0_f64.ln()).abs() < 1e-12);
        assert!(HorizonPolicy::FixedTime(1.0).horizon(lc).is_err());
        assert!(HorizonPolicy::FixedTime(10.0).horizon(lc).is_ok());
    }

    #[test]
    fn forced_limit_values() {
        // s=1: every term vanishes.
        let sample = assemble_limit(d(1.0), 0.0, 1.0, 1.0);
        assert!(sample.xi2.abs() < 1e-15);
        // s=2: lambda = pi/4, xi2 = -(4/pi) log(1/2).
        let sample = assemble_limit(d(2.0), 0.0, 1.0, 1.0);
        let expect = -(4.0 / std::f64::consts::PI) * 0.5_f64.ln();
        assert!((sample.xi2 - expect).abs() < 1e-12);
        assert!((expect - 0.8825424006).abs() < 1e-9);
    }

    #[test]
    fn gumbel_translation_shifts_xi2() {
        let lc = malthusian(d(0.7));
        let a = assemble_limit(d(0.7), 0.3, 2.0, 0.5);
        let b = assemble_limit(d(0.7), 1.3, 2.0, 0.5);
        assert!((b.xi2 - a.xi2 - 1.0 / lc.lambda).abs() < 1e-12);
    }

    #[test]
    fn marginal_is_standard_gumbel_for_unit_w() {
        // lambda xi2 + log(1/s) is the stored Gumbel draw when w1=w2=1.
        let dd = d(2.0);
        let lc = malthusian(dd);
        let mut rng = RngStream::new(11, 0);
        let samples: Vec<f64> = (0..100_000)
            .map(|_| {
                let s = sample_limit(dd, &mut rng, |_| 1.0);
                lc.lambda * s.xi2 + dd.inv_s().ln()
            })
            .collect();
        let ks = stats::ks_one_sample(&samples, |x| 1.0 - (-x.exp()).exp()).unwrap();
        assert!(ks.p_value > 0.01, "p = {}", ks.p_value);
    }

    #[test]
    fn conditional_and_gumbel_routes_agree() {
        let dd = d(0.5);
        let (w1, w2) = (1.7, 0.4);
        let mut r1 = RngStream::new(21, 0);
        let mut r2 = RngStream::new(22, 0);
        let via_gumbel: Vec<f64> = (0..20_000)
            .map(|_| {
                let g = (-r1.uniform().ln()).ln();
                assemble_limit(dd, g, w1, w2).xi2
            })
            .collect();
        let via_conditional: Vec<f64> = (0..20_000)
            .map(|_| sample_limit_conditional(dd, &mut r2, w1, w2))
            .collect();
        let ks = stats::ks_two_sample(&via_gumbel, &via_conditional).unwrap();
        assert!(ks.p_value > 0.01, "p = {}", ks.p_value);
    }

    #[test]
    fn sample_w_positive_and_mean_s() {
        for s in [0.5, 1.0, 2.0] {
            let mut rng = RngStream::new(31, 0);
            let ws: Vec<f64> = (0..800)
                .map(|_| sample_w(d(s), HorizonPolicy::default(), &mut rng).unwrap())
                .collect();
            assert!(ws.iter().all(|&w| w > 0.0));
            let st = stats::SummaryStats::from_slice(&ws);
            assert!(
                (st.mean - s).abs() < 3.5 * st.std_error,
                "s = {s}: mean {} +- {}",
                st.mean,
                st.std_error
            );
        }
    }

    #[test]
    fn w_is_exponential_at_s1() {
        let mut rng = RngStream::new(41, 0);
        let ws: Vec<f64> = (0..2000)
            .map(|_| sample_w(d(1.0), HorizonPolicy::default(), &mut rng).unwrap())
            .collect();
        let ks = stats::ks_one_sample(&ws, |x| 1.0 - (-x).exp()).unwrap();
        assert!(ks.p_value > 0.01, "p = {}", ks.p_value);
    }

    #[test]
    fn phi_grid_validation() {
        assert!(solve_phi(d(1.0), 100.0, 128, 1e-6).is_err());
        assert!(solve_phi(d(1.0), 10.0, 32, 1e-6).is_err());
    }

    #[test]
    fn phi_matches_exponential_transform_at_s1() {
        // W ~ Exp(1) at s=1, so phi(u) = 1/(1+u).
        let table = solve_phi(d(1.0), 10.0, 128, 1e-8).unwrap();
        assert_eq!(table.values[0], 1.0);
        for w in table.values.windows(2) {
            assert!(w[1] < w[0]);
        }
        let mut worst = 0.0_f64;
        let mut u = 0.0;
        while u <= 10.0 {
            worst = worst.max((table.eval(u) - 1.0 / (1.0 + u)).abs());
            u += 0.01;
        }
        assert!(worst < 1e-3, "sup error {worst}");
    }

    #[test]
    fn phi_matches_monte_carlo_laplace_at_s2() {
        let dd = d(2.0);
        let table = solve_phi(dd, 4.0, 96, 1e-7).unwrap();
        let mut rng = RngStream::new(51, 0);
        let ws: Vec<f64> = (0..5000)
            .map(|_| sample_w(dd, HorizonPolicy::default(), &mut rng).unwrap())
            .collect();
        for u in [0.5, 1.0, 2.0] {
            let mc = ws.iter().map(|&w| (-u * w).exp()).sum::<f64>() / ws.len() as f64;
            assert!(
                (table.eval(u) - mc).abs() < 0.02,
                "u = {u}: table {} vs mc {}",
                table.eval(u),
                mc
            );
        }
    }

    #[test]
    fn phi_table_csv() {
        let table = solve_phi(d(1.0), 5.0, 64, 1e-6).unwrap();
        let mut buf = Vec::new();
        table.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 65);
        assert!(text.starts_with("u,phi\n0"));
    }

    #[test]
    fn w_recursion_holds_for_exact_law_at_s1() {
        let mut rng = RngStream::new(61, 0);
        let mut pool_rng = RngStream::new(62, 0);
        let pool: Vec<f64> = (0..5000).map(|_| pool_rng.exponential()).collect();
        let ks = w_recursion_check(d(1.0), &pool, &mut rng).unwrap();
        assert!(ks.p_value > 0.01, "p = {}", ks.p_value);
    }

    #[test]
    fn w_recursion_rejects_degenerate_pool() {
        let mut rng = RngStream::new(71, 0);
        let pool = vec![0.0; 2000];
        let ks = w_recursion_check(d(1.0), &pool, &mut rng).unwrap();
        assert!(ks.p_value < 1e-6, "p = {}", ks.p_value);
    }

    #[test]
    fn w_recursion_truncation_tail_is_negligible() {
        // Average mass discarded past the cutoff.
        let dd = d(1.0);
        let lc = malthusian(dd);
        let mut rng = RngStream::new(81, 0);
        let runs = 2000;
        let mut total_tail = 0.0;
        for _ in 0..runs {
            let mut stream = OffspringStream::new(dd);
            loop {
                let factor = (-lc.lambda * stream.next_point(&mut rng)).exp();
                if factor < W_RECURSION_CUTOFF {
                    // Geometric-type decay: sum the visible remainder.
                    let mut tail = factor;
                    let mut f = factor;
                    while f > 1e-20 {
                        f = (-lc.lambda * stream.next_point(&mut rng)).exp();
                        tail += f;
                    }
                    total_tail += tail;
                    break;
                }
            }
        }
        assert!(total_tail / runs as f64 * 1.0 < 1e-6, "tail {}", total_tail / runs as f64);
    }
}
