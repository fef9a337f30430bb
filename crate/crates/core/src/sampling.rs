//! Reproducible random primitives.
//!
//! All randomness in the crate flows through [`RngStream`], a ChaCha
//! stream cipher keyed by `(seed, stream_id)`. Replicate `r` of an
//! experiment uses `stream_id = r`, so replicates are order-independent
//! under parallel execution and any draw sequence can be replayed
//! bit-for-bit.

use crate::limits::Disorder;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum HazardError {
    #[error("cumulative hazard evaluated non-monotonically near t = {0}")]
    NonMonotone(f64),
}

/// A deterministic random stream identified by `(seed, stream_id)`.
#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    stream_id: u64,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream_id);
        RngStream {
            seed,
            stream_id,
            rng,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    /// Uniform draw in `[0, 1)`.
    #[inline]
    pub fn uniform(&mut self) -> f64 {
        self.rng.gen::<f64>()
    }

    /// Unit-mean exponential via inverse transform; `1 - U` keeps the
    /// argument of the logarithm away from zero.
    #[inline]
    pub fn exponential(&mut self) -> f64 {
        -(1.0 - self.uniform()).ln()
    }

    /// Bernoulli draw with success probability `p`.
    #[inline]
    pub fn bernoulli(&mut self, p: f64) -> bool {
        self.uniform() < p
    }

    /// Uniform integer in `[0, n)`.
    #[inline]
    pub fn below(&mut self, n: usize) -> usize {
        self.rng.gen_range(0..n)
    }

    /// Derive an independent child stream, advancing this one. Lets a
    /// consumer hand owned streams to sub-simulations while keeping a
    /// single replayable parent.
    pub fn fork(&mut self) -> RngStream {
        let seed = self.rng.gen::<u64>();
        let stream_id = self.rng.gen::<u64>();
        RngStream::new(seed, stream_id)
    }
}

/// Lazy cursor into the offspring point process
/// `L_i = (Y_1 + ... + Y_i)^s` with i.i.d. unit exponentials `Y_j`.
#[derive(Debug, Clone)]
pub struct OffspringStream {
    disorder: Disorder,
    cumulative_sum: f64,
    emitted_count: u64,
}

impl OffspringStream {
    pub fn new(disorder: Disorder) -> Self {
        OffspringStream {
            disorder,
            cumulative_sum: 0.0,
            emitted_count: 0,
        }
    }

    pub fn emitted_count(&self) -> u64 {
        self.emitted_count
    }

    /// Emit the next point `L_{k+1}`, drawing the exponential increment
    /// from `rng`.
    #[inline]
    pub fn next_point(&mut self, rng: &mut RngStream) -> f64 {
        self.next_with_increment(rng.exponential())
    }

    /// Emit the next point from a caller-supplied increment `y`; test
    /// hook for forced sequences.
    #[inline]
    pub fn next_with_increment(&mut self, y: f64) -> f64 {
        self.cumulative_sum += y;
        self.emitted_count += 1;
        self.cumulative_sum.powf(self.disorder.s())
    }
}

/// Surplus of a conditioned edge weight: the law of `E^s - r | E^s > r`
/// where `E` is exponential with mean `scale`, via the inverse transform
/// `X = (r^{1/s} + scale * E')^s - r` with `E'` a unit exponential.
pub fn sample_residual_edge(d: Disorder, r: f64, scale: f64, rng: &mut RngStream) -> f64 {
    residual_edge_from_exp(d, r, scale, rng.exponential())
}

/// Deterministic core of [`sample_residual_edge`] for a given unit
/// exponential draw `e1`.
#[inline]
pub fn residual_edge_from_exp(d: Disorder, r: f64, scale: f64, e1: f64) -> f64 {
    debug_assert!(r >= 0.0 && scale > 0.0);
    (r.powf(d.inv_s()) + scale * e1).powf(d.s()) - r
}

/// Standard Gumbel draw `G = -log(-log U)` (max convention, mode 0,
/// mean the Euler-Mascheroni constant).
pub fn sample_gumbel(rng: &mut RngStream) -> f64 {
    gumbel_from_uniform(rng.uniform())
}

#[inline]
pub fn gumbel_from_uniform(u: f64) -> f64 {
    -(-u.ln()).ln()
}

const EXPANSION_LIMIT: f64 = 1e18;

/// Find the smallest `t >= t0` with `cumhaz(t) = target`, where `cumhaz`
/// is nondecreasing, continuous, and zero at `t0`. Returns `None` when
/// the hazard is bounded above by `target` (no event).
///
/// Pure bisection; see [`invert_hazard_newton`] when a derivative is
/// available.
pub fn invert_hazard<F>(cumhaz: F, t0: f64, target: f64) -> Result<Option<f64>, HazardError>
where
    F: Fn(f64) -> f64,
{
    invert_hazard_impl(|t| (cumhaz(t), f64::NAN), t0, target, default_step(t0))
}

/// Hazard inversion with Newton acceleration: `eval` returns the
/// cumulative hazard together with its derivative (the rate). A NaN or
/// non-positive rate at a probe point falls back to bisection for that
/// step.
pub fn invert_hazard_newton<F>(
    eval: F,
    t0: f64,
    target: f64,
    initial_step: f64,
) -> Result<Option<f64>, HazardError>
where
    F: Fn(f64) -> (f64, f64),
{
    invert_hazard_impl(eval, t0, target, initial_step)
}

fn default_step(t0: f64) -> f64 {
    1e-3 * t0.abs().max(1.0)
}

fn invert_hazard_impl<F>(
    eval: F,
    t0: f64,
    target: f64,
    initial_step: f64,
) -> Result<Option<f64>, HazardError>
where
    F: Fn(f64) -> (f64, f64),
{
    debug_assert!(target > 0.0);
    // Bracket expansion.
    let mut lo = t0;
    let mut flo = 0.0_f64;
    let mut step = initial_step.max(1e-300);
    let mut hi;
    let mut fhi;
    loop {
        hi = lo + step;
        let (f, _) = eval(hi);
        if f < flo - 1e-12 * flo.abs().max(1.0) {
            return Err(HazardError::NonMonotone(hi));
        }
        if f >= target {
            fhi = f;
            break;
        }
        lo = hi;
        flo = f;
        step *= 2.0;
        if hi - t0 > EXPANSION_LIMIT {
            return Ok(None);
        }
    }
    // Newton iteration clipped to the bracket, bisection fallback.
    let tol_of = |t: f64| 1e-12 * t.abs().max(1.0);
    let mut t = 0.5 * (lo + hi);
    for _ in 0..200 {
        if hi - lo <= tol_of(hi) {
            break;
        }
        let (f, rate) = eval(t);
        if f < flo - 1e-9 * flo.abs().max(1.0) || f > fhi + 1e-9 * fhi.abs().max(1.0) {
            return Err(HazardError::NonMonotone(t));
        }
        if f >= target {
            hi = t;
            fhi = f;
        } else {
            lo = t;
            flo = f;
        }
        let mut next = if rate.is_finite() && rate > 0.0 {
            t - (f - target) / rate
        } else {
            f64::NAN
        };
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        t = next;
    }
    Ok(Some(0.5 * (lo + hi)))
}
