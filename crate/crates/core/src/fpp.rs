//! Exact simulation of the shortest-weight-graph flow on the complete
//! graph, without materializing the edge set.
//!
//! Everything runs in rescaled time (edge mean n-1). Between events the
//! growth and collision intensities have closed-form cumulative hazards,
//! so the next event time is an exact inversion of an Exp(1) draw. The
//! per-event sums are evaluated three ways depending on m = 1/s:
//! integer m <= 6 uses binomial power sums (O(m^2) per evaluation),
//! m = 1/2 uses a sqrt loop over the pair list, anything else a powf
//! loop.

use crate::limits::{malthusian, Disorder};
use crate::sampling::{invert_hazard_newton, HazardError, RngStream};
use std::cell::Cell;
use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::io::Write;
use thiserror::Error;

/// Numerical envelope: outside this range the kernel powers over- or
/// underflow in double precision.
pub const S_MIN: f64 = 0.05;
pub const S_MAX: f64 = 20.0;

/// Largest n for which the oracle materializes all n(n-1)/2 weights.
pub const ORACLE_MAX_N: usize = 2000;

const INT_KERNEL_MAX: u32 = 6;

#[derive(Debug, Error)]
pub enum FppError {
    #[error("need n >= 2, got {0}")]
    BadN(usize),
    #[error("s = {0} outside the supported range [{S_MIN}, {S_MAX}]")]
    SOutOfRange(f64),
    #[error("oracle limited to n <= {ORACLE_MAX_N}, got {0}")]
    TooLargeForOracle(usize),
    #[error("hazard inversion failed: {0}")]
    Hazard(#[from] HazardError),
    #[error("cumulative hazard failed to reach the target (t0 = {t0}, target = {target})")]
    NoEvent { t0: f64, target: f64 },
}

/// One explored vertex: birth time in rescaled units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Member {
    pub label: u32,
    pub birth_time: f64,
    pub generation: u32,
}

/// The explored set of one flow, in exploration (= birth time) order.
#[derive(Debug, Clone)]
pub struct ClusterState {
    pub cluster_tag: u8,
    pub members: Vec<Member>,
}

impl ClusterState {
    pub fn size(&self) -> usize {
        self.members.len()
    }
}

/// Result of one two-source race.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoSourceOutcome {
    pub n: u64,
    pub s: f64,
    /// Collision time, rescaled units.
    pub t12: f64,
    /// W_n = 2 T12.
    pub cost_rescaled: f64,
    /// C = W_n / (n-1)^s.
    pub cost_original: f64,
    /// n^s C - (1/lambda) log n.
    pub recentered_weight: f64,
    pub hopcount: u32,
    pub g1: u32,
    pub g2: u32,
    pub events: u64,
    pub activation_diag: u64,
}

pub const CSV_HEADER: &str =
    "n,s,seed,replicate,T12,W_n,C,recentered_weight,H_n,G1,G2,events,activation_diag";

impl TwoSourceOutcome {
    pub fn write_csv_row<W: Write>(&self, mut w: W, seed: u64, replicate: u64) -> std::io::Result<()> {
        writeln!(
            w,
            "{},{:.16e},{},{},{:.16e},{:.16e},{:.16e},{:.16e},{},{},{},{},{}",
            self.n,
            self.s,
            seed,
            replicate,
            self.t12,
            self.cost_rescaled,
            self.cost_original,
            self.recentered_weight,
            self.hopcount,
            self.g1,
            self.g2,
            self.events,
            self.activation_diag
        )
    }
}

/// Optional instrumentation for a race.
#[derive(Debug, Clone, Copy, Default)]
pub struct RaceOptions {
    /// Recompute both rates from scratch at every event and track the
    /// worst relative disagreement with the incremental values.
    pub hazard_check: bool,
    /// Record the explored-set size at each event and the times of
    /// positive activation flips.
    pub record_trace: bool,
}

#[derive(Debug, Clone, Default)]
pub struct RaceDebug {
    /// |S| just before each event.
    pub k_sequence: Vec<u32>,
    /// Event times at which the Bernoulli(k/n) diagnostic came up true.
    pub activation_times: Vec<f64>,
    pub max_hazard_rel_err: f64,
}

#[derive(Debug, Clone, Copy)]
enum Kernel {
    /// m = 1/s is a small integer; power sums give O(m^2) evaluations.
    IntPow(u32),
    /// m = 1/2 (s = 2).
    Sqrt,
    General,
}

struct RaceState {
    n: usize,
    d: Disorder,
    m: f64,
    kernel: Kernel,
    clusters: [ClusterState; 2],
    /// P[c][q] = sum of birth_time^q over cluster c (IntPow only).
    power_sums: [Vec<f64>; 2],
    /// Pairwise birth-time sums T_i + T_j, i in S1, j in S2 (non-IntPow).
    sigma: Vec<f64>,
    /// sum over pairs of (2 t0 - sigma)^m at the current event start,
    /// carried forward incrementally (non-IntPow).
    coll_power_base: f64,
    unexplored: Vec<u32>,
    binom: Vec<Vec<f64>>,
}

struct EventContext {
    all_moments: Vec<f64>,
    pair_moments: Vec<f64>,
    growth_base: f64,
    coll_base: f64,
}

/// One-pass sum of v^m over positive values.
fn power_sum(vals: impl Iterator<Item = f64>, m: f64) -> f64 {
    if (m - 0.5).abs() < 1e-12 {
        vals.map(f64::sqrt).sum()
    } else {
        vals.map(|v| v.powf(m)).sum()
    }
}

/// One-pass (sum of v^m, sum of v^(m-1)).
fn fused_sums(vals: impl Iterator<Item = f64>, m: f64) -> (f64, f64) {
    let mut hi = 0.0;
    let mut lo = 0.0;
    if (m - 0.5).abs() < 1e-12 {
        for v in vals {
            let r = v.sqrt();
            hi += r;
            lo += 1.0 / r;
        }
    } else {
        for v in vals {
            let p = v.powf(m);
            hi += p;
            lo += p / v;
        }
    }
    (hi, lo)
}

fn binomial_rows(m: usize) -> Vec<Vec<f64>> {
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(m + 1);
    rows.push(vec![1.0]);
    for deg in 1..=m {
        let prev = &rows[deg - 1];
        let mut row = vec![1.0; deg + 1];
        for q in 1..deg {
            row[q] = prev[q - 1] + prev[q];
        }
        rows.push(row);
    }
    rows
}

fn choose_kernel(d: Disorder) -> Kernel {
    let m = d.inv_s();
    let rounded = m.round();
    if (m - rounded).abs() < 1e-9 && (1.0..=INT_KERNEL_MAX as f64).contains(&rounded) {
        Kernel::IntPow(rounded as u32)
    } else if (m - 0.5).abs() < 1e-9 {
        Kernel::Sqrt
    } else {
        Kernel::General
    }
}

impl RaceState {
    fn new(n: usize, d: Disorder, sources: u8) -> Result<Self, FppError> {
        if n < 2 {
            return Err(FppError::BadN(n));
        }
        if !(S_MIN..=S_MAX).contains(&d.s()) {
            return Err(FppError::SOutOfRange(d.s()));
        }
        let kernel = choose_kernel(d);
        let m_int = match kernel {
            Kernel::IntPow(m) => m as usize,
            _ => 1,
        };
        let mut state = RaceState {
            n,
            d,
            m: d.inv_s(),
            kernel,
            clusters: [
                ClusterState {
                    cluster_tag: 1,
                    members: Vec::new(),
                },
                ClusterState {
                    cluster_tag: 2,
                    members: Vec::new(),
                },
            ],
            power_sums: [vec![0.0; m_int + 1], vec![0.0; m_int + 1]],
            sigma: Vec::new(),
            coll_power_base: 0.0,
            unexplored: ((sources as u32)..n as u32).collect(),
            binom: binomial_rows(m_int),
        };
        for c in 0..sources as usize {
            state.add_member(
                c,
                Member {
                    label: c as u32,
                    birth_time: 0.0,
                    generation: 0,
                },
            );
        }
        Ok(state)
    }

    fn k(&self) -> usize {
        self.clusters[0].size() + self.clusters[1].size()
    }

    fn unexplored_count(&self) -> usize {
        self.unexplored.len()
    }

    fn add_member(&mut self, cluster: usize, member: Member) {
        if let Kernel::IntPow(m) = self.kernel {
            let mut acc = 1.0;
            for q in 0..=m as usize {
                self.power_sums[cluster][q] += acc;
                acc *= member.birth_time;
            }
        } else {
            let other = &self.clusters[1 - cluster];
            self.sigma
                .extend(other.members.iter().map(|o| member.birth_time + o.birth_time));
        }
        self.clusters[cluster].members.push(member);
    }

    /// Q[q] = sum over pairs of (T_i + T_j)^q, from per-cluster power sums.
    fn pair_moments(&self, m: usize) -> Vec<f64> {
        let (p1, p2) = (&self.power_sums[0], &self.power_sums[1]);
        (0..=m)
            .map(|q| {
                (0..=q)
                    .map(|r| self.binom[q][r] * p1[r] * p2[q - r])
                    .sum()
            })
            .collect()
    }

    /// sum_q binom(deg, q) * t^(deg - q) * (-1)^q * moments[q].
    fn moment_poly(&self, deg: usize, t: f64, moments: &[f64]) -> f64 {
        let row = &self.binom[deg];
        let mut total = 0.0;
        let mut sign = 1.0;
        for q in 0..=deg {
            total += sign * row[q] * t.powi((deg - q) as i32) * moments[q];
            sign = -sign;
        }
        total
    }

    fn ages(&self, t: f64) -> impl Iterator<Item = f64> + '_ {
        self.clusters
            .iter()
            .flat_map(|c| c.members.iter())
            .map(move |v| t - v.birth_time)
    }

    /// Per-event precomputation: moments and the t0 baselines, constant
    /// across the root-finding probes of one event.
    fn event_context(&self, t0: f64, two_source: bool) -> EventContext {
        match self.kernel {
            Kernel::IntPow(m) => {
                let m = m as usize;
                let all: Vec<f64> = (0..=m)
                    .map(|q| self.power_sums[0][q] + self.power_sums[1][q])
                    .collect();
                let pair = if two_source {
                    self.pair_moments(m)
                } else {
                    Vec::new()
                };
                EventContext {
                    growth_base: self.moment_poly(m, t0, &all),
                    coll_base: if two_source {
                        self.moment_poly(m, 2.0 * t0, &pair)
                    } else {
                        0.0
                    },
                    all_moments: all,
                    pair_moments: pair,
                }
            }
            _ => EventContext {
                all_moments: Vec::new(),
                pair_moments: Vec::new(),
                growth_base: power_sum(self.ages(t0), self.m),
                coll_base: self.coll_power_base,
            },
        }
    }

    /// Growth cumulative hazard over [t0, t] and rate at t.
    fn growth_eval(&self, t: f64, ctx: &EventContext) -> (f64, f64) {
        let u = self.unexplored_count() as f64;
        if u == 0.0 {
            return (0.0, 0.0);
        }
        let scale = u / (self.n - 1) as f64;
        match self.kernel {
            Kernel::IntPow(m) => {
                let m = m as usize;
                let cum = scale * (self.moment_poly(m, t, &ctx.all_moments) - ctx.growth_base);
                let rate = scale / self.d.s() * self.moment_poly(m - 1, t, &ctx.all_moments);
                (cum, rate)
            }
            _ => {
                let (hi, lo) = fused_sums(self.ages(t), self.m);
                (scale * (hi - ctx.growth_base), scale / self.d.s() * lo)
            }
        }
    }

    /// Collision cumulative hazard over [t0, t] and rate at t.
    fn collision_eval(&self, t: f64, ctx: &EventContext) -> (f64, f64) {
        if self.clusters[0].members.is_empty() || self.clusters[1].members.is_empty() {
            return (0.0, 0.0);
        }
        let scale = 1.0 / (self.n - 1) as f64;
        match self.kernel {
            Kernel::IntPow(m) => {
                let m = m as usize;
                let cum =
                    scale * (self.moment_poly(m, 2.0 * t, &ctx.pair_moments) - ctx.coll_base);
                let rate =
                    2.0 * scale / self.d.s() * self.moment_poly(m - 1, 2.0 * t, &ctx.pair_moments);
                (cum, rate)
            }
            _ => {
                let (hi, lo) = fused_sums(self.sigma.iter().map(|&s| 2.0 * t - s), self.m);
                (
                    scale * (hi - ctx.coll_base),
                    2.0 * scale / self.d.s() * lo,
                )
            }
        }
    }

    /// Rates recomputed from first principles (powf loops), for the
    /// hazard-check mode.
    fn naive_rates(&self, t: f64) -> (f64, f64) {
        let p = self.m - 1.0;
        let u = self.unexplored_count() as f64;
        let g = u / (self.d.s() * (self.n - 1) as f64)
            * self
                .clusters
                .iter()
                .flat_map(|c| c.members.iter())
                .map(|v| (t - v.birth_time).powf(p))
                .sum::<f64>();
        let mut pair_sum = 0.0;
        for i in &self.clusters[0].members {
            for j in &self.clusters[1].members {
                pair_sum += (2.0 * t - i.birth_time - j.birth_time).powf(p);
            }
        }
        let c = 2.0 / (self.d.s() * (self.n - 1) as f64) * pair_sum;
        (g, c)
    }

    /// Pick the growth parent with probability proportional to
    /// (t - T_v)^{1/s - 1} across both clusters.
    fn choose_parent(&self, t: f64, rng: &mut RngStream) -> (usize, usize) {
        let p = self.m - 1.0;
        let weight = |v: &Member| {
            let w = (t - v.birth_time).powf(p);
            if w.is_finite() {
                w
            } else {
                f64::MAX
            }
        };
        let total: f64 = self
            .clusters
            .iter()
            .flat_map(|c| c.members.iter())
            .map(weight)
            .sum();
        let mut remaining = rng.uniform() * total;
        for (ci, cluster) in self.clusters.iter().enumerate() {
            for (vi, v) in cluster.members.iter().enumerate() {
                remaining -= weight(v);
                if remaining <= 0.0 {
                    return (ci, vi);
                }
            }
        }
        // Round-off spill: last member.
        (1, self.clusters[1].members.len() - 1)
    }

    /// Pick the colliding pair with probability proportional to
    /// (2t - T_i - T_j)^{1/s - 1}. One O(|S1||S2|) pass, final event only.
    fn choose_pair(&self, t: f64, rng: &mut RngStream) -> (usize, usize) {
        let p = self.m - 1.0;
        let weight = |i: &Member, j: &Member| {
            let w = (2.0 * t - i.birth_time - j.birth_time).powf(p);
            if w.is_finite() {
                w
            } else {
                f64::MAX
            }
        };
        let mut total = 0.0;
        for i in &self.clusters[0].members {
            for j in &self.clusters[1].members {
                total += weight(i, j);
            }
        }
        let mut remaining = rng.uniform() * total;
        for (ii, i) in self.clusters[0].members.iter().enumerate() {
            for (ji, j) in self.clusters[1].members.iter().enumerate() {
                remaining -= weight(i, j);
                if remaining <= 0.0 {
                    return (ii, ji);
                }
            }
        }
        (
            self.clusters[0].members.len() - 1,
            self.clusters[1].members.len() - 1,
        )
    }
}

enum StopRule {
    Collision,
    Target(u32),
}

/// Solve cumhaz(t) = target for a concave increasing cumulative hazard
/// (rates nonincreasing between events, which holds for s >= 1): Newton
/// from the left never overshoots, so every probe except a too-long
/// first step makes monotone progress. `eval` returns (cum, rate).
fn invert_concave<F: Fn(f64) -> (f64, f64)>(
    eval: F,
    t0: f64,
    target: f64,
    initial_step: f64,
) -> Result<f64, FppError> {
    let mut t_low = t0;
    let mut f_low = 0.0;
    let mut high: Option<f64> = None;
    let mut t = t0 + initial_step;
    for _ in 0..200 {
        let (f, rate) = eval(t);
        if f < f_low {
            return Err(FppError::Hazard(HazardError::NonMonotone(t)));
        }
        if f > target {
            high = Some(t);
            t = 0.5 * (t_low + t);
            if t - t_low <= 1e-12 * t.abs().max(1.0) {
                return Ok(t);
            }
            continue;
        }
        t_low = t;
        f_low = f;
        let step = if rate.is_finite() && rate > 0.0 {
            (target - f) / rate
        } else {
            // Infinite rate only at a birth-time singularity: nudge.
            1e-3 * (t - t0)
        };
        let mut next = t + step;
        if let Some(h) = high {
            if next >= h {
                next = 0.5 * (t + h);
            }
        }
        // Converged: the last evaluated point stands in for the root.
        if next - t <= 1e-12 * next.abs().max(1.0) {
            return Ok(t);
        }
        t = next;
    }
    Ok(t)
}

struct RaceResult {
    state: RaceState,
    stop_time: f64,
    /// Collision pair (cluster-1 index, cluster-2 index) or the found
    /// target member (cluster index, member index).
    hit: (usize, usize),
    events: u64,
    activation_diag: u64,
    debug: RaceDebug,
}

fn run_race(
    n: usize,
    d: Disorder,
    rng: &mut RngStream,
    stop: StopRule,
    opts: RaceOptions,
) -> Result<RaceResult, FppError> {
    let sources = match stop {
        StopRule::Collision => 2,
        StopRule::Target(_) => 1,
    };
    let mut state = RaceState::new(n, d, sources)?;
    let lc = malthusian(d);
    let mut t0 = 0.0;
    let mut events = 0u64;
    let mut activation_diag = 0u64;
    let mut debug = RaceDebug::default();
    let mut prev_rate = f64::NAN;
    loop {
        events += 1;
        let k = state.k();
        if opts.record_trace {
            debug.k_sequence.push(k as u32);
        }
        let target = rng.exponential();
        let two_source = matches!(stop, StopRule::Collision);
        let ctx = state.event_context(t0, two_source);
        // Cache the split rates of the latest probe so the final probe
        // does not have to be repeated after inversion.
        let cache = Cell::new((f64::NAN, 0.0, 0.0, 0.0));
        let eval = |t: f64| {
            let (gc, gr) = state.growth_eval(t, &ctx);
            let (cc, cr) = if two_source {
                state.collision_eval(t, &ctx)
            } else {
                (0.0, 0.0)
            };
            cache.set((t, gr, cr, cc));
            (gc + cc, gr + cr)
        };
        // First probe: half the constant-rate prediction from the last
        // event's total rate, falling back to the generic scale guess.
        let step = if prev_rate.is_finite() && prev_rate > 0.0 {
            0.5 * target / prev_rate
        } else {
            lc.beta1 / (k as f64).sqrt()
        };
        let t_star = if state.m <= 1.0 {
            invert_concave(&eval, t0, target, step)?
        } else {
            invert_hazard_newton(&eval, t0, target, step)?
                .ok_or(FppError::NoEvent { t0, target })?
        };
        let (cached_t, cached_g, cached_c, cached_ccum) = cache.get();
        let (g, c, c_cum) = if cached_t == t_star {
            (cached_g, cached_c, cached_ccum)
        } else {
            let g = state.growth_eval(t_star, &ctx).1;
            let (cc, cr) = if two_source {
                state.collision_eval(t_star, &ctx)
            } else {
                (0.0, 0.0)
            };
            (g, cr, cc)
        };
        prev_rate = g + c;
        if opts.hazard_check {
            let (ng, nc) = state.naive_rates(t_star);
            let rel = |a: f64, b: f64| (a - b).abs() / b.abs().max(1e-300);
            let err = rel(g, ng).max(match stop {
                StopRule::Collision => rel(c, nc),
                StopRule::Target(_) => 0.0,
            });
            debug.max_hazard_rel_err = debug.max_hazard_rel_err.max(err);
        }
        let is_growth = match stop {
            StopRule::Target(_) => true,
            StopRule::Collision => rng.uniform() < g / (g + c),
        };
        if is_growth {
            let (ci, vi) = state.choose_parent(t_star, rng);
            let parent = state.clusters[ci].members[vi];
            if two_source && !matches!(state.kernel, Kernel::IntPow(_)) {
                // Roll the collision base forward to t_star: the old
                // pairs' sum comes from the solved cumulative hazard,
                // the new member contributes one term per member of the
                // opposite cluster.
                let old_pairs = c_cum * (state.n - 1) as f64 + ctx.coll_base;
                let new_pairs = power_sum(
                    state.clusters[1 - ci].members.iter().map(|v| t_star - v.birth_time),
                    state.m,
                );
                state.coll_power_base = old_pairs + new_pairs;
            }
            let slot = rng.below(state.unexplored_count());
            let label = state.unexplored.swap_remove(slot);
            if rng.bernoulli(k as f64 / n as f64) {
                activation_diag += 1;
                if opts.record_trace {
                    debug.activation_times.push(t_star);
                }
            }
            let child = Member {
                label,
                birth_time: t_star,
                generation: parent.generation + 1,
            };
            state.add_member(ci, child);
            if let StopRule::Target(wanted) = stop {
                if label == wanted {
                    return Ok(RaceResult {
                        hit: (ci, state.clusters[ci].members.len() - 1),
                        state,
                        stop_time: t_star,
                        events,
                        activation_diag,
                        debug,
                    });
                }
            }
            t0 = t_star;
        } else {
            let (i, j) = state.choose_pair(t_star, rng);
            return Ok(RaceResult {
                hit: (i, j),
                state,
                stop_time: t_star,
                events,
                activation_diag,
                debug,
            });
        }
    }
}

/// Simultaneous two-source race, stopping at the first collision edge.
pub fn run_two_source(
    n: usize,
    d: Disorder,
    rng: &mut RngStream,
) -> Result<TwoSourceOutcome, FppError> {
    run_two_source_with_options(n, d, rng, RaceOptions::default()).map(|(o, _)| o)
}

pub fn run_two_source_with_options(
    n: usize,
    d: Disorder,
    rng: &mut RngStream,
    opts: RaceOptions,
) -> Result<(TwoSourceOutcome, RaceDebug), FppError> {
    let result = run_race(n, d, rng, StopRule::Collision, opts)?;
    let lc = malthusian(d);
    let (i, j) = result.hit;
    let g1 = result.state.clusters[0].members[i].generation;
    let g2 = result.state.clusters[1].members[j].generation;
    let t12 = result.stop_time;
    let w_n = 2.0 * t12;
    let c = w_n / ((n - 1) as f64).powf(d.s());
    let recentered = (n as f64).powf(d.s()) * c - (n as f64).ln() / lc.lambda;
    Ok((
        TwoSourceOutcome {
            n: n as u64,
            s: d.s(),
            t12,
            cost_rescaled: w_n,
            cost_original: c,
            recentered_weight: recentered,
            hopcount: g1 + g2 + 1,
            g1,
            g2,
            events: result.events,
            activation_diag: result.activation_diag,
        },
        result.debug,
    ))
}

/// Single-source flow from vertex 0, stopped when `target` is explored.
/// Returns (rescaled cost, hopcount, explored cluster, activation diag).
pub fn run_single_source(
    n: usize,
    d: Disorder,
    target: u32,
    rng: &mut RngStream,
) -> Result<(f64, u32, ClusterState, u64), FppError> {
    assert!(target != 0 && (target as usize) < n, "target must differ from the source");
    let result = run_race(n, d, rng, StopRule::Target(target), RaceOptions::default())?;
    let member = result.state.clusters[result.hit.0].members[result.hit.1];
    Ok((
        result.stop_time,
        member.generation,
        result.state.clusters.into_iter().next().unwrap(),
        result.activation_diag,
    ))
}

/// Shortest path 0 -> 1 for explicit edge weights `w(i, j)`.
pub fn dijkstra_with_weights<W: Fn(usize, usize) -> f64>(n: usize, w: W) -> (f64, u32) {
    let mut dist = vec![f64::INFINITY; n];
    let mut hops = vec![0u32; n];
    let mut done = vec![false; n];
    let mut heap: BinaryHeap<Reverse<(u64, usize)>> = BinaryHeap::new();
    // f64 keys bit-ordered: nonnegative floats sort correctly as u64.
    let key = |d: f64| d.to_bits();
    dist[0] = 0.0;
    heap.push(Reverse((key(0.0), 0)));
    while let Some(Reverse((_, v))) = heap.pop() {
        if done[v] {
            continue;
        }
        done[v] = true;
        if v == 1 {
            break;
        }
        for u in 0..n {
            if u == v || done[u] {
                continue;
            }
            let cand = dist[v] + w(v.min(u), v.max(u));
            if cand < dist[u] {
                dist[u] = cand;
                hops[u] = hops[v] + 1;
                heap.push(Reverse((key(cand), u)));
            }
        }
    }
    (dist[1], hops[1])
}

/// Brute-force oracle: sample all edge weights E^s (original units) and
/// return the cost and edge count of the optimal 0 -> 1 path.
pub fn dijkstra_oracle(
    n: usize,
    d: Disorder,
    rng: &mut RngStream,
) -> Result<(f64, u32), FppError> {
    if n < 2 {
        return Err(FppError::BadN(n));
    }
    if n > ORACLE_MAX_N {
        return Err(FppError::TooLargeForOracle(n));
    }
    let mut weights = vec![0.0_f64; n * n];
    for i in 0..n {
        for j in (i + 1)..n {
            weights[i * n + j] = rng.exponential().powf(d.s());
        }
    }
    Ok(dijkstra_with_weights(n, |i, j| weights[i * n + j]))
}
