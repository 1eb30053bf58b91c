//! Asymptotic density evolution: the erasure-probability recursion, decoding
//! thresholds, and the small-erasure stability bound.
//!
//! In the infinite-frame limit the peeling receiver is tracked by a scalar
//! recursion on `p`, the probability that an edge of the frame graph carries
//! an unknown segment:
//!
//! ```text
//! p_{i+1} = f(p_i, G) = 1 - exp( -(G/k) * Σ_h P_h * Σ_t a_t^(h) p_i^t (1-p_i)^(n_h-1-t) )
//! ```
//!
//! starting from `p_0 = 1`. The decoding threshold `G*` is the largest load
//! `G` for which the recursion is driven to zero. It is bracketed by
//! bisection using a dense fixed-point scan (`f(x, G) < x` on a grid of
//! `(0, 1]`) with every verdict cross-checked against an actual recursion
//! run; the two criteria disagreeing decisively is reported as an error
//! rather than silently resolved.

use alloc::vec::Vec;

use crate::ensemble::EnsembleStats;
use crate::{Error, Result};

/// Convergence tolerance for [`de_run`]: the recursion has "reached zero"
/// when `p` falls below this.
pub const DEFAULT_DE_TOL: f64 = 1e-10;

/// Default iteration budget for [`de_run`].
pub const DEFAULT_DE_MAX_ITER: usize = 10_000;

/// Default bisection tolerance for [`threshold`], fine enough to resolve
/// four decimal places of `G*`.
pub const DEFAULT_BISECT_TOL: f64 = 1e-5;

/// One step of the recursion: the updated edge-erasure probability
/// `f(p, G)` for offered load `g_load`.
pub fn de_step(stats: &EnsembleStats, g_load: f64, p: f64) -> f64 {
    debug_assert!((0.0..=1.0).contains(&p));
    let q = 1.0 - p;
    let mut sum = 0.0;
    for (h, a) in stats.a_coeffs.iter().enumerate() {
        // Σ_t a_t p^t (1-p)^(n-1-t) with running powers of both factors:
        // O(n) per component (lengths are capped at 16).
        let n = stats.lengths[h];
        let mut q_pow = [0.0f64; 16];
        let mut qp = 1.0;
        for slot in q_pow.iter_mut().take(n) {
            *slot = qp;
            qp *= q;
        }
        let mut poly = 0.0;
        let mut p_pow = 1.0;
        for (t, &a_t) in a.iter().enumerate() {
            if a_t != 0.0 {
                poly += a_t * p_pow * q_pow[n - 1 - t];
            }
            p_pow *= p;
        }
        sum += stats.pmf[h] * poly;
    }
    // -expm1(-y) = 1 - e^(-y) without cancellation for small y, which is
    // exactly the regime that decides stability near p = 0.
    -libm::expm1(-(g_load / stats.k as f64) * sum)
}

/// Outcome of a density-evolution run.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DeStatus {
    /// `p` fell below the convergence tolerance: decoding succeeds.
    ConvergedToZero,
    /// `p` stopped moving while still above the tolerance: the recursion is
    /// stuck at a nonzero fixed point and decoding fails.
    Stalled,
    /// The iteration budget ran out before either verdict.
    Indeterminate,
}

/// Trajectory and verdict of one density-evolution run.
#[derive(Clone, Debug)]
pub struct DeResult {
    /// The iterates `p_0 = 1, p_1, ..., p_T`.
    pub trajectory: Vec<f64>,
    /// How the run ended.
    pub status: DeStatus,
}

impl DeResult {
    /// True iff the run certified successful decoding.
    pub fn converged_to_zero(&self) -> bool {
        self.status == DeStatus::ConvergedToZero
    }

    /// Number of iterations performed (`T`).
    pub fn iterations(&self) -> usize {
        self.trajectory.len() - 1
    }

    /// Final iterate `p_T`.
    pub fn final_p(&self) -> f64 {
        *self.trajectory.last().expect("trajectory holds p_0")
    }
}

/// Runs the recursion from `p_0 = 1` until it converges to zero, stalls at a
/// nonzero fixed point, or exhausts `max_iter`.
///
/// A stall is declared when successive iterates move by less than
/// `tol * 1e-2` while still at or above `tol`, i.e. well before the budget
/// runs out in clearly non-converging cases.
pub fn de_run(stats: &EnsembleStats, g_load: f64, tol: f64, max_iter: usize) -> DeResult {
    let mut trajectory = Vec::with_capacity(64);
    let mut p = 1.0;
    trajectory.push(p);
    let mut status = DeStatus::Indeterminate;
    for _ in 0..max_iter {
        let next = de_step(stats, g_load, p);
        trajectory.push(next);
        if next < tol {
            status = DeStatus::ConvergedToZero;
            break;
        }
        if (next - p).abs() < tol * 1e-2 {
            status = DeStatus::Stalled;
            break;
        }
        p = next;
    }
    DeResult { trajectory, status }
}

/// Small-erasure stability limit of iterative decoding.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum StabilityBound {
    /// Loads above this value certainly cannot be decoded: `G* <= k/(2 Ā₂)`.
    Bounded(f64),
    /// Every component code has minimum distance at least 3 (`Ā₂ = 0`); the
    /// zero fixed point is stable at any load.
    Unbounded,
}

impl StabilityBound {
    /// The bound as a float where one exists.
    pub fn value(&self) -> Option<f64> {
        match self {
            StabilityBound::Bounded(b) => Some(*b),
            StabilityBound::Unbounded => None,
        }
    }
}

impl core::fmt::Display for StabilityBound {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            StabilityBound::Bounded(b) => write!(f, "{b}"),
            StabilityBound::Unbounded => write!(f, "unbounded"),
        }
    }
}

/// Stability bound `k / (2 Ā₂)` of an ensemble.
///
/// The slope of `f(·, G)` at `p = 0` is `(2 G / k) Ā₂`; the zero fixed point
/// attracts only while that slope stays below 1. With no weight-2 codewords
/// anywhere in the ensemble the slope is zero and the bound disappears.
pub fn stability_bound(stats: &EnsembleStats) -> StabilityBound {
    if stats.avg_a2 == 0.0 {
        StabilityBound::Unbounded
    } else {
        StabilityBound::Bounded(stats.k as f64 / (2.0 * stats.avg_a2))
    }
}

/// Decoding-threshold report.
#[derive(Clone, Copy, Debug)]
pub struct ThresholdReport {
    /// Estimated threshold `G*` (erlangs of logical load per slot).
    pub threshold: f64,
    /// The stability bound for the same ensemble; always `>= threshold`.
    pub stability_bound: StabilityBound,
    /// Width of the final bisection bracket (0 when the threshold sits on
    /// the search cap itself).
    pub bisection_width: f64,
}

/// Tunable knobs for [`threshold_with`]. [`Default`] gives the
/// full-resolution settings used for reported numbers; optimizers use a
/// coarser profile for speed.
#[derive(Clone, Copy, Debug)]
pub struct ThresholdOptions {
    /// Bisection stops when the bracket is narrower than this.
    pub tol: f64,
    /// Uniform grid resolution on (0, 1] for the fixed-point scan.
    pub grid_points: usize,
    /// Extra geometrically spaced scan points in [1e-12, 1e-4), where
    /// stability is decided.
    pub refine_points: usize,
    /// Iteration budget for the cross-checking recursion runs.
    pub de_max_iter: usize,
}

impl Default for ThresholdOptions {
    fn default() -> Self {
        ThresholdOptions {
            tol: DEFAULT_BISECT_TOL,
            grid_points: 10_000,
            refine_points: 64,
            de_max_iter: DEFAULT_DE_MAX_ITER,
        }
    }
}

impl ThresholdOptions {
    /// Cheap profile for use inside optimization loops: resolves `G*` to
    /// about three decimals at a tenth of the cost.
    pub fn coarse() -> Self {
        ThresholdOptions {
            tol: 1e-4,
            grid_points: 1_000,
            refine_points: 24,
            de_max_iter: 600,
        }
    }
}

/// Computes the decoding threshold at default resolution.
pub fn threshold(stats: &EnsembleStats) -> Result<ThresholdReport> {
    threshold_with(stats, &ThresholdOptions::default())
}

/// Computes the decoding threshold `G*` by bisection over the offered load.
///
/// The search bracket is `[0, cap]` with `cap = min(stability bound, 1)`;
/// loads above 1 can never fully decode (each decoded burst consumes `k`
/// slots of capacity), and loads above the stability bound provably stall.
/// A short pre-scan verifies that admissibility is monotone across the
/// bracket — the expected single-crossing structure — before bisecting.
pub fn threshold_with(stats: &EnsembleStats, opts: &ThresholdOptions) -> Result<ThresholdReport> {
    if !(opts.tol > 0.0) {
        return Err(Error::BadArgument {
            reason: "bisection tolerance must be positive",
        });
    }
    let sb = stability_bound(stats);
    let cap = match sb {
        StabilityBound::Bounded(b) => b.min(1.0),
        StabilityBound::Unbounded => 1.0,
    };

    // Pre-scan: admissibility must look like true..true,false..false.
    const PRESCAN: usize = 12;
    let mut first_false = None;
    for i in 1..=PRESCAN {
        let g = cap * i as f64 / PRESCAN as f64;
        let ok = admissible(stats, g, opts)?;
        match (ok, first_false) {
            (false, None) => first_false = Some(i),
            (true, Some(_)) => return Err(Error::NonMonotoneAdmissibility),
            _ => {}
        }
    }

    let Some(i0) = first_false else {
        // Admissible all the way to the cap: the threshold is the cap
        // itself (single-parity-check ensembles meet their stability bound
        // exactly).
        return Ok(ThresholdReport {
            threshold: cap,
            stability_bound: sb,
            bisection_width: 0.0,
        });
    };

    let mut lo = cap * (i0 - 1) as f64 / PRESCAN as f64;
    let mut hi = cap * i0 as f64 / PRESCAN as f64;
    while hi - lo > opts.tol {
        let mid = 0.5 * (lo + hi);
        if admissible(stats, mid, opts)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(ThresholdReport {
        threshold: 0.5 * (lo + hi),
        stability_bound: sb,
        bisection_width: hi - lo,
    })
}

/// Decides whether load `g` is admissible (the recursion reaches zero).
///
/// Primary criterion: `f(x, g) < x` for every `x` on the scan grid. A full
/// recursion run cross-checks the verdict; `Err` is returned only when the
/// two disagree *decisively* (a clear fixed-point violation against a
/// converged run, or a comfortably contracting map against a run stalled
/// well away from zero). Indeterminate runs defer to the grid.
fn admissible(stats: &EnsembleStats, g: f64, opts: &ThresholdOptions) -> Result<bool> {
    const DECISIVE: f64 = 1e-9;
    // Signed worst margin of x - f(x, g) over the grid; positive means the
    // map is strictly contracting toward zero everywhere. The scan stops
    // early on a decisive violation — every decision below depends only on
    // the margin's relation to {-DECISIVE, 0, DECISIVE}.
    let mut worst = f64::INFINITY;
    'scan: {
        if opts.refine_points > 0 {
            // Geometric sweep of the near-zero region, where the uniform
            // grid has no resolution but stability is decided.
            let lo: f64 = 1e-12;
            let hi: f64 = 1e-4;
            let ratio = libm::pow(hi / lo, 1.0 / opts.refine_points as f64);
            let mut x = lo;
            while x < hi {
                worst = worst.min(x - de_step(stats, g, x));
                if worst < -DECISIVE {
                    break 'scan;
                }
                x *= ratio;
            }
        }
        for i in 1..=opts.grid_points {
            let x = i as f64 / opts.grid_points as f64;
            worst = worst.min(x - de_step(stats, g, x));
            if worst < -DECISIVE {
                break 'scan;
            }
        }
    }
    let grid_ok = worst > 0.0;

    let run = de_run(stats, g, DEFAULT_DE_TOL, opts.de_max_iter);
    match run.status {
        DeStatus::Indeterminate => Ok(grid_ok),
        DeStatus::ConvergedToZero => {
            if !grid_ok && worst < -DECISIVE {
                // The map provably has a fixed point above zero, yet the
                // recursion claims to pass it.
                Err(Error::AdmissibilityConflict { load: g })
            } else {
                Ok(grid_ok)
            }
        }
        DeStatus::Stalled => {
            if grid_ok && worst > DECISIVE && run.final_p() >= 1e-6 {
                // Comfortably contracting map, yet the recursion froze far
                // from zero.
                Err(Error::AdmissibilityConflict { load: g })
            } else {
                Ok(grid_ok)
            }
        }
    }
}

/// Classical slotted-ALOHA throughput without interference cancellation:
/// `S = G e^{-G}` (a slot delivers a packet only when exactly one user
/// picked it). Peaks at `1/e ≈ 0.37` for `G = 1`; the baseline every
/// IC-based scheme is measured against.
pub fn slotted_aloha_throughput(g_load: f64) -> f64 {
    g_load * libm::exp(-g_load)
}

/// Truncated slot-degree distribution in the large-frame limit.
#[derive(Clone, Debug)]
pub struct DegreePmf {
    /// `pmf[d]` = probability that a slot hears exactly `d` segments,
    /// `d = 0 ..= d_max`.
    pub pmf: Vec<f64>,
    /// Probability mass beyond `d_max`.
    pub tail: f64,
    /// The Poisson mean `(n̄ / k) * G`.
    pub mean: f64,
}

/// Limiting slot-degree distribution: with `M = G N / k` users each placing
/// `n̄` segments on average into `N` slots, a slot's degree tends to
/// `Poisson((n̄/k) G)` as the frame grows.
pub fn sum_node_degree_pmf(g_load: f64, k: usize, mean_length: f64, d_max: usize) -> DegreePmf {
    let mean = mean_length * g_load / k as f64;
    let mut pmf = Vec::with_capacity(d_max + 1);
    let mut term = libm::exp(-mean);
    let mut cum = 0.0;
    for d in 0..=d_max {
        if d > 0 {
            term *= mean / d as f64;
        }
        pmf.push(term);
        cum += term;
    }
    DegreePmf {
        pmf,
        tail: (1.0 - cum).max(0.0),
        mean,
    }
}
