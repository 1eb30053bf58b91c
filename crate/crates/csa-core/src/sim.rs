//! Finite-frame Monte Carlo simulation of CSA transmission and the
//! iterative interference-cancellation receiver.
//!
//! A frame is a bipartite graph: `M` burst nodes (users), `N` slot nodes,
//! and one edge per transmitted segment. Collisions are destructive — a
//! slot yields nothing while two or more of its segments are unresolved —
//! and cancellation is perfect: once a segment is known it is removed from
//! its slot. Decoding alternates two local rules until fixpoint:
//!
//! 1. a slot with exactly one unresolved segment reveals it;
//! 2. a burst runs MAP erasure decoding over its known segment positions,
//!    and every newly recovered segment is cancelled from its slot.
//!
//! The rules only ever grow the known set, so the process terminates and
//! its fixpoint is schedule-independent; [`peel`] executes it in
//! synchronous rounds.

use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::codes::LinearCode;
use crate::ensemble::{ExplicitEnsemble, RandomEnsemble};
use crate::mix::splitmix64;
use crate::{Error, Result};

/// Which code-attachment model a simulation draws bursts from.
#[derive(Clone, Copy, Debug)]
pub enum SimEnsemble<'a> {
    /// Draw a code from an explicit list by its p.m.f.
    Explicit(&'a ExplicitEnsemble),
    /// Draw a length by its p.m.f., then a generator uniformly among all
    /// qualifying `k x n` matrices (by rejection from uniform nonzero
    /// columns).
    Random(&'a RandomEnsemble),
}

impl SimEnsemble<'_> {
    /// Code dimension.
    pub fn k(&self) -> usize {
        match self {
            SimEnsemble::Explicit(e) => e.k(),
            SimEnsemble::Random(e) => e.k(),
        }
    }

    fn max_length(&self) -> usize {
        match self {
            SimEnsemble::Explicit(e) => e.codes().iter().map(|c| c.n()).max().unwrap_or(0),
            SimEnsemble::Random(e) => e.lengths().iter().copied().max().unwrap_or(0),
        }
    }

    fn pmf(&self) -> &[f64] {
        match self {
            SimEnsemble::Explicit(e) => e.pmf(),
            SimEnsemble::Random(e) => e.pmf(),
        }
    }

    /// Draws one burst's code. The RNG consumption order (type draw, then
    /// matrix rejection draws if any) is part of the reproducibility
    /// contract.
    fn sample_code(&self, rng: &mut ChaCha8Rng) -> LinearCode {
        let u: f64 = rng.gen();
        let pmf = self.pmf();
        let mut acc = 0.0;
        let mut idx = pmf.len() - 1;
        for (i, &p) in pmf.iter().enumerate() {
            acc += p;
            if u < acc {
                idx = i;
                break;
            }
        }
        match self {
            SimEnsemble::Explicit(e) => e.codes()[idx].clone(),
            SimEnsemble::Random(e) => sample_random_generator(e.k(), e.lengths()[idx], rng),
        }
    }
}

/// Uniform draw over qualifying `k x n` generators: sample each column
/// uniformly among the `2^k - 1` nonzero patterns and reject matrices that
/// fail the code invariants (rank deficiency or minimum distance below 2).
/// Acceptance is the qualifying fraction, bounded well away from zero at
/// these sizes, so the loop is short.
fn sample_random_generator(k: usize, n: usize, rng: &mut ChaCha8Rng) -> LinearCode {
    let pattern_count = (1u32 << k) - 1;
    loop {
        let mut rows = vec![0u32; k];
        for j in 0..n {
            let col = rng.gen_range(1..=pattern_count);
            for (i, row) in rows.iter_mut().enumerate() {
                if col & (1 << i) != 0 {
                    *row |= 1 << j;
                }
            }
        }
        if let Ok(code) = LinearCode::new(&rows, n) {
            return code;
        }
    }
}

/// One edge endpoint stored on the slot side.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SlotEntry {
    /// Index of the burst the segment belongs to.
    pub burst: u32,
    /// Which of the burst's `n` coded segments this is.
    pub pos: u8,
}

struct Burst {
    code: LinearCode,
    /// `slots[pos]` = slot carrying coded segment `pos`; entries distinct.
    slots: Vec<usize>,
}

/// A sampled MAC frame: the bipartite burst/slot graph.
pub struct FrameGraph {
    k: usize,
    n_slots: usize,
    bursts: Vec<Burst>,
    slots: Vec<Vec<SlotEntry>>,
}

impl FrameGraph {
    /// Builds a frame directly from per-burst codes and slot choices,
    /// validating consistency (used by tests and custom samplers; the usual
    /// entry point is [`build_frame`]).
    pub fn from_parts(
        k: usize,
        n_slots: usize,
        bursts: impl IntoIterator<Item = (LinearCode, Vec<usize>)>,
    ) -> Result<Self> {
        if n_slots == 0 || n_slots % k != 0 {
            return Err(Error::SlotsNotMultipleOfK { n_slots, k });
        }
        let mut graph = FrameGraph {
            k,
            n_slots,
            bursts: Vec::new(),
            slots: vec![Vec::new(); n_slots],
        };
        for (code, slots) in bursts {
            if code.k() != k {
                return Err(Error::MixedDimensions);
            }
            if code.n() > n_slots {
                return Err(Error::CodeLongerThanFrame {
                    n: code.n(),
                    n_slots,
                });
            }
            if slots.len() != code.n() {
                return Err(Error::BadArgument {
                    reason: "slot list length differs from code length",
                });
            }
            for (pos, &s) in slots.iter().enumerate() {
                if s >= n_slots {
                    return Err(Error::BadArgument {
                        reason: "slot index out of range",
                    });
                }
                if slots[..pos].contains(&s) {
                    return Err(Error::BadArgument {
                        reason: "burst repeats a slot",
                    });
                }
                graph.slots[s].push(SlotEntry {
                    burst: graph.bursts.len() as u32,
                    pos: pos as u8,
                });
            }
            graph.bursts.push(Burst { code, slots });
        }
        Ok(graph)
    }

    /// Number of burst nodes `M`.
    pub fn num_bursts(&self) -> usize {
        self.bursts.len()
    }

    /// Number of slots `N`.
    pub fn n_slots(&self) -> usize {
        self.n_slots
    }

    /// Shared code dimension `k`.
    pub fn k(&self) -> usize {
        self.k
    }

    /// The code burst `b` was encoded with.
    pub fn code(&self, b: usize) -> &LinearCode {
        &self.bursts[b].code
    }

    /// Slot of each coded segment of burst `b` (`slots_of(b)[pos]`).
    pub fn slots_of(&self, b: usize) -> &[usize] {
        &self.bursts[b].slots
    }

    /// Segments transmitted in slot `s`.
    pub fn entries_in(&self, s: usize) -> &[SlotEntry] {
        &self.slots[s]
    }

    /// Total number of edges (transmitted segments).
    pub fn num_edges(&self) -> usize {
        self.bursts.iter().map(|b| b.slots.len()).sum()
    }
}

/// Samples a frame: each of `m` users draws its code from the ensemble and
/// places its `n` segments into `n` distinct slots chosen uniformly from
/// the `n_slots` available.
///
/// `n_slots` must be a positive multiple of `k`, and every candidate code
/// must fit the frame. The same `(ensemble, m, n_slots, seed)` always
/// yields the identical frame.
pub fn build_frame(
    ensemble: &SimEnsemble<'_>,
    m: usize,
    n_slots: usize,
    seed: u64,
) -> Result<FrameGraph> {
    let k = ensemble.k();
    if n_slots == 0 || n_slots % k != 0 {
        return Err(Error::SlotsNotMultipleOfK { n_slots, k });
    }
    let max_n = ensemble.max_length();
    if max_n > n_slots {
        return Err(Error::CodeLongerThanFrame {
            n: max_n,
            n_slots,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    FrameGraph::from_parts(
        k,
        n_slots,
        (0..m).map(|_| {
            let code = ensemble.sample_code(&mut rng);
            let slots = rand::seq::index::sample(&mut rng, n_slots, code.n()).into_vec();
            (code, slots)
        }),
    )
}

/// Outcome of peeling one frame.
#[derive(Clone, Debug)]
pub struct PeelResult {
    /// Per burst: was it fully recovered?
    pub decoded: Vec<bool>,
    /// Synchronous rounds executed before the process stopped.
    pub iterations: usize,
}

impl PeelResult {
    /// Number of decoded bursts.
    pub fn decoded_count(&self) -> usize {
        self.decoded.iter().filter(|&&d| d).count()
    }
}

/// Runs iterative interference cancellation to its fixpoint (or for at most
/// `max_iters` rounds).
///
/// Each round is synchronous: every slot holding exactly one unresolved
/// segment *at the start of the round* reveals it; then every burst that
/// learned something runs erasure decoding, and all newly recovered
/// segments are cancelled from their slots. New degree-1 slots created by
/// those cancellations wait for the next round. A burst counts as decoded
/// when its known columns reach rank `k` — at which point erasure decoding
/// recovers all its remaining segments, cancelling the burst entirely.
///
/// The process stops by itself within `num_edges` rounds; `max_iters` is
/// only a hard cap.
pub fn peel(graph: &FrameGraph, max_iters: usize) -> PeelResult {
    let m = graph.bursts.len();
    let mut known: Vec<u32> = vec![0; m];
    let mut remaining: Vec<u32> = graph.slots.iter().map(|s| s.len() as u32).collect();
    let mut touched_flag: Vec<bool> = vec![false; m];
    let mut iterations = 0;

    let mut reveals: Vec<SlotEntry> = Vec::new();
    let mut touched: Vec<usize> = Vec::new();
    while iterations < max_iters {
        // Phase 1: collect this round's reveals from degree-1 slots.
        reveals.clear();
        for (s, entries) in graph.slots.iter().enumerate() {
            if remaining[s] == 1 {
                let e = entries
                    .iter()
                    .find(|e| known[e.burst as usize] & (1 << e.pos) == 0)
                    .expect("a slot with remaining = 1 has an unresolved entry");
                reveals.push(*e);
            }
        }
        if reveals.is_empty() {
            break;
        }
        // Phase 2: apply them (each position lives in exactly one slot, so
        // no duplicates are possible).
        touched.clear();
        for e in &reveals {
            let b = e.burst as usize;
            known[b] |= 1 << e.pos;
            remaining[graph.bursts[b].slots[e.pos as usize]] -= 1;
            if !touched_flag[b] {
                touched_flag[b] = true;
                touched.push(b);
            }
        }
        // Phase 3: local decoding and cancellation.
        for &b in &touched {
            touched_flag[b] = false;
            let burst = &graph.bursts[b];
            let mut rec = burst.code.erasure_map_decode(known[b]);
            known[b] |= rec;
            while rec != 0 {
                let pos = rec.trailing_zeros() as usize;
                rec &= rec - 1;
                remaining[burst.slots[pos]] -= 1;
            }
        }
        iterations += 1;
    }

    let decoded = graph
        .bursts
        .iter()
        .zip(&known)
        .map(|(b, &mask)| mask == (1u32 << b.code.n()) - 1)
        .collect();
    PeelResult { decoded, iterations }
}

/// Summary of one simulated frame.
#[derive(Clone, Copy, Debug)]
pub struct TrialStats {
    /// Bursts fully recovered.
    pub decoded: usize,
    /// Peeling rounds used.
    pub peel_iterations: usize,
}

/// Seed for one trial, derived from the base seed and the trial's global
/// index (`point_idx * trials + trial_idx`). Parallel drivers must use this
/// same derivation to reproduce the sequential results.
pub fn trial_seed(base_seed: u64, point_idx: usize, trials: usize, trial_idx: usize) -> u64 {
    splitmix64(splitmix64(base_seed) ^ (point_idx * trials + trial_idx) as u64)
}

/// Builds and peels a single frame.
pub fn run_trial(
    ensemble: &SimEnsemble<'_>,
    m: usize,
    n_slots: usize,
    seed: u64,
) -> Result<TrialStats> {
    let graph = build_frame(ensemble, m, n_slots, seed)?;
    let result = peel(&graph, graph.num_edges() + 1);
    Ok(TrialStats {
        decoded: result.decoded_count(),
        peel_iterations: result.iterations,
    })
}

/// Throughput measurement at one offered load.
#[derive(Clone, Debug)]
pub struct SimPoint {
    /// The load the caller asked for.
    pub g_requested: f64,
    /// The load actually realized after rounding to an integer user count:
    /// `G = k M / N`.
    pub g_actual: f64,
    /// Users per frame.
    pub m: usize,
    /// Slots per frame.
    pub n_slots: usize,
    /// Frames simulated.
    pub trials: usize,
    /// Mean normalized throughput `S = G (1 - PLR)` (decoded bursts per
    /// slot, in burst units of `k` slots).
    pub s_mean: f64,
    /// Standard error of `S` over trials; `None` for a single trial.
    pub s_stderr: Option<f64>,
    /// Burst loss rate: fraction of bursts not recovered.
    pub plr: f64,
    /// Mean peeling rounds per frame.
    pub avg_peel_iters: f64,
}

/// Folds per-trial statistics into a [`SimPoint`]. Exposed so parallel
/// drivers can aggregate exactly like the sequential [`simulate`].
pub fn aggregate_point(
    g_requested: f64,
    n_slots: usize,
    k: usize,
    m: usize,
    stats: &[TrialStats],
) -> SimPoint {
    let trials = stats.len();
    let g_actual = k as f64 * m as f64 / n_slots as f64;
    let attempts = (m * trials) as f64;
    let total_decoded: usize = stats.iter().map(|t| t.decoded).sum();
    let plr = if attempts > 0.0 {
        1.0 - total_decoded as f64 / attempts
    } else {
        0.0
    };
    let s_mean = g_actual * (1.0 - plr);
    let s_stderr = if trials > 1 {
        // Per-trial throughput S_t = G * decoded_t / m.
        let s_t = |t: &TrialStats| {
            if m == 0 {
                0.0
            } else {
                g_actual * t.decoded as f64 / m as f64
            }
        };
        let var_num: f64 = stats.iter().map(|t| (s_t(t) - s_mean) * (s_t(t) - s_mean)).sum();
        Some(libm::sqrt(var_num / ((trials - 1) as f64 * trials as f64)))
    } else {
        None
    };
    let avg_peel_iters = if trials > 0 {
        stats.iter().map(|t| t.peel_iterations as f64).sum::<f64>() / trials as f64
    } else {
        0.0
    };
    SimPoint {
        g_requested,
        g_actual,
        m,
        n_slots,
        trials,
        s_mean,
        s_stderr,
        plr,
        avg_peel_iters,
    }
}

/// Number of users realizing offered load `g` on `n_slots` slots:
/// `M = round(g N / k)`.
pub fn users_for_load(g: f64, n_slots: usize, k: usize) -> usize {
    libm::round(g * n_slots as f64 / k as f64) as usize
}

/// Sweeps the offered-load grid, running `trials` independent frames per
/// point. Deterministic in `(ensemble, n_slots, g_grid, trials,
/// base_seed)`; trials use [`trial_seed`] streams, so a parallel driver
/// with the same derivation produces identical numbers.
pub fn simulate(
    ensemble: &SimEnsemble<'_>,
    n_slots: usize,
    g_grid: &[f64],
    trials: usize,
    base_seed: u64,
) -> Result<Vec<SimPoint>> {
    if trials == 0 {
        return Err(Error::BadArgument {
            reason: "trials must be at least 1",
        });
    }
    if g_grid.iter().any(|g| !g.is_finite() || *g < 0.0) {
        return Err(Error::BadArgument {
            reason: "offered loads must be finite and non-negative",
        });
    }
    let k = ensemble.k();
    let mut points = Vec::with_capacity(g_grid.len());
    for (pi, &g) in g_grid.iter().enumerate() {
        let m = users_for_load(g, n_slots, k);
        let mut stats = Vec::with_capacity(trials);
        for t in 0..trials {
            stats.push(run_trial(ensemble, m, n_slots, trial_seed(base_seed, pi, trials, t))?);
        }
        points.push(aggregate_point(g, n_slots, k, m, &stats));
    }
    Ok(points)
}
