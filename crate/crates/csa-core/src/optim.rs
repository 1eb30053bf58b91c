//! Differential-evolution search over the code-selection distribution.
//!
//! For a fixed candidate set (explicit codes or random-model lengths) and a
//! fixed overall rate `R`, the optimizer looks for the probability vector
//! maximizing the decoding threshold. Candidates live in an unconstrained
//! genome space; a softmax maps a genome onto the simplex and a projection
//! then enforces the rate equality `Σ p_h n_h = k / R`, so every evaluated
//! point is feasible by construction.
//!
//! The search itself is classic rand/1/bin differential evolution with a
//! per-(generation, member) seeded RNG stream, making results reproducible
//! bit-for-bit from the master seed regardless of evaluation order.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::codes::LinearCode;
use crate::density::{threshold_with, ThresholdOptions, ThresholdReport};
use crate::ensemble::{normalized_pmf, EnsembleStats, ExplicitEnsemble, RandomEnsemble};
use crate::mix::splitmix64;
use crate::{Error, Result, DEFAULT_SEED};

/// Differential-evolution hyperparameters.
#[derive(Clone, Copy, Debug)]
pub struct DeParams {
    /// Population size (at least 4; rand/1 mutation needs three distinct
    /// partners).
    pub population: usize,
    /// Number of generations to run.
    pub generations: usize,
    /// Differential weight `F` applied to the difference vector.
    pub weight: f64,
    /// Crossover probability `CR` per coordinate.
    pub crossover: f64,
    /// Master seed; all per-member RNG streams derive from it.
    pub seed: u64,
}

impl Default for DeParams {
    fn default() -> Self {
        DeParams {
            population: 40,
            generations: 500,
            weight: 0.8,
            crossover: 0.9,
            seed: DEFAULT_SEED,
        }
    }
}

/// The candidate set the distribution ranges over.
#[derive(Clone, Debug)]
pub enum Candidates {
    /// Explicit component codes (all sharing one dimension).
    Explicit(Vec<LinearCode>),
    /// Code lengths under the uniform random-code model.
    RandomLengths {
        /// Code dimension.
        k: usize,
        /// Candidate lengths (distinct, each above `k`).
        lengths: Vec<usize>,
    },
}

impl Candidates {
    /// Code dimension shared by all candidates.
    pub fn k(&self) -> usize {
        match self {
            Candidates::Explicit(codes) => codes.first().map_or(0, |c| c.k()),
            Candidates::RandomLengths { k, .. } => *k,
        }
    }

    /// Candidate code lengths, in candidate order.
    pub fn lengths(&self) -> Vec<usize> {
        match self {
            Candidates::Explicit(codes) => codes.iter().map(|c| c.n()).collect(),
            Candidates::RandomLengths { lengths, .. } => lengths.clone(),
        }
    }

    /// Number of candidates.
    pub fn len(&self) -> usize {
        match self {
            Candidates::Explicit(codes) => codes.len(),
            Candidates::RandomLengths { lengths, .. } => lengths.len(),
        }
    }

    /// True when the candidate set is empty (an invalid problem).
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// A fully specified optimization problem.
#[derive(Clone, Debug)]
pub struct OptProblem {
    /// What the distribution ranges over.
    pub candidates: Candidates,
    /// Required overall rate `R = k / n̄` (equality constraint).
    pub target_rate: f64,
    /// Floor on every candidate's local rate `k / n_h`; the conventional
    /// design floor is 1/6.
    pub min_local_rate: f64,
    /// Search hyperparameters.
    pub de: DeParams,
}

impl OptProblem {
    /// Builds a problem with the default local-rate floor (1/6) and default
    /// DE hyperparameters, and validates feasibility.
    pub fn new(candidates: Candidates, target_rate: f64) -> Result<Self> {
        let p = OptProblem {
            candidates,
            target_rate,
            min_local_rate: 1.0 / 6.0,
            de: DeParams::default(),
        };
        p.validate()?;
        Ok(p)
    }

    /// Replaces the DE hyperparameters.
    pub fn with_de(mut self, de: DeParams) -> Self {
        self.de = de;
        self
    }

    /// Checks structural validity and rate feasibility.
    pub fn validate(&self) -> Result<()> {
        if self.candidates.is_empty() {
            return Err(Error::EmptyEnsemble);
        }
        if let Candidates::Explicit(codes) = &self.candidates {
            let k = codes[0].k();
            if codes.iter().any(|c| c.k() != k) {
                return Err(Error::MixedDimensions);
            }
        }
        let k = self.candidates.k() as f64;
        let lengths = self.candidates.lengths();
        for &n in &lengths {
            if k / (n as f64) < self.min_local_rate - 1e-12 {
                return Err(Error::LocalRateTooSmall { n });
            }
        }
        if !(self.target_rate > 0.0 && self.target_rate < 1.0) {
            return Err(Error::BadArgument {
                reason: "target rate must lie in (0, 1)",
            });
        }
        // n̄ is a convex combination of the candidate lengths, so the
        // achievable rates form [k/n_max, k/n_min].
        let n_min = *lengths.iter().min().expect("nonempty") as f64;
        let n_max = *lengths.iter().max().expect("nonempty") as f64;
        let (r_min, r_max) = (k / n_max, k / n_min);
        if self.target_rate < r_min - 1e-9 || self.target_rate > r_max + 1e-9 {
            return Err(Error::InfeasibleRate {
                rate: self.target_rate,
                min: r_min,
                max: r_max,
            });
        }
        if self.de.population < 4 {
            return Err(Error::BadArgument {
                reason: "population must be at least 4",
            });
        }
        if self.de.generations == 0 {
            return Err(Error::BadArgument {
                reason: "generations must be at least 1",
            });
        }
        Ok(())
    }

    /// Target mean length `n̄ = k / R`.
    fn target_mean(&self) -> f64 {
        self.candidates.k() as f64 / self.target_rate
    }

    /// Assembles density-evolution statistics for a feasible p.m.f. over the
    /// candidates.
    pub fn stats_for(&self, pmf: &[f64]) -> Result<EnsembleStats> {
        match &self.candidates {
            Candidates::Explicit(codes) => {
                Ok(ExplicitEnsemble::new(codes.clone(), pmf.to_vec())?.stats())
            }
            Candidates::RandomLengths { k, lengths } => {
                RandomEnsemble::new(*k, lengths.clone(), pmf.to_vec())?.stats()
            }
        }
    }
}

/// Outcome of an optimization run.
#[derive(Clone, Debug)]
pub struct OptResult {
    /// Best distribution found, aligned with the problem's candidates.
    pub pmf: Vec<f64>,
    /// Its threshold, re-scored from scratch at full resolution.
    pub threshold: f64,
    /// Achieved rate `k / n̄` (matches the target within 1e-6).
    pub rate: f64,
    /// Generations executed.
    pub generations: usize,
    /// Master seed the run used.
    pub seed: u64,
    /// Best fitness after each generation (`history[0]` is the initial
    /// population's best), for audit trails.
    pub history: Vec<f64>,
}

/// Projects a point of the simplex onto its intersection with the rate
/// hyperplane `Σ p_i n_i = target_mean`, clipping negative coordinates.
///
/// Each pass solves the 2x2 system for the affine correction `p_i += α + β
/// n_i` on the currently active coordinates (restoring `Σ p = 1` and the
/// mean-length equality), then deactivates coordinates pushed below zero.
/// At most `len` passes are needed. Falls back to the two-point mixture of
/// the shortest and longest candidates if the active set degenerates.
pub fn project_to_rate(pmf: &[f64], lengths: &[usize], target_mean: f64) -> Vec<f64> {
    let c = pmf.len();
    debug_assert_eq!(c, lengths.len());
    let ns: Vec<f64> = lengths.iter().map(|&n| n as f64).collect();
    if c == 1 {
        return vec![1.0];
    }
    let mut x: Vec<f64> = pmf.to_vec();
    let mut active = vec![true; c];
    for _ in 0..c {
        let (mut cnt, mut sn, mut snn, mut sp, mut spn) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for i in 0..c {
            if active[i] {
                cnt += 1.0;
                sn += ns[i];
                snn += ns[i] * ns[i];
                sp += x[i];
                spn += x[i] * ns[i];
            }
        }
        let det = cnt * snn - sn * sn;
        if cnt < 2.0 || det < 1e-9 {
            break;
        }
        let rhs1 = 1.0 - sp;
        let rhs2 = target_mean - spn;
        let alpha = (rhs1 * snn - rhs2 * sn) / det;
        let beta = (cnt * rhs2 - sn * rhs1) / det;
        let mut clipped = false;
        for i in 0..c {
            if active[i] {
                x[i] += alpha + beta * ns[i];
                if x[i] < 0.0 {
                    x[i] = 0.0;
                    active[i] = false;
                    clipped = true;
                }
            }
        }
        if !clipped {
            let sum: f64 = x.iter().sum();
            let mean: f64 = x.iter().zip(&ns).map(|(p, n)| p * n).sum();
            if (sum - 1.0).abs() < 1e-9 && (mean - target_mean).abs() < 1e-9 * target_mean {
                for p in &mut x {
                    *p /= sum;
                }
                return x;
            }
            break;
        }
    }
    // Deterministic feasible fallback: mix the extreme lengths.
    let i_min = (0..c).min_by(|&a, &b| ns[a].total_cmp(&ns[b])).expect("nonempty");
    let i_max = (0..c).max_by(|&a, &b| ns[a].total_cmp(&ns[b])).expect("nonempty");
    let mut out = vec![0.0; c];
    if i_min == i_max {
        out[i_min] = 1.0;
        return out;
    }
    let theta = ((ns[i_max] - target_mean) / (ns[i_max] - ns[i_min])).clamp(0.0, 1.0);
    out[i_min] = theta;
    out[i_max] = 1.0 - theta;
    out
}

/// Softmax onto the open simplex (shift-invariant, overflow-safe).
fn softmax(genome: &[f64]) -> Vec<f64> {
    let max = genome.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b));
    let exps: Vec<f64> = genome.iter().map(|&v| libm::exp(v - max)).collect();
    let sum: f64 = exps.iter().sum();
    exps.iter().map(|e| e / sum).collect()
}

fn decode_genome(problem: &OptProblem, genome: &[f64], lengths: &[usize]) -> Vec<f64> {
    project_to_rate(&softmax(genome), lengths, problem.target_mean())
}

/// Independent RNG stream for one (generation, member) cell of the search.
fn stream_rng(seed: u64, generation: u64, member: u64) -> ChaCha8Rng {
    let mut s = splitmix64(seed);
    s = splitmix64(s ^ generation);
    s = splitmix64(s ^ member);
    ChaCha8Rng::seed_from_u64(s)
}

/// Fitness with memoization on the quantized p.m.f. (1e-6 grid): threshold
/// evaluation dominates the runtime and distinct genomes frequently decode
/// to the same distribution.
fn fitness(
    problem: &OptProblem,
    pmf: &[f64],
    opts: &ThresholdOptions,
    cache: &mut BTreeMap<Vec<u64>, f64>,
) -> f64 {
    let key: Vec<u64> = pmf.iter().map(|p| libm::round(p * 1e6) as u64).collect();
    if let Some(&v) = cache.get(&key) {
        return v;
    }
    // Treat pathological points (construction or bisection failures) as
    // arbitrarily bad rather than aborting the search.
    let fit = problem
        .stats_for(pmf)
        .and_then(|s| threshold_with(&s, opts))
        .map_or(f64::NEG_INFINITY, |r| r.threshold);
    cache.insert(key, fit);
    fit
}

/// Runs the differential-evolution search and re-scores the winner at full
/// resolution.
pub fn optimize(problem: &OptProblem) -> Result<OptResult> {
    problem.validate()?;
    let de = problem.de;
    let lengths = problem.candidates.lengths();
    let c = problem.candidates.len();
    let coarse = ThresholdOptions::coarse();
    let mut cache = BTreeMap::new();

    // Member 0 starts at the uniform genome; the rest scatter.
    let mut genomes: Vec<Vec<f64>> = (0..de.population)
        .map(|i| {
            if i == 0 {
                vec![0.0; c]
            } else {
                let mut rng = stream_rng(de.seed, 0, i as u64);
                (0..c).map(|_| rng.gen_range(-1.0..1.0)).collect()
            }
        })
        .collect();
    let mut fits: Vec<f64> = genomes
        .iter()
        .map(|g| fitness(problem, &decode_genome(problem, g, &lengths), &coarse, &mut cache))
        .collect();

    let best_of = |fits: &[f64]| {
        fits.iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    };
    let mut history = vec![best_of(&fits)];

    for gen in 1..=de.generations {
        for i in 0..de.population {
            let mut rng = stream_rng(de.seed, gen as u64, i as u64);
            // rand/1: three distinct partners, none equal to the target.
            let mut pick = || loop {
                let r = rng.gen_range(0..de.population);
                if r != i {
                    break r;
                }
            };
            let (r1, r2, r3) = {
                let a = pick();
                let b = loop {
                    let x = pick();
                    if x != a {
                        break x;
                    }
                };
                let c3 = loop {
                    let x = pick();
                    if x != a && x != b {
                        break x;
                    }
                };
                (a, b, c3)
            };
            let j_rand = rng.gen_range(0..c);
            let mut trial = genomes[i].clone();
            for j in 0..c {
                let cross = rng.gen::<f64>() < de.crossover;
                if cross || j == j_rand {
                    trial[j] = genomes[r1][j] + de.weight * (genomes[r2][j] - genomes[r3][j]);
                }
            }
            let trial_fit =
                fitness(problem, &decode_genome(problem, &trial, &lengths), &coarse, &mut cache);
            if trial_fit >= fits[i] {
                genomes[i] = trial;
                fits[i] = trial_fit;
            }
        }
        history.push(best_of(&fits));
    }

    let best_idx = (0..de.population)
        .max_by(|&a, &b| fits[a].total_cmp(&fits[b]))
        .expect("population is nonempty");
    let pmf = decode_genome(problem, &genomes[best_idx], &lengths);
    // Final score is always recomputed from scratch at full resolution.
    let report = threshold_with(&problem.stats_for(&pmf)?, &ThresholdOptions::default())?;
    let mean: f64 = pmf.iter().zip(&lengths).map(|(p, &n)| p * n as f64).sum();
    Ok(OptResult {
        rate: problem.candidates.k() as f64 / mean,
        pmf,
        threshold: report.threshold,
        generations: de.generations,
        seed: de.seed,
        history,
    })
}

/// Independently re-scores a given distribution against a problem's
/// candidates at full resolution — validation of published or previously
/// optimized distributions without re-running any search.
///
/// The vector may carry rounding slack (tables quoted to six decimals); it
/// is renormalized and then required to meet the problem's rate within
/// 1e-6.
pub fn verify(problem: &OptProblem, pmf: &[f64]) -> Result<ThresholdReport> {
    verify_with(problem, pmf, &ThresholdOptions::default())
}

/// [`verify`] with explicit threshold-computation options.
pub fn verify_with(
    problem: &OptProblem,
    pmf: &[f64],
    opts: &ThresholdOptions,
) -> Result<ThresholdReport> {
    if pmf.len() != problem.candidates.len() {
        return Err(Error::BadPmf {
            reason: "probability count differs from candidate count",
        });
    }
    let pmf = normalized_pmf(pmf)?;
    let lengths = problem.candidates.lengths();
    let mean: f64 = pmf.iter().zip(&lengths).map(|(p, &n)| p * n as f64).sum();
    let rate = problem.candidates.k() as f64 / mean;
    if (rate - problem.target_rate).abs() > 1e-6 {
        return Err(Error::BadArgument {
            reason: "distribution does not meet the problem's target rate",
        });
    }
    threshold_with(&problem.stats_for(&pmf)?, opts)
}
