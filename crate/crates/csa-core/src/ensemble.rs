//! Code-selection ensembles and their averaged statistics.
//!
//! Each user independently draws its component code from a distribution.
//! Two flavors are supported:
//!
//! * [`ExplicitEnsemble`] — a probability mass function over a fixed list of
//!   [`LinearCode`]s sharing one dimension `k`.
//! * [`RandomEnsemble`] — a p.m.f. over code *lengths*; for a drawn length
//!   `n` the user picks a generator uniformly at random among all `k x n`
//!   binary matrices that satisfy the [`LinearCode`] invariants (full rank,
//!   no idle column, minimum distance at least 2).
//!
//! Both flavors reduce to one [`EnsembleStats`] record (mean length, rate,
//! edge-degree distribution, averaged weight-2 multiplicity, and per-type
//! erasure-transfer coefficients `a_t`), which is all the density-evolution
//! layer needs. For the random flavor the per-length expectations are
//! computed by *exact* enumeration of qualifying matrices, organized by
//! column multisets so large lengths stay cheap.

use alloc::vec;
use alloc::vec::Vec;

use crate::codes::{a_coeffs_from_info, rank, CodeProfile, LinearCode};
use crate::{Error, Result};

/// Strictest tolerance on `sum(pmf) - 1` for a validated ensemble.
pub const PMF_SUM_TOL: f64 = 1e-12;

/// Tolerance used when adopting externally supplied probability vectors
/// (config files, published tables rounded to few digits). Vectors within
/// this distance of the simplex are rescaled exactly onto it.
pub const PMF_NORMALIZE_TOL: f64 = 1e-4;

/// Validates a raw probability vector and rescales it to sum to exactly 1.
///
/// Accepts small rounding slack (`|sum - 1| <= 1e-4`) so distributions
/// quoted to six decimals can be used verbatim; anything farther from the
/// simplex is rejected rather than silently rescaled.
pub fn normalized_pmf(raw: &[f64]) -> Result<Vec<f64>> {
    if raw.is_empty() {
        return Err(Error::BadPmf {
            reason: "empty probability vector",
        });
    }
    if raw.iter().any(|p| !p.is_finite() || *p < 0.0) {
        return Err(Error::BadPmf {
            reason: "probabilities must be finite and non-negative",
        });
    }
    let sum: f64 = raw.iter().sum();
    if (sum - 1.0).abs() > PMF_NORMALIZE_TOL {
        return Err(Error::BadPmf {
            reason: "probabilities do not sum to 1",
        });
    }
    Ok(raw.iter().map(|p| p / sum).collect())
}

fn check_pmf_strict(pmf: &[f64]) -> Result<()> {
    if pmf.iter().any(|p| !p.is_finite() || *p < 0.0) {
        return Err(Error::BadPmf {
            reason: "probabilities must be finite and non-negative",
        });
    }
    let sum: f64 = pmf.iter().sum();
    if (sum - 1.0).abs() > PMF_SUM_TOL {
        return Err(Error::BadPmf {
            reason: "probabilities must sum to 1 within 1e-12",
        });
    }
    Ok(())
}

/// A distribution over an explicit list of component codes.
#[derive(Clone, Debug)]
pub struct ExplicitEnsemble {
    k: usize,
    codes: Vec<LinearCode>,
    pmf: Vec<f64>,
}

impl ExplicitEnsemble {
    /// Builds and validates an ensemble. All codes must share one dimension
    /// `k`, and `pmf` must be a distribution over the codes (sum within
    /// 1e-12 of 1; use [`normalized_pmf`] first for rounded inputs).
    pub fn new(codes: Vec<LinearCode>, pmf: Vec<f64>) -> Result<Self> {
        if codes.is_empty() {
            return Err(Error::EmptyEnsemble);
        }
        if codes.len() != pmf.len() {
            return Err(Error::BadPmf {
                reason: "probability count differs from code count",
            });
        }
        check_pmf_strict(&pmf)?;
        let k = codes[0].k();
        if codes.iter().any(|c| c.k() != k) {
            return Err(Error::MixedDimensions);
        }
        Ok(Self { k, codes, pmf })
    }

    /// Shared code dimension.
    pub fn k(&self) -> usize {
        self.k
    }

    /// The component codes.
    pub fn codes(&self) -> &[LinearCode] {
        &self.codes
    }

    /// Selection probabilities, aligned with [`Self::codes`].
    pub fn pmf(&self) -> &[f64] {
        &self.pmf
    }

    /// Averaged statistics for density evolution.
    pub fn stats(&self) -> EnsembleStats {
        let profiles: Vec<CodeProfile> = self.codes.iter().map(|c| c.code_profile()).collect();
        let lengths: Vec<usize> = self.codes.iter().map(|c| c.n()).collect();
        let a_coeffs: Vec<Vec<f64>> = profiles.iter().map(|p| p.a_coeffs()).collect();
        // Only weight-2 codewords destabilize decoding at vanishing erasure
        // rates, and codes with d_min > 2 contribute none, so the plain
        // average over all components is exactly the relevant quantity.
        let avg_a2 = self
            .pmf
            .iter()
            .zip(&profiles)
            .map(|(p, prof)| p * prof.a2() as f64)
            .sum();
        EnsembleStats::assemble(self.k, lengths, self.pmf.clone(), a_coeffs, avg_a2)
    }
}

/// A distribution over code lengths under the uniform random-code model.
#[derive(Clone, Debug)]
pub struct RandomEnsemble {
    k: usize,
    lengths: Vec<usize>,
    pmf: Vec<f64>,
}

impl RandomEnsemble {
    /// Builds and validates an ensemble: distinct lengths, each above `k`,
    /// within the exact-enumeration budget, with a strict p.m.f.
    pub fn new(k: usize, lengths: Vec<usize>, pmf: Vec<f64>) -> Result<Self> {
        if lengths.is_empty() {
            return Err(Error::EmptyEnsemble);
        }
        if lengths.len() != pmf.len() {
            return Err(Error::BadPmf {
                reason: "probability count differs from length count",
            });
        }
        check_pmf_strict(&pmf)?;
        for (i, &n) in lengths.iter().enumerate() {
            if n <= k {
                return Err(Error::LengthNotAboveK { n, k });
            }
            if lengths[..i].contains(&n) {
                return Err(Error::DuplicateLength { n });
            }
            // Surface budget violations at construction time.
            check_enumeration_budget(k, n)?;
        }
        Ok(Self { k, lengths, pmf })
    }

    /// Code dimension.
    pub fn k(&self) -> usize {
        self.k
    }

    /// The candidate code lengths.
    pub fn lengths(&self) -> &[usize] {
        &self.lengths
    }

    /// Selection probabilities, aligned with [`Self::lengths`].
    pub fn pmf(&self) -> &[f64] {
        &self.pmf
    }

    /// Averaged statistics for density evolution, with per-length transfer
    /// coefficients and weight-2 multiplicities obtained by exact
    /// enumeration over all qualifying generator matrices.
    pub fn stats(&self) -> Result<EnsembleStats> {
        let mut a_coeffs = Vec::with_capacity(self.lengths.len());
        let mut avg_a2 = 0.0;
        for (&n, &p) in self.lengths.iter().zip(&self.pmf) {
            let summary = length_summary(self.k, n)?;
            a_coeffs.push(summary.a_coeffs);
            avg_a2 += p * summary.avg_a2;
        }
        Ok(EnsembleStats::assemble(
            self.k,
            self.lengths.clone(),
            self.pmf.clone(),
            a_coeffs,
            avg_a2,
        ))
    }
}

/// Averaged quantities consumed by density evolution, common to both
/// ensemble flavors.
#[derive(Clone, Debug)]
pub struct EnsembleStats {
    /// Code dimension shared by every component.
    pub k: usize,
    /// Component code lengths `n_h` (need not be distinct).
    pub lengths: Vec<usize>,
    /// Selection probabilities per component (node perspective).
    pub pmf: Vec<f64>,
    /// Mean code length `n̄ = Σ P_h n_h`.
    pub mean_length: f64,
    /// Overall rate `R = k / n̄`.
    pub rate: f64,
    /// Edge-perspective selection probabilities `λ_h = P_h n_h / n̄`
    /// (probability that a uniformly chosen *edge* belongs to type `h`).
    pub edge_probs: Vec<f64>,
    /// Average weight-2 codeword multiplicity `Ā₂`. Zero means every
    /// component has minimum distance at least 3, which makes iterative
    /// decoding stable at any load.
    pub avg_a2: f64,
    /// Per-component transfer coefficients `a_t`, `t = 0 ..= n_h - 1`
    /// (averaged over the matrix draw for the random flavor).
    pub a_coeffs: Vec<Vec<f64>>,
}

impl EnsembleStats {
    fn assemble(
        k: usize,
        lengths: Vec<usize>,
        pmf: Vec<f64>,
        a_coeffs: Vec<Vec<f64>>,
        avg_a2: f64,
    ) -> Self {
        let mean_length: f64 = lengths
            .iter()
            .zip(&pmf)
            .map(|(&n, &p)| p * n as f64)
            .sum();
        let edge_probs = lengths
            .iter()
            .zip(&pmf)
            .map(|(&n, &p)| p * n as f64 / mean_length)
            .collect();
        EnsembleStats {
            k,
            rate: k as f64 / mean_length,
            mean_length,
            lengths,
            pmf,
            edge_probs,
            avg_a2,
            a_coeffs,
        }
    }
}

/// Exact counts of qualifying random generators for one `(k, n)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RandomCodeCounts {
    /// Number of `k x n` binary matrices with full rank, no zero column and
    /// minimum distance at least 2.
    pub total: u64,
    /// `prefix_rank[g][u]`: among the qualifying matrices, how many have
    /// rank exactly `u` on their first `g` columns (`0 <= g <= n`,
    /// `0 <= u <= k`).
    pub prefix_rank: Vec<Vec<u64>>,
}

fn check_enumeration_budget(k: usize, n: usize) -> Result<()> {
    if k < 1 || k > 3 || n <= k || n > 16 {
        return Err(Error::UnsupportedSize { k, n });
    }
    Ok(())
}

/// Counts qualifying `k x n` generator matrices, jointly with the rank
/// distribution of their column prefixes.
///
/// Matrices are grouped by the *multiset* of their column patterns (there
/// are only `2^k - 1` nonzero patterns), so a multiplicity vector with
/// multinomial weight covers many matrices at once:
///
/// * a multiset qualifies iff its support spans GF(2)^k and dropping any
///   pattern of multiplicity exactly 1 still spans (no rank-reducing
///   column, i.e. minimum distance at least 2);
/// * for the prefix table, the first `g` columns of an arrangement realize
///   a sub-multiset `s`, and `multinomial(g; s) * multinomial(n-g; m-s)`
///   arrangements share it.
///
/// By column symmetry the table for "first `g` columns" equals that of any
/// fixed `g`-column subset. Budget: `k <= 3`, `n <= 16`; everything fits
/// comfortably in `u64`.
pub fn random_code_counts(k: usize, n: usize) -> Result<RandomCodeCounts> {
    check_enumeration_budget(k, n)?;
    let num_patterns = (1usize << k) - 1;
    // Rank of every support subset of the nonzero patterns (bit i of the
    // index = pattern i+1 present).
    let mut support_rank = vec![0u8; 1 << num_patterns];
    for (mask, slot) in support_rank.iter_mut().enumerate() {
        let cols = (0..num_patterns)
            .filter(|i| mask & (1 << i) != 0)
            .map(|i| (i + 1) as u32);
        *slot = rank(&cols.collect::<Vec<_>>(), k) as u8;
    }

    let binom = binomial_table(n);
    let multinomial = |total: usize, parts: &[usize]| -> u64 {
        let mut rem = total;
        let mut out = 1u64;
        for &p in parts {
            out *= binom[rem][p];
            rem -= p;
        }
        out
    };

    let mut total = 0u64;
    let mut prefix_rank = vec![vec![0u64; k + 1]; n + 1];
    let mut mult = vec![0usize; num_patterns];
    // Enumerate multiplicity vectors summing to n, depth-first.
    enumerate_compositions(&mut mult, 0, n, &mut |m| {
        let support: usize = m
            .iter()
            .enumerate()
            .filter(|&(_, &c)| c > 0)
            .map(|(i, _)| 1usize << i)
            .sum();
        if support_rank[support] as usize != k {
            return;
        }
        for (i, &c) in m.iter().enumerate() {
            if c == 1 && (support_rank[support & !(1 << i)] as usize) != k {
                return;
            }
        }
        let weight = multinomial(n, m);
        total += weight;
        // Distribute the class over prefix sub-multisets.
        let mut sub = vec![0usize; m.len()];
        enumerate_sub_multisets(m, &mut sub, 0, &mut |s| {
            let g: usize = s.iter().sum();
            let sub_support: usize = s
                .iter()
                .enumerate()
                .filter(|&(_, &c)| c > 0)
                .map(|(i, _)| 1usize << i)
                .sum();
            let u = support_rank[sub_support] as usize;
            let rest: Vec<usize> = m.iter().zip(s).map(|(a, b)| a - b).collect();
            prefix_rank[g][u] += multinomial(g, s) * multinomial(n - g, &rest);
        });
    });
    Ok(RandomCodeCounts { total, prefix_rank })
}

fn binomial_table(n: usize) -> Vec<Vec<u64>> {
    let mut t = vec![vec![0u64; n + 1]; n + 1];
    for i in 0..=n {
        t[i][0] = 1;
        for j in 1..=i {
            t[i][j] = t[i - 1][j - 1] + if j <= i - 1 { t[i - 1][j] } else { 0 };
        }
    }
    t
}

/// Visits every way to fill `m[at..]` with non-negative counts summing to
/// `remaining`.
fn enumerate_compositions(
    m: &mut Vec<usize>,
    at: usize,
    remaining: usize,
    visit: &mut impl FnMut(&[usize]),
) {
    if at + 1 == m.len() {
        m[at] = remaining;
        visit(m);
        return;
    }
    for c in 0..=remaining {
        m[at] = c;
        enumerate_compositions(m, at + 1, remaining - c, visit);
    }
}

/// Visits every component-wise-bounded vector `s <= m`.
fn enumerate_sub_multisets(
    m: &[usize],
    s: &mut Vec<usize>,
    at: usize,
    visit: &mut impl FnMut(&[usize]),
) {
    if at == m.len() {
        visit(s);
        return;
    }
    for c in 0..=m[at] {
        s[at] = c;
        enumerate_sub_multisets(m, s, at + 1, visit);
    }
}

/// Expected information functions `E[e~_g]`, `g = 0 ..= n`, of a generator
/// drawn uniformly among qualifying `k x n` matrices.
///
/// By column symmetry, `E[e~_g] = C(n, g) * Σ_u u * prefix_rank[g][u] /
/// total`.
pub fn expected_info_funcs(k: usize, n: usize) -> Result<Vec<f64>> {
    let counts = random_code_counts(k, n)?;
    Ok(info_func_numerators(n, &counts)
        .iter()
        .map(|&s| s as f64 / counts.total as f64)
        .collect())
}

/// `E[e~_g] * total`, exact in integers: `C(n, g) * Σ_u u * prefix_rank[g][u]`.
fn info_func_numerators(n: usize, counts: &RandomCodeCounts) -> Vec<u128> {
    let binom = binomial_table(n);
    (0..=n)
        .map(|g| {
            let s: u64 = counts.prefix_rank[g]
                .iter()
                .enumerate()
                .map(|(u, &c)| u as u64 * c)
                .sum();
            binom[n][g] as u128 * s as u128
        })
        .collect()
}

/// Per-length averages for the random model.
struct LengthSummary {
    a_coeffs: Vec<f64>,
    avg_a2: f64,
}

fn length_summary(k: usize, n: usize) -> Result<LengthSummary> {
    let counts = random_code_counts(k, n)?;
    let nums = info_func_numerators(n, &counts);
    let total = counts.total as f64;
    // a_t numerators stay integral, so exact zeros survive the averaging.
    let a_coeffs = a_coeffs_from_info(n, |g| (nums[g] as f64) / total);
    // Average weight-2 multiplicity: C(n,2) * (k - E[rank of an (n-2)-column
    // subset]), again exact in integers before the final division.
    let binom = binomial_table(n);
    let a2_numer =
        (k as u128) * (binom[n][2] as u128) * (counts.total as u128) - nums[n - 2];
    let avg_a2 = (a2_numer as f64) / total;
    Ok(LengthSummary { a_coeffs, avg_a2 })
}
