//! Exact GF(2) linear algebra for the small binary block codes used by CSA.
//!
//! Every burst is encoded with a `(n, k)` binary linear code with `k <= 4`
//! and `n <= 16`. At these sizes everything of interest is exactly
//! enumerable: ranks of all column subsets (the information functions), the
//! full weight enumerator, and MAP erasure decoding by span membership.
//!
//! Matrices are stored as bit-packed rows (`u32`, bit `j` = column `j`), and
//! columns as bit-packed patterns (`u8`, bit `i` = row `i`), so all kernels
//! are word operations.

use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::{Error, Result};

/// GF(2) rank of a matrix given as bit-packed rows (bit `j` of `rows[i]` is
/// the entry in row `i`, column `j`). Supports up to 16 rows and 16 columns.
///
/// Plain Gaussian elimination: scan columns left to right, pick a pivot row,
/// XOR it into every other row sharing that column bit.
pub fn rank(rows: &[u32], n: usize) -> usize {
    debug_assert!(rows.len() <= 16 && n <= 16);
    let mask = (1u32 << n) - 1;
    let mut work: Vec<u32> = rows.iter().map(|r| r & mask).collect();
    let mut rank = 0;
    for col in 0..n {
        let bit = 1u32 << col;
        let Some(pivot) = (rank..work.len()).find(|&i| work[i] & bit != 0) else {
            continue;
        };
        work.swap(rank, pivot);
        let pivot_row = work[rank];
        for (i, row) in work.iter_mut().enumerate() {
            if i != rank && *row & bit != 0 {
                *row ^= pivot_row;
            }
        }
        rank += 1;
        if rank == work.len() {
            break;
        }
    }
    rank
}

/// Incremental GF(2) basis over column patterns (`u8`, `k <= 4` bits... up to
/// 8 supported). Used for span ranks and span-membership tests.
#[derive(Clone, Copy, Default)]
struct ColBasis {
    /// `by_lead[b]` is a basis vector whose leading (highest) set bit is `b`.
    by_lead: [u8; 8],
    rank: usize,
}

impl ColBasis {
    /// Reduce `v` against the basis; the nonzero remainder (if any) has a
    /// leading bit not yet covered.
    fn reduce(&self, mut v: u8) -> u8 {
        while v != 0 {
            let lead = 7 - v.leading_zeros() as usize;
            let b = self.by_lead[lead];
            if b == 0 {
                return v;
            }
            v ^= b;
        }
        0
    }

    /// Insert `v`; returns true if it enlarged the span.
    fn insert(&mut self, v: u8) -> bool {
        let r = self.reduce(v);
        if r == 0 {
            return false;
        }
        self.by_lead[7 - r.leading_zeros() as usize] = r;
        self.rank += 1;
        true
    }

    fn contains(&self, v: u8) -> bool {
        self.reduce(v) == 0
    }
}

/// Rank of a set of column patterns.
fn col_rank(cols: impl IntoIterator<Item = u8>) -> usize {
    let mut basis = ColBasis::default();
    for c in cols {
        basis.insert(c);
    }
    basis.rank
}

/// A validated `(n, k)` binary linear block code, held as its generator
/// matrix.
///
/// Construction enforces the properties the CSA analysis relies on:
///
/// * the generator has rank exactly `k` (it actually encodes `k` segments);
/// * no column is all-zero (every encoded position carries signal);
/// * minimum distance at least 2 — equivalently, deleting any single column
///   leaves the rank at `k`, so no encoded position is unprotected.
///
/// A `LinearCode` value that exists is always well-formed, which lets every
/// downstream formula assume these invariants.
#[derive(Clone, PartialEq, Eq)]
pub struct LinearCode {
    /// Bit-packed generator rows; bit `j` of `rows[i]` is entry `(i, j)`.
    rows: Vec<u32>,
    /// Column patterns; bit `i` of `cols[j]` is entry `(i, j)`.
    cols: Vec<u8>,
    n: usize,
}

impl LinearCode {
    /// Builds a code from bit-packed generator rows (`k = rows.len()`),
    /// validating all structural invariants.
    pub fn new(rows: &[u32], n: usize) -> Result<Self> {
        let k = rows.len();
        if k < 1 || k > 4 || n <= k || n > 16 {
            return Err(Error::InvalidDimensions { k, n });
        }
        let mask = (1u32 << n) - 1;
        if rows.iter().any(|r| r & !mask != 0) {
            return Err(Error::MalformedMatrix {
                reason: "row has bits beyond the stated length",
            });
        }
        if rank(rows, n) != k {
            return Err(Error::RankDeficient);
        }
        let mut cols = Vec::with_capacity(n);
        for j in 0..n {
            let mut c = 0u8;
            for (i, row) in rows.iter().enumerate() {
                if row & (1 << j) != 0 {
                    c |= 1 << i;
                }
            }
            if c == 0 {
                return Err(Error::IdleColumn { index: j });
            }
            cols.push(c);
        }
        // d_min >= 2 <=> no weight-1 codeword <=> removing any one column
        // still leaves a rank-k matrix.
        for j in 0..n {
            let others = cols
                .iter()
                .enumerate()
                .filter(|&(i, _)| i != j)
                .map(|(_, &c)| c);
            if col_rank(others) != k {
                return Err(Error::MinDistanceBelowTwo { index: j });
            }
        }
        Ok(Self {
            rows: rows.to_vec(),
            cols,
            n,
        })
    }

    /// Code dimension `k` (information segments per burst).
    pub fn k(&self) -> usize {
        self.rows.len()
    }

    /// Code length `n` (encoded segments per burst).
    pub fn n(&self) -> usize {
        self.n
    }

    /// Bit-packed generator rows.
    pub fn rows(&self) -> &[u32] {
        &self.rows
    }

    /// Rank of the generator columns selected by `mask` (bit `j` = column `j`).
    pub fn known_rank(&self, mask: u32) -> usize {
        col_rank(
            self.cols
                .iter()
                .enumerate()
                .filter(|&(j, _)| mask & (1 << j) != 0)
                .map(|(_, &c)| c),
        )
    }

    /// MAP erasure decoding: given the set of known positions (bit `j` set in
    /// `known` = position `j` known), returns the set of *other* positions
    /// that become recoverable.
    ///
    /// A position is recoverable exactly when its generator column lies in
    /// the GF(2) span of the known columns; all positions are returned iff
    /// the known columns already have full rank `k`.
    pub fn erasure_map_decode(&self, known: u32) -> u32 {
        let mut basis = ColBasis::default();
        for (j, &c) in self.cols.iter().enumerate() {
            if known & (1 << j) != 0 {
                basis.insert(c);
            }
        }
        let mut recovered = 0u32;
        for (j, &c) in self.cols.iter().enumerate() {
            if known & (1 << j) == 0 && basis.contains(c) {
                recovered |= 1 << j;
            }
        }
        recovered
    }

    /// Computes the full [`CodeProfile`]: information functions over all
    /// column subsets, weight enumerator over all codewords, and minimum
    /// distance.
    pub fn code_profile(&self) -> CodeProfile {
        let n = self.n;
        let k = self.k();
        // e~_g = sum of rank over all C(n, g) column subsets of size g.
        let mut info_funcs = alloc::vec![0u64; n + 1];
        for subset in 0u32..(1 << n) {
            let g = subset.count_ones() as usize;
            let r = col_rank(
                self.cols
                    .iter()
                    .enumerate()
                    .filter(|&(j, _)| subset & (1 << j) != 0)
                    .map(|(_, &c)| c),
            );
            info_funcs[g] += r as u64;
        }
        // A_w by enumerating all 2^k codewords.
        let mut weight_enum = alloc::vec![0u64; n + 1];
        for msg in 0u32..(1 << k) {
            let mut cw = 0u32;
            for (i, row) in self.rows.iter().enumerate() {
                if msg & (1 << i) != 0 {
                    cw ^= row;
                }
            }
            weight_enum[cw.count_ones() as usize] += 1;
        }
        let d_min = (1..=n).find(|&w| weight_enum[w] > 0).unwrap_or(0);
        CodeProfile {
            k,
            n,
            info_funcs,
            weight_enum,
            d_min,
        }
    }
}

impl fmt::Debug for LinearCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "LinearCode({self})")
    }
}

/// Renders the generator in the same `"1100,0111"` text form accepted by
/// [`FromStr`].
impl fmt::Display for LinearCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, row) in self.rows.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            for j in 0..self.n {
                f.write_str(if row & (1 << j) != 0 { "1" } else { "0" })?;
            }
        }
        Ok(())
    }
}

/// Parses a generator matrix from comma-separated rows of `0`/`1`
/// characters, e.g. `"1100,0111"` for a (4, 2) code.
impl FromStr for LinearCode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut rows = Vec::new();
        let mut n = 0usize;
        for (i, part) in s.split(',').enumerate() {
            let part = part.trim();
            if i == 0 {
                n = part.len();
                if n == 0 {
                    return Err(Error::MalformedMatrix {
                        reason: "empty row",
                    });
                }
                if n > 16 {
                    return Err(Error::MalformedMatrix {
                        reason: "row longer than 16 columns",
                    });
                }
            } else if part.len() != n {
                return Err(Error::MalformedMatrix {
                    reason: "rows have differing lengths",
                });
            }
            let mut row = 0u32;
            for (j, ch) in part.chars().enumerate() {
                match ch {
                    '1' => row |= 1 << j,
                    '0' => {}
                    _ => {
                        return Err(Error::MalformedMatrix {
                            reason: "rows must contain only '0' and '1'",
                        })
                    }
                }
            }
            rows.push(row);
        }
        LinearCode::new(&rows, n)
    }
}

/// Exact structural summary of a code: information functions, weight
/// enumerator, and minimum distance.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CodeProfile {
    /// Code dimension.
    pub k: usize,
    /// Code length.
    pub n: usize,
    /// Un-normalized information functions `e~_0 ..= e~_n`: `e~_g` is the sum
    /// of GF(2) ranks over all `C(n, g)` column subsets of size `g`.
    pub info_funcs: Vec<u64>,
    /// Weight enumerator `A_0 ..= A_n`: number of codewords of each weight.
    pub weight_enum: Vec<u64>,
    /// Minimum nonzero codeword weight.
    pub d_min: usize,
}

impl CodeProfile {
    /// Multiplicity of weight-2 codewords, the quantity driving the
    /// small-erasure stability of iterative decoding.
    pub fn a2(&self) -> u64 {
        self.weight_enum[2]
    }

    /// Coefficients `a_t` (for `t = 0 ..= n-1`) of the burst-node erasure
    /// transfer polynomial
    ///
    /// ```text
    /// q(p) = (1/n) * sum_t a_t * p^t * (1-p)^(n-1-t),
    /// ```
    ///
    /// the probability that a segment stays unknown after MAP erasure
    /// decoding when each other segment is independently unknown with
    /// probability `p`. Derived exactly from the information functions as
    /// `a_t = (n-t) e~_(n-t) - (t+1) e~_(n-1-t)`; each `a_t` is a
    /// non-negative integer.
    pub fn a_coeffs(&self) -> Vec<f64> {
        a_coeffs_from_info(self.n, |g| self.info_funcs[g] as f64)
    }
}

/// Shared form of the `a_t` recurrence, used both for exact per-code
/// information functions and for ensemble-averaged (fractional) ones.
pub(crate) fn a_coeffs_from_info(n: usize, e: impl Fn(usize) -> f64) -> Vec<f64> {
    let mut a = Vec::with_capacity(n);
    for t in 0..n {
        let v = (n - t) as f64 * e(n - t) - (t + 1) as f64 * e(n - 1 - t);
        // Exact in integers; tiny negative dust can only appear on averaged
        // inputs through float rounding.
        debug_assert!(v > -1e-6, "a_{t} = {v} must be non-negative");
        a.push(v.max(0.0));
    }
    a
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;

    #[test]
    fn rank_identity_and_zero() {
        assert_eq!(rank(&[0b01, 0b10], 2), 2);
        assert_eq!(rank(&[0, 0], 3), 0);
    }

    #[test]
    fn rank_dependent_rows() {
        // Third row equals the XOR of the first two.
        assert_eq!(rank(&[0b011, 0b110, 0b101], 3), 2);
    }

    #[test]
    fn parse_display_roundtrip() {
        let c: LinearCode = "1100,0111".parse().unwrap();
        assert_eq!(c.k(), 2);
        assert_eq!(c.n(), 4);
        assert_eq!(c.to_string(), "1100,0111");
    }

    #[test]
    fn parse_rejects_garbage() {
        assert!(matches!(
            "12,01".parse::<LinearCode>(),
            Err(Error::MalformedMatrix { .. })
        ));
        assert!(matches!(
            "110,01".parse::<LinearCode>(),
            Err(Error::MalformedMatrix { .. })
        ));
    }

    #[test]
    fn construction_rejects_defects() {
        // Dependent rows.
        assert_eq!(
            LinearCode::new(&[0b011, 0b011], 3).unwrap_err(),
            Error::RankDeficient
        );
        // Column 2 is all-zero.
        assert_eq!(
            LinearCode::new(&[0b001, 0b010], 3).unwrap_err(),
            Error::IdleColumn { index: 2 }
        );
        // [[1,1,0],[0,0,1]] emits the weight-1 codeword 001.
        assert!(matches!(
            LinearCode::new(&[0b011, 0b100], 3).unwrap_err(),
            Error::MinDistanceBelowTwo { .. }
        ));
        // k = n is not a valid expansion.
        assert!(matches!(
            LinearCode::new(&[0b01, 0b11], 2).unwrap_err(),
            Error::InvalidDimensions { .. }
        ));
    }

    #[test]
    fn repetition_profile() {
        // (3,1) repetition: every nonempty column subset has rank 1, so
        // e~_g = C(3, g).
        let c = LinearCode::new(&[0b111], 3).unwrap();
        let p = c.code_profile();
        assert_eq!(p.info_funcs, alloc::vec![0, 3, 3, 1]);
        assert_eq!(p.d_min, 3);
        assert_eq!(p.a_coeffs(), alloc::vec![0.0, 0.0, 3.0]);
    }

    #[test]
    fn spc_profile() {
        // (3,2) single parity check.
        let c: LinearCode = "110,011".parse().unwrap();
        let p = c.code_profile();
        assert_eq!(p.info_funcs, alloc::vec![0, 3, 6, 2]);
        assert_eq!(p.weight_enum, alloc::vec![1, 0, 3, 0]);
        assert_eq!(p.d_min, 2);
        assert_eq!(p.a2(), 3);
        // q(p) = (1/3)(6 p (1-p) + 3 p^2) = 2p - p^2.
        assert_eq!(p.a_coeffs(), alloc::vec![0.0, 6.0, 3.0]);
    }

    #[test]
    fn four_two_weights() {
        // Codewords: 0000, 1100, 0111, 1011.
        let c: LinearCode = "1100,0111".parse().unwrap();
        let p = c.code_profile();
        assert_eq!(p.weight_enum, alloc::vec![1, 0, 1, 2, 0]);
        assert_eq!(p.d_min, 2);
    }

    #[test]
    fn erasure_decode_spc() {
        let c: LinearCode = "110,011".parse().unwrap();
        // Two known symbols of an SPC determine the third.
        assert_eq!(c.erasure_map_decode(0b011), 0b100);
        // One known symbol of this generator determines nothing.
        assert_eq!(c.erasure_map_decode(0b001), 0);
        // Nothing left to recover when everything is known.
        assert_eq!(c.erasure_map_decode(0b111), 0);
    }

    #[test]
    fn erasure_decode_full_rank_recovers_all() {
        let c: LinearCode = "1100,0111".parse().unwrap();
        // Columns 1 and 2 span GF(2)^2, so the rest follows.
        assert_eq!(c.known_rank(0b0110), 2);
        assert_eq!(c.erasure_map_decode(0b0110), 0b1001);
    }
}
