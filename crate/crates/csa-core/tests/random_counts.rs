//! Enumeration counts for the random-code model checked against direct
//! exhaustive enumeration of generator matrices (feasible for small sizes)
//! and frozen exact values for the larger ones.

use csa_core::codes::{rank, LinearCode};
use csa_core::ensemble::{expected_info_funcs, random_code_counts, RandomEnsemble};
use csa_core::Error;

/// All qualifying k x n generators, as column-pattern vectors. Walks every
/// one of the (2^k - 1)^n column assignments; qualification is delegated to
/// the constructor under test only for rejection bookkeeping, while the
/// rank arithmetic below is recomputed locally.
fn enumerate_qualifying(k: usize, n: usize) -> Vec<Vec<u32>> {
    let patterns = (1u32 << k) - 1;
    let total = (patterns as u64).pow(n as u32);
    let mut out = Vec::new();
    for idx in 0..total {
        let mut cols = Vec::with_capacity(n);
        let mut rest = idx;
        for _ in 0..n {
            cols.push(1 + (rest % patterns as u64) as u32);
            rest /= patterns as u64;
        }
        let mut rows = vec![0u32; k];
        for (j, c) in cols.iter().enumerate() {
            for (i, row) in rows.iter_mut().enumerate() {
                if c & (1 << i) != 0 {
                    *row |= 1 << j;
                }
            }
        }
        if LinearCode::new(&rows, n).is_ok() {
            out.push(cols);
        }
    }
    out
}

/// Rank of a set of column patterns (each a k-bit vector).
fn pattern_rank(cols: &[u32]) -> usize {
    rank(cols, 16)
}

#[test]
fn direct_enumeration_matches_counting_for_small_sizes() {
    for (k, n) in [(1, 2), (1, 3), (1, 4), (2, 3), (2, 4), (2, 5), (3, 4)] {
        let counts = random_code_counts(k, n).unwrap();
        let all = enumerate_qualifying(k, n);
        assert_eq!(counts.total, all.len() as u64, "J({k},{n})");

        // Prefix-rank histogram: how many qualifying matrices have first-g
        // columns of rank u.
        for g in 0..=n {
            for u in 0..=k {
                let direct = all
                    .iter()
                    .filter(|cols| pattern_rank(&cols[..g]) == u)
                    .count() as u64;
                assert_eq!(
                    counts.prefix_rank[g][u], direct,
                    "K(g={g}, u={u}) for ({k},{n})"
                );
            }
        }

        // The expected information function must equal the raw average of
        // sum-of-subset-ranks over all qualifying matrices.
        let expect = expected_info_funcs(k, n).unwrap();
        for g in 0..=n {
            let mut total = 0u64;
            for cols in &all {
                for mask in 0u32..(1 << n) {
                    if mask.count_ones() as usize != g {
                        continue;
                    }
                    let subset: Vec<u32> = (0..n)
                        .filter(|j| mask & (1 << j) != 0)
                        .map(|j| cols[j])
                        .collect();
                    total += pattern_rank(&subset) as u64;
                }
            }
            let avg = total as f64 / all.len() as f64;
            assert!(
                (expect[g] - avg).abs() < 1e-9,
                "E[e~_{g}]({k},{n}): {} vs {avg}",
                expect[g]
            );
        }
    }
}

#[test]
fn qualifying_matrix_counts_are_frozen() {
    for (k, n, j) in [
        (1, 2, 1u64),
        (1, 5, 1),
        (2, 3, 6),
        (2, 4, 54),
        (2, 5, 210),
        (2, 8, 6510),
        (2, 9, 19626),
        (2, 12, 531366),
        (3, 4, 168),
        (3, 5, 5880),
    ] {
        assert_eq!(random_code_counts(k, n).unwrap().total, j, "J({k},{n})");
    }
}

#[test]
fn expected_info_funcs_match_frozen_fractions() {
    let e23 = expected_info_funcs(2, 3).unwrap();
    for (g, want) in [0.0, 3.0, 6.0, 2.0].iter().enumerate() {
        assert!((e23[g] - want).abs() < 1e-12);
    }
    let e24 = expected_info_funcs(2, 4).unwrap();
    for (g, want) in [0.0, 4.0, 32.0 / 3.0, 8.0, 2.0].iter().enumerate() {
        assert!((e24[g] - want).abs() < 1e-12);
    }
    let e25 = expected_info_funcs(2, 5).unwrap();
    for (g, want) in [0.0, 5.0, 120.0 / 7.0, 136.0 / 7.0, 10.0, 2.0]
        .iter()
        .enumerate()
    {
        assert!((e25[g] - want).abs() < 1e-12);
    }
}

#[test]
fn expected_info_funcs_endpoints() {
    fn binom(n: usize, g: usize) -> f64 {
        let mut out = 1.0;
        for i in 0..g {
            out = out * (n - i) as f64 / (i + 1) as f64;
        }
        out
    }
    // e~_0 = 0 and e~_n = k for every qualifying matrix; e~_{n-1} = n*k
    // because deleting any single column preserves full rank (d_min >= 2).
    for (k, n) in [(1, 6), (2, 7), (2, 12), (3, 5)] {
        let e = expected_info_funcs(k, n).unwrap();
        assert_eq!(e[0], 0.0);
        assert!((e[n] - k as f64).abs() < 1e-12);
        assert!((e[n - 1] - (n * k) as f64).abs() < 1e-12);
        // e~_g sums ranks over all C(n,g) subsets; the *average* rank per
        // subset grows with the subset size and never exceeds k.
        for g in 0..n {
            let avg_g = e[g] / binom(n, g);
            let avg_next = e[g + 1] / binom(n, g + 1);
            assert!(avg_g <= avg_next + 1e-12, "avg rank dips at g={g} ({k},{n})");
            assert!(avg_next <= k as f64 + 1e-12);
        }
    }
}

#[test]
fn ensemble_pair_weights_match_frozen_fractions() {
    for (n, want) in [
        (3usize, 3.0),
        (4, 4.0 / 3.0),
        (5, 4.0 / 7.0),
        (8, 8.0 / 155.0),
        (9, 72.0 / 3271.0),
        (12, 12.0 / 8051.0),
    ] {
        let e = RandomEnsemble::new(2, vec![n], vec![1.0]).unwrap();
        let got = e.stats().unwrap().avg_a2;
        assert!((got - want).abs() < 1e-12, "avg A2 (2,{n}): {got} vs {want}");
    }
    for (k, n, want) in [(3usize, 4usize, 6.0), (3, 5, 20.0 / 7.0)] {
        let e = RandomEnsemble::new(k, vec![n], vec![1.0]).unwrap();
        let got = e.stats().unwrap().avg_a2;
        assert!((got - want).abs() < 1e-12, "avg A2 ({k},{n}): {got} vs {want}");
    }
}

#[test]
fn pair_weight_equals_direct_average_of_a2() {
    // The model-average pair weight must equal the plain average of each
    // qualifying code's A_2 (weight enumerator looked up per matrix).
    for (k, n) in [(2usize, 3usize), (2, 4), (2, 5), (3, 4)] {
        let mut total_a2 = 0u64;
        let all = enumerate_qualifying(k, n);
        for cols in &all {
            let mut rows = vec![0u32; k];
            for (j, c) in cols.iter().enumerate() {
                for (i, row) in rows.iter_mut().enumerate() {
                    if c & (1 << i) != 0 {
                        *row |= 1 << j;
                    }
                }
            }
            let code = LinearCode::new(&rows, n).unwrap();
            total_a2 += code.code_profile().weight_enum[2];
        }
        let avg = total_a2 as f64 / all.len() as f64;
        let e = RandomEnsemble::new(k, vec![n], vec![1.0]).unwrap();
        let got = e.stats().unwrap().avg_a2;
        assert!((got - avg).abs() < 1e-9, "A2 average for ({k},{n})");
    }
}

#[test]
fn model_average_matches_direct_unrecoverability_average() {
    // a-coefficients of the averaged profile = average of per-code
    // a-coefficients (both are linear in the information functions).
    for (k, n) in [(2usize, 4usize), (2, 5), (3, 4)] {
        let stats = RandomEnsemble::new(k, vec![n], vec![1.0])
            .unwrap()
            .stats()
            .unwrap();
        let all = enumerate_qualifying(k, n);
        let mut avg = vec![0.0; n];
        for cols in &all {
            let mut rows = vec![0u32; k];
            for (j, c) in cols.iter().enumerate() {
                for (i, row) in rows.iter_mut().enumerate() {
                    if c & (1 << i) != 0 {
                        *row |= 1 << j;
                    }
                }
            }
            let a = LinearCode::new(&rows, n).unwrap().code_profile().a_coeffs();
            for t in 0..n {
                avg[t] += a[t] / all.len() as f64;
            }
        }
        for t in 0..n {
            assert!(
                (stats.a_coeffs[0][t] - avg[t]).abs() < 1e-9,
                "a_{t} for ({k},{n}): {} vs {}",
                stats.a_coeffs[0][t],
                avg[t]
            );
        }
    }
}

#[test]
fn enumeration_budget_is_enforced() {
    assert!(matches!(
        random_code_counts(4, 6),
        Err(Error::UnsupportedSize { .. })
    ));
    assert!(matches!(
        random_code_counts(2, 17),
        Err(Error::UnsupportedSize { .. })
    ));
    assert!(matches!(
        random_code_counts(0, 3),
        Err(Error::UnsupportedSize { .. })
    ));
    // k = n has no qualifying matrices under the d_min >= 2 requirement
    // and is rejected up front.
    assert!(random_code_counts(2, 2).is_err());
}
