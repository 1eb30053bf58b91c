//! Bundled reference codes, generator matrices, and code-selection
//! distributions.
//!
//! The selection distributions shipped here are benchmark operating points
//! for common design rates, obtained by differential-evolution threshold
//! optimization (see [`crate::optim`]); they are the regression baselines
//! used throughout the test suite, and convenient starting points for
//! experiments.

use alloc::vec;
use alloc::vec::Vec;

use crate::codes::LinearCode;
use crate::ensemble::{normalized_pmf, ExplicitEnsemble, RandomEnsemble};

/// The `(n, 1)` repetition code: one information segment copied `n` times.
pub fn repetition(n: usize) -> LinearCode {
    LinearCode::new(&[(1u32 << n) - 1], n).expect("repetition code is always valid")
}

/// The `(k+1, k)` single parity check code: `k` information segments plus
/// their XOR.
pub fn spc(k: usize) -> LinearCode {
    let n = k + 1;
    let rows: Vec<u32> = (0..k).map(|i| (1 << i) | (1 << (n - 1))).collect();
    LinearCode::new(&rows, n).expect("single parity check code is always valid")
}

/// A fixed reference generator for each supported length at dimension 2,
/// used by the bundled simulation scenarios. Rows follow a runs-of-ones
/// layout (first row all-ones then zeros, second row zeros then all-ones,
/// overlapping in the middle), which gives a good minimum distance at each
/// length. Returns `None` for lengths without a shipped matrix.
pub fn reference_generator(n: usize) -> Option<LinearCode> {
    let s = match n {
        3 => "110,011",
        4 => "1100,0111",
        5 => "11100,00111",
        8 => "11110000,00111111",
        9 => "111110000,011111111",
        12 => "111111110000,000011111111",
        _ => return None,
    };
    Some(s.parse().expect("reference generator is valid"))
}

fn explicit(codes: Vec<LinearCode>, raw_pmf: &[f64]) -> ExplicitEnsemble {
    let pmf = normalized_pmf(raw_pmf).expect("preset p.m.f. is valid");
    ExplicitEnsemble::new(codes, pmf).expect("preset ensemble is valid")
}

fn random(k: usize, lengths: Vec<usize>, raw_pmf: &[f64]) -> RandomEnsemble {
    let pmf = normalized_pmf(raw_pmf).expect("preset p.m.f. is valid");
    RandomEnsemble::new(k, lengths, pmf).expect("preset ensemble is valid")
}

/// Repetition-code (IRSA) benchmark distribution at rate 1/3: lengths
/// {2, 3, 6}, threshold ~ 0.879.
pub fn irsa_rate_1_3() -> ExplicitEnsemble {
    explicit(
        vec![repetition(2), repetition(3), repetition(6)],
        &[0.554016, 0.261312, 0.184672],
    )
}

/// Repetition-code (IRSA) benchmark distribution at rate 2/5: lengths
/// {2, 3, 4}, threshold ~ 0.782.
pub fn irsa_rate_2_5() -> ExplicitEnsemble {
    explicit(
        vec![repetition(2), repetition(3), repetition(4)],
        &[0.622412, 0.255176, 0.122412],
    )
}

/// Plain twofold repetition (CRDSA-style) at rate 1/2, threshold exactly
/// 0.5.
pub fn irsa_rate_1_2() -> ExplicitEnsemble {
    explicit(vec![repetition(2)], &[1.0])
}

/// CSA benchmark distribution at `k = 2`, rate 1/3, under the random-code
/// model: lengths {3, 4, 5, 12}, threshold ~ 0.868.
pub fn csa_k2_rate_1_3() -> RandomEnsemble {
    random(
        2,
        vec![3, 4, 5, 12],
        &[0.088459, 0.544180, 0.121490, 0.245871],
    )
}

/// CSA benchmark distribution at `k = 2`, rate 2/5, under the random-code
/// model: lengths {3, 4, 5, 8, 9}, threshold ~ 0.796.
pub fn csa_k2_rate_2_5() -> RandomEnsemble {
    random(
        2,
        vec![3, 4, 5, 8, 9],
        &[0.153057, 0.485086, 0.135499, 0.114235, 0.112124],
    )
}

/// CSA at `k = 2`, rate 1/2: every burst uses a random (4, 2) code,
/// threshold ~ 0.656.
pub fn csa_k2_rate_1_2() -> RandomEnsemble {
    random(2, vec![4], &[1.0])
}

/// CSA at `k = 2`, rate 3/5: lengths {3, 4} weighted (2/3, 1/3), threshold
/// ~ 0.409 (equal to its stability bound).
pub fn csa_k2_rate_3_5() -> RandomEnsemble {
    random(2, vec![3, 4], &[2.0 / 3.0, 1.0 / 3.0])
}

/// Replaces the random-matrix draw of a random ensemble with the fixed
/// [`reference_generator`] of each length, keeping the same selection
/// p.m.f. This is the configuration the bundled finite-frame simulation
/// scenarios use. Returns `None` if some length has no shipped generator.
pub fn with_reference_generators(ensemble: &RandomEnsemble) -> Option<ExplicitEnsemble> {
    let codes: Option<Vec<LinearCode>> = ensemble
        .lengths()
        .iter()
        .map(|&n| reference_generator(n))
        .collect();
    Some(
        ExplicitEnsemble::new(codes?, ensemble.pmf().to_vec())
            .expect("pinned variant inherits a valid p.m.f."),
    )
}
