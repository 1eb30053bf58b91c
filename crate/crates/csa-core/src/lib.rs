//! Analysis toolkit for coded slotted ALOHA (CSA) random access.
//!
//! In a CSA MAC frame, each of `M` users splits a burst into `k` information
//! segments, encodes them with a small binary linear block code into `n_h`
//! coded segments, and transmits each segment in a distinct slot out of `N`.
//! The receiver peels the resulting bipartite graph: slots holding a single
//! unresolved segment reveal it, bursts run MAP erasure decoding over their
//! known segments, and recovered segments are cancelled from their slots.
//!
//! This crate provides the three layers of that system:
//!
//! * [`codes`] — exact GF(2) linear-algebra on bit-packed generator matrices:
//!   rank, information functions, weight enumerators, MAP erasure decoding.
//! * [`ensemble`] / [`density`] — code-selection ensembles (explicit code
//!   lists or the uniform random-code model), their averaged statistics, the
//!   asymptotic density-evolution recursion, decoding thresholds, and the
//!   degree-2 stability bound.
//! * [`optim`] / [`sim`] — differential-evolution search over the selection
//!   distribution, and finite-frame Monte Carlo simulation of the peeling
//!   receiver.
//!
//! The crate is `no_std` (with `alloc`) so the analysis core can run in
//! embedded or WASM hosts; all randomized routines take explicit seeds and
//! are bit-reproducible.

#![no_std]
#![warn(missing_docs)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod codes;
pub mod density;
pub mod ensemble;
mod error;
mod mix;
pub mod optim;
pub mod presets;
pub mod sim;

pub use error::Error;

/// Convenience alias: every fallible operation in this crate uses [`Error`].
pub type Result<T> = core::result::Result<T, Error>;

/// Default seed for every randomized routine (0xC5A). An arbitrary fixed
/// constant, so that out-of-the-box runs are reproducible; pass an explicit
/// seed anywhere randomness matters to you.
pub const DEFAULT_SEED: u64 = 0xC5A;
