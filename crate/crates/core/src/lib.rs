//! Theta-characteristic combinatorics, rigorous numerical evaluation of first-
//! and second-order theta functions, exact Heisenberg-representation algebra,
//! numerical identity checkers (Frobenius, Riemann, Grushevsky), hyperelliptic
//! period matrices from real branch points, and the Gunning multisecant rank
//! check.
//!
//! The crate is organized as:
//! - [`chars`]: exact Z_2 combinatorics of characteristics;
//! - [`theta`]: certified lattice-sum evaluation of theta functions;
//! - [`heisenberg`]: exact integer polynomial algebra for the X_sigma action;
//! - [`identities`]: numerical residual evaluators for the theta identities;
//! - [`symplectic`]: Sp(2g, Z) plumbing, characteristic action, transport;
//! - [`jacobian`]: period matrices of real hyperelliptic curves, vanishing
//!   pattern classification, the Gunning multisecant check;
//! - [`acceptance`]: the end-to-end check suite used by tests and the CLI.
//!
//! With the default `parallel` feature, batch evaluations use rayon; disabling
//! the feature gives a bit-identical sequential fallback.

pub mod acceptance;
pub mod chars;
pub mod error;
pub mod heisenberg;
pub mod identities;
pub mod jacobian;
pub mod linalg;
pub mod sampling;
pub mod symplectic;
pub mod theta;

pub use error::{Error, Result};

/// Map `0..n` through `f`, in parallel when the `parallel` feature is enabled.
/// Results are collected in index order, so both paths are bit-identical.
#[cfg(feature = "parallel")]
pub(crate) fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    use rayon::prelude::*;
    (0..n).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    (0..n).map(f).collect()
}

/// Always-sequential variant, kept for benchmark comparisons.
pub fn map_indexed_seq<T, F>(n: usize, f: F) -> Vec<T>
where
    F: Fn(usize) -> T,
{
    (0..n).map(f).collect()
}
