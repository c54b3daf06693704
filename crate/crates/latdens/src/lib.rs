//! Regularized density estimation in weighted Korobov spaces on rank-1
//! lattices.
//!
//! Given `M` observations of an unknown 1-periodic density `f` on the unit
//! cube, the estimator solves a kernel-regularized least-squares problem in
//! the span of `K(x_k, .)` over the `N` points of a rank-1 lattice. The Gram
//! system is circulant, so fitting costs one length-`N` Fourier solve, and
//! every kernel quantity has a closed Bernoulli-polynomial form for even
//! smoothness orders.
//!
//! The crate provides
//!
//! * the even-degree Bernoulli polynomials and zeta values everything else is
//!   built from ([`special`]),
//! * the weighted Korobov kernel and its squared-weight companion
//!   ([`kernel`]),
//! * rank-1 lattice point sets and component-by-component construction of
//!   generating vectors ([`lattice`]),
//! * a Sobol sequence for evaluation-grid shifts ([`sobol`]),
//! * the estimator itself: assembly, circulant solve, evaluation,
//!   serialization ([`estimator`]),
//! * the benchmark product density with an exact rejection sampler
//!   ([`sampling`]),
//! * a Monte-Carlo mean integrated squared error harness with a
//!   confidence-interval stopping rule ([`mise`]).
//!
//! The `latdens` binary exposes the same functionality on the command line.

pub mod cli;
mod dft;
pub mod error;
pub mod estimator;
pub mod kernel;
pub mod lattice;
pub mod mise;
pub mod rng;
pub mod sampling;
pub mod sobol;
pub mod special;

pub use error::{Error, Result};
