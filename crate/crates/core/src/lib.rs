//! Exact bipartite entanglement of random quantum states and its moment-based
//! predictions.
//!
//! The crate is organized bottom-up:
//!
//! - [`partitions`]: integer partitions, the power-sum/monomial transition
//!   matrix, phase-averaged correlators and the exact coefficient tables of
//!   `⟨τⁿ⟩`.
//! - [`ensembles`]: Haar states, intermediate unitary eigenvectors, disordered
//!   many-body eigenstates and exchangeable states.
//! - [`entanglement`]: reduced density matrices, von Neumann and linear
//!   entropies, tangle and the truncated series.
//! - [`statistics`]: moments, ensemble averages and scaling fits.
//! - [`theory`]: closed-form predictions from moment tables.
//! - [`oracle`]: brute-force exact phase averages for small vectors.
//! - [`cli`]: the command-line driver and experiment pipelines.

pub mod cli;
pub mod ensembles;
pub mod entanglement;
pub mod error;
pub mod oracle;
pub mod partitions;
pub mod seed;
pub mod statistics;
pub mod theory;

pub use error::{Error, Result};
