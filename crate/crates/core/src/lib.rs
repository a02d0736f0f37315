//! Stationary symmetric α-stable (SαS) random fields indexed by `ℤᵈ`.
//!
//! A stationary SαS field is described here by a triplet: a kernel
//! function `f`, a nonsingular `ℤᵈ`-action `{φ_t}` on a σ-finite measure
//! space `(S, μ)`, and a ±1 cocycle `{c_t}`. The field is the stable
//! integral of the spectral functions
//!
//! ```text
//! f_t(s) = c_t(s) · (dμ∘φ_t/dμ(s))^{1/α} · f(φ_t(s))
//! ```
//!
//! against an SαS random measure with control measure μ. This crate
//!
//! * samples stable laws and simulates the integral exactly on finite
//!   weighted spaces, by truncated series on path spaces, and by an
//!   exact Gaussian-mixture construction for sub-Gaussian fields
//!   ([`stable`], [`fields`]);
//! * carries a catalog of four concrete action families with their
//!   cocycles, Radon–Nikodym data, and triplet transport ([`actions`],
//!   [`markov`]);
//! * computes ergodic and Neveu decompositions and a symbolic
//!   central-decomposition factor ledger ([`decomposition`]);
//! * issues ergodicity / complete-non-ergodicity verdicts through two
//!   independent routes and cross-validates them by Monte Carlo
//!   diagnostics ([`classifier`], [`diagnostics`]).
//!
//! The narrative guide in `book/` walks through the same material with
//! runnable snippets; see [`guide`].

pub mod actions;
pub mod classifier;
pub mod decomposition;
pub mod diagnostics;
mod error;
pub mod fields;
pub mod guide;
pub mod lattice;
pub mod markov;
pub mod rng;
pub mod stable;

pub use error::{Error, Result};
pub use lattice::{FieldRealization, GroupElement, RealizationMeta, Window};
pub use stable::{FiniteWeightedSpace, LePageConfig, StableParams};
