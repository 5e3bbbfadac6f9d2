//! Recovery of shift-invariant signals from lowpass observations.
//!
//! A signal `x(t) = Σ_n Σ_k a_n[k] φ_n(t - kT)` is observed only through a
//! lowpass filter with cutoff `π/T_c`, optionally after multiplication by
//! `T`-periodic mixing functions. This crate answers three questions:
//!
//! * can the coefficients `a_n[k]` be recovered at all
//!   ([`recoverability`]), based on Grammians of the generators and their
//!   lowpass projections ([`grammian`]);
//! * which mixers make recovery possible when the plain lowpass data is not
//!   enough ([`mixing`], [`hadamard`]);
//! * and, for a concrete scenario, what the recovered coefficients are
//!   ([`pipeline`]).
//!
//! Everything is computed in the frequency domain. Sweeps over the base band
//! run on rayon when the `parallel` feature is enabled (the default) and
//! sequentially otherwise; reductions always happen in grid-index order so
//! both builds produce bit-identical results.

pub mod config;
pub mod error;
pub mod generators;
pub mod grammian;
pub mod hadamard;
pub mod linalg;
pub mod mixing;
pub mod par;
pub mod pipeline;
pub mod recoverability;

pub use error::{Error, Result};
pub use generators::{Generator, GeneratorSet};
pub use grammian::{FrequencyGrid, TruncationPolicy};

pub use num_complex::Complex64;
