//! Extra translation invariance of finitely generated shift-invariant spaces.
//!
//! A shift-invariant space `S(Φ) ⊂ L²(ℝ)` is the closed span of the integer
//! translates of finitely many generators. This crate decides, on a
//! discretized frequency lattice, for which `n` the space is also invariant
//! under translations by `1/n`, and reports the consequences: the rank
//! level sets of the Gramian, lower bounds on the zero sets of the generator
//! spectra, and the frame bounds of the cutoff systems.
//!
//! Everything works on frequency fibers `φ̂(ω + k)`, `ω ∈ [0, 1)`, truncated
//! to `k ∈ [-K, K)`:
//!
//! * [`spectrum`] evaluates generator transforms on a [`FrequencyGrid`].
//! * [`fiber`] builds fiber matrices, the Gramian field and numerical ranks.
//! * [`invariance`] holds the rank-sum test, the order search and the
//!   support-measure bounds.
//! * [`frames`] computes frame bounds of translate systems.
//! * [`oracle`] is an independent least-squares membership check used to
//!   cross-validate the rank test.
//! * [`config`] and [`report`] drive the full pipeline behind the CLI.

pub mod config;
pub mod error;
pub mod fiber;
pub mod frames;
pub mod invariance;
pub mod oracle;
pub mod report;
pub mod spectrum;

pub use error::{Error, Result};
pub use spectrum::{FrequencyGrid, GeneratorSpec, PiecewiseConstantSpectrum, SampledSpectrum, Sampling};

pub use num_complex::Complex64;
