//! Numerical laboratory for frequency operators on repeated quantum
//! measurements.
//!
//! The crate is organised around five modules:
//!
//! * [`hilbert`]: pure states, nondegenerate observables, Born weights and
//!   seeded Haar sampling.
//! * [`finite_freq`]: the finite-copy frequency operator `F^N`, its
//!   projectors `Π_n^N`, the binomial frequency law and the
//!   Finkelstein–Hartle residual `Δ_N`.
//! * [`measures`]: product measures on infinite outcome sequences, both the
//!   Born measure and the family of `g`-measures, with Monte-Carlo
//!   strong-law experiments.
//! * [`components`]: equivalence of eventually-constant vector sequences,
//!   component overlaps and the completeness bound for component bases.
//! * [`gleason`]: frame-function audits and least-squares recovery of a
//!   density operator from frame data.
//!
//! The guide in `book/` walks through each of these with runnable snippets;
//! those snippets are compiled and run as doc-tests of this crate.

pub mod components;
mod error;
pub mod finite_freq;
pub mod gleason;
pub mod hilbert;
pub mod measures;

pub use error::{Error, Result};

pub use num_complex::Complex64 as C64;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/hilbert.md")]
    mod hilbert {}
    #[doc = include_str!("../../../book/src/finite_frequency.md")]
    mod finite_frequency {}
    #[doc = include_str!("../../../book/src/measures.md")]
    mod measures {}
    #[doc = include_str!("../../../book/src/components.md")]
    mod components {}
    #[doc = include_str!("../../../book/src/gleason.md")]
    mod gleason {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
    #[doc = include_str!("../../../README.md")]
    mod readme {}
}
