//! Stieltjes calculus with respect to left-continuous derivators of bounded
//! variation: measures, integrals, derivatives, the fundamental theorems and
//! their counterexamples.
//!
//! The guide in `book/` walks through each module; its listings run as
//! doc-tests of this crate.

pub mod derivator;
pub mod error;
pub mod interval;
pub mod measure;
pub mod oscillator;
pub mod poly;
pub mod sum;
pub mod function;
pub mod integral;
pub mod continuity;
pub mod derivative;
pub mod ftc;
pub mod density;
pub mod counterexamples;
pub mod spec;
pub mod corpus;

// Chapters of the guide, compiled so their listings run under `cargo test --doc`.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/derivators.md")]
    mod derivators {}
    #[doc = include_str!("../../../book/src/measures.md")]
    mod measures {}
    #[doc = include_str!("../../../book/src/integration.md")]
    mod integration {}
    #[doc = include_str!("../../../book/src/derivatives.md")]
    mod derivatives {}
    #[doc = include_str!("../../../book/src/ftc.md")]
    mod ftc {}
    #[doc = include_str!("../../../book/src/density.md")]
    mod density {}
    #[doc = include_str!("../../../book/src/counterexample.md")]
    mod counterexample {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
