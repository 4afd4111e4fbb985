pub mod error;
pub mod fraction;
pub mod harness;
pub mod measures;
pub mod numtheory;
pub mod predictions;
pub mod sequences;
pub mod subsets;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../README.md")]
    mod readme {}
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/sets.md")]
    mod sets {}
    #[doc = include_str!("../../../book/src/sequences.md")]
    mod sequences {}
    #[doc = include_str!("../../../book/src/correlation.md")]
    mod correlation {}
    #[doc = include_str!("../../../book/src/main_terms.md")]
    mod main_terms {}
    #[doc = include_str!("../../../book/src/experiments.md")]
    mod experiments {}
}
