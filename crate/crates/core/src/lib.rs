pub mod alphabet;
pub mod analysis;
pub mod distributions;
pub mod entropy;
pub mod error;
pub mod gambler;
pub mod io;
pub mod ops;
pub mod source;
pub mod stages;
pub mod string;

pub use alphabet::{Alphabet, ProductAlphabet, Symbol};
pub use error::{Error, Result};
pub use source::{Generator, SequenceSource};
pub use string::SymbolString;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/sequences.md")]
    mod sequences {}
    #[doc = include_str!("../../../book/src/block_entropy.md")]
    mod block_entropy {}
    #[doc = include_str!("../../../book/src/gamblers.md")]
    mod gamblers {}
    #[doc = include_str!("../../../book/src/distributions.md")]
    mod distributions {}
    #[doc = include_str!("../../../book/src/experiments.md")]
    mod experiments {}
}
