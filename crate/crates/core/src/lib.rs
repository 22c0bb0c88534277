pub mod continuous;
pub mod discrete;
pub mod error;
pub mod federated;
pub mod matroid;
pub mod multilinear;
pub mod objectives;
pub mod rng;
pub mod rounding;
pub mod subset;
pub mod synthetic;

pub use error::{Error, Result};
pub use subset::Subset;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/objectives.md")]
    mod objectives {}
    #[doc = include_str!("../../../book/src/multilinear.md")]
    mod multilinear {}
    #[doc = include_str!("../../../book/src/matroids.md")]
    mod matroids {}
    #[doc = include_str!("../../../book/src/federated.md")]
    mod federated {}
    #[doc = include_str!("../../../book/src/continuous.md")]
    mod continuous {}
    #[doc = include_str!("../../../book/src/rounding.md")]
    mod rounding {}
    #[doc = include_str!("../../../book/src/discrete.md")]
    mod discrete {}
    #[doc = include_str!("../../../book/src/experiments.md")]
    mod experiments {}
}
