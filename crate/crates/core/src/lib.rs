//! Lattice string trajectories and the 1/N expansion of SO(N) Wilson loops.

pub mod checks;
pub mod coeff;
pub mod corpus;
pub mod dsl;
pub mod error;
pub mod gauge;
pub mod lattice;
pub mod loops;
pub mod ops;
pub mod rational;
pub mod trajectory;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/intro.md")]
    mod intro {}
    #[doc = include_str!("../../../book/src/loops.md")]
    mod loops {}
    #[doc = include_str!("../../../book/src/operations.md")]
    mod operations {}
    #[doc = include_str!("../../../book/src/trajectories.md")]
    mod trajectories {}
    #[doc = include_str!("../../../book/src/coefficients.md")]
    mod coefficients {}
    #[doc = include_str!("../../../book/src/gauge.md")]
    mod gauge {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
