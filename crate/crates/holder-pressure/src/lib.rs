//! Numerical toolkit for the double Hölder regularity of the incompressible
//! Euler pressure: Littlewood-Paley blocks, Hölder-Zygmund estimators,
//! periodic and disk pressure solvers, boundary-normal coordinates, reflection
//! across the boundary and a small pseudodifferential calculus.

pub mod bounded_solver;
pub mod error;
pub mod extension;
pub mod fields;
pub mod experiments;
pub mod geometry;
pub mod io;
pub mod norms;
pub mod polar;
pub mod pressure_periodic;
pub mod spectral_core;
pub mod symbols;

pub use error::{Error, Result};

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/introduction.md")]
mod book_introduction {}

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/dyadic_blocks.md")]
mod book_dyadic_blocks {}

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/norms.md")]
mod book_norms {}

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/periodic_pressure.md")]
mod book_periodic_pressure {}

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/disk.md")]
mod book_disk {}

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/symbols.md")]
mod book_symbols {}

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/experiments.md")]
mod book_experiments {}
