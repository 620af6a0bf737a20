//! Machines with revisable output tapes, their normal forms, and the spaces
//! they act on.
//!
//! The crate is organized bottom-up:
//!
//! * [`baire`] — streams of naturals and the pairing/interleaving toolkit.
//! * [`vm`] — a small register machine with three output disciplines
//!   (monotone append, revisable write, finitely-revisable write), a total
//!   Gödel numbering, oracles and whitelist universes, and monotone
//!   associates for functions on streams.
//! * [`transforms`] — normal-form constructions: trading revisable output
//!   for a limit, trading a limit for jump access, inverting limits and
//!   jumps, and the uniform control operator.
//! * [`spaces`] — representations, their jumps, and translators between
//!   jumped variants.
//! * [`metric`] — computable metric spaces, Cauchy names, metric jumps,
//!   moduli of continuity.
//! * [`gallery`] — concrete machines and functions exercising the bounds:
//!   equality testing, functions with few mind changes, derivatives,
//!   distance to the Mandelbrot set.

pub mod baire;
pub mod error;
pub mod gallery;
pub mod interval;
pub mod metric;
pub mod spaces;
pub mod transforms;
pub mod vm;

pub use error::Error;
