//! Call graph pruning driven by origin methods.
//!
//! An *origin method* is the declaration that first introduces a signature
//! in a type hierarchy; every override below it is a *derivative*. Under
//! class hierarchy analysis a handful of origins (think `Iterator.next()`)
//! cause a large share of all call edges. This crate finds those origins,
//! measures how far their derivatives reach ([`localness`]), prunes the edges
//! into derivatives of the Top-N origins ([`prune`]) and measures what that
//! does to vulnerability reachability ([`vuln`]).
//!
//! Inputs come from the line-delimited interchange format in [`io`] or from
//! the seeded generator in [`synth`]. [`pipeline`] strings everything
//! together for batch experiments.

pub mod error;
pub mod fixture;
pub mod graph;
pub mod io;
pub mod localness;
pub mod origins;
pub mod pipeline;
pub mod prune;
pub mod synth;
pub mod vuln;

pub use error::{Error, Result};
