//! Newman-Penrose spin-coefficient machinery for three-dimensional almost
//! contact metric structures given in closed form on a single chart.
//!
//! The pipeline: parse a metric and Reeb field as expressions
//! ([`expr`]), derive connection and curvature ([`geometry`]), build the
//! adapted complex frame ([`frame`]), form the spin coefficients and their
//! covariant operators ([`np`]), classify the structure and test the
//! eta-Einstein condition ([`classify`]), and check every identity
//! numerically on sample grids ([`verify`]). The [`cli`] module drives all
//! of it from manifest files and writes deterministic reports.

pub mod classify;
pub mod cli;
pub mod expr;
pub mod frame;
pub mod geometry;
pub mod grid;
pub mod np;
pub mod verify;

#[cfg(test)]
pub(crate) mod testutil;
