//! Numerical toolkit for perturbed-Gaussian product measures on slabs `S = S' x R`.
//!
//! The crate is organized around one construction: a weight
//! `exp(-|x|^2/2 - sum_i B_i(x_i))` with convex axis potentials `B_i` is
//! rewritten, one axis at a time, through a monotone map `A_i` with
//! `A_i' >= 1`, so that half-space slices `{x_N > lambda}` become the
//! extremal sets of the weighted perimeter. Everything else here is
//! machinery for certifying the resulting inequalities numerically:
//!
//! * [`specfun`] — Gaussian CDF/tail and their inverses.
//! * [`quad`] — adaptive Gauss–Kronrod quadrature with tail truncation.
//! * [`density`] — axis potentials and product densities.
//! * [`transport`] — the monotone maps `A_i` and their certificates.
//! * [`isoperimetry`] — measures, perimeters, slice comparisons, variations.
//! * [`spectral`] — stability spectra: `tau` and the weighted Neumann `kappa_1`.
//! * [`rearrangement`] — weighted decreasing rearrangement onto slices.
//! * [`pde`] — degenerate elliptic problems and symmetrized comparison bounds.
//! * [`config`] — the experiment-file format consumed by the CLI.

pub mod config;
pub mod corpus;
pub mod density;
pub mod error;
pub mod grid;
mod interp;
pub mod isoperimetry;
pub mod pde;
pub mod quad;
pub mod rearrangement;
pub mod region;
pub mod report;
pub mod specfun;
pub mod spectral;
pub mod transport;

pub use error::{Error, Result};
pub use specfun::Tolerance;
