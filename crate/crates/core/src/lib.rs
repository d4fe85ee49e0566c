//! Exact nodal counting for Dirichlet eigenfunctions of the right isosceles
//! triangle `{0 <= y <= x <= pi}`.
//!
//! The eigenfunctions are `phi_{m,n}(x, y) = sin(mx) sin(ny) - sin(nx) sin(my)`
//! with `m > n >= 1` and eigenvalue `m^2 + n^2`. Two exact routes to the
//! number of nodal domains are provided:
//!
//! * [`graph`] builds the nodal connectivity multigraph from the checkerboard
//!   cell decomposition and reads the counts off with one union-find pass.
//! * [`recursion`] evaluates the closed-form integer recursion for the loop
//!   count and recombines it with the boundary intersection count.
//!
//! [`oracle`] is an independent sign-grid flood fill used only for
//! cross-checking. [`stats`] and [`trace`] build the nodal sequence and its
//! distribution, cumulative loop counts and their Fourier spectra.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod graph;
pub mod modes;
pub mod oracle;
pub mod phi;
pub mod recursion;
pub mod stats;
pub mod trace;
pub mod unionfind;

pub use error::{NodalError, Result};
pub use modes::{enumerate_spectrum, reduce, weyl_q, ModePair, Reduction, SpectralSequence};
pub use recursion::{nodal_count, Method, NodalSummary};
