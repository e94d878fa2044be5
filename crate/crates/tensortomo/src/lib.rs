//! Numerical toolkit for the ray transform of symmetric m-tensor fields in R^n
//! restricted to lines through a source curve.
//!
//! The crate is organized around one pipeline:
//!
//! * [`symtensor`] — exact finite-dimensional algebra of symmetric tensors
//!   (multi-index bases, symmetric products, contractions, weighted inner
//!   products);
//! * [`geometry`] — source curves, hyperplane–curve intersections, genericity
//!   and Kirillov-Tuy verification, covector classification and artifact
//!   flowout prediction;
//! * [`xray`] — the discrete restricted ray transform, its adjoint, the normal
//!   operator (composed and direct-kernel routes) and the symmetrized
//!   derivative;
//! * [`microlocal`] — pointwise symbol calculus: the normal-operator principal
//!   symbol, solenoidal projector symbol, parametrix symbol with smooth
//!   cutoff, and an oscillatory probe that validates the symbol against the
//!   discrete operator;
//! * [`recon`] — solenoidal–potential decomposition, block-frozen
//!   pseudodifferential application of the parametrix, phantom generation and
//!   artifact-energy diagnostics;
//! * [`cli`] — experiment configuration, binary field/sinogram formats and the
//!   subcommand runner behind the `tensortomo` binary.
//!
//! See the crate-level `examples/` directory for one runnable example per
//! major capability.

pub mod cli;
pub mod fourier;
pub mod geometry;
pub mod microlocal;
pub mod recon;
pub mod symtensor;
pub mod vecn;
pub mod xray;

pub use vecn::VecN;

/// Top-level error type aggregating the per-module errors.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Geometry(#[from] geometry::GeometryError),
    #[error(transparent)]
    Xray(#[from] xray::XrayError),
    #[error(transparent)]
    Microlocal(#[from] microlocal::MicrolocalError),
    #[error(transparent)]
    Recon(#[from] recon::ReconError),
    #[error(transparent)]
    Cli(#[from] cli::CliError),
}
