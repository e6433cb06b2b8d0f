//! Numerical phase-space quantum mechanics on discretized grids.
//!
//! The crate implements the Weyl correspondence between dense position
//! kernels and phase-space functions on uniform FFT lattices. Reduced
//! states are reachable along two fully independent routes, the
//! operator-level partial trace and the phase-space marginal over the
//! traced-out subsystem, and the two are cross-checked against each other
//! throughout.
//!
//! Modules:
//!
//! - [`grid`]: position/momentum lattices and bipartite partitions.
//! - [`hilbert`]: wavefunctions, density matrices, spectral decomposition,
//!   tensor products, and the operator-level partial trace (the oracle).
//! - [`wigner`]: Wigner and cross-Wigner transforms, Weyl symbols, trace
//!   and pairing formulas, and phase-space marginalization.
//! - [`gaussian`]: exact covariance-matrix calculus for centered Gaussian
//!   states, including symplectic spectra and lattice sampling.
//! - [`purify`]: Schmidt-form purification and its marginalization
//!   identity.
//! - [`states`]: seeded generators for the test-state family.
//! - [`io`]: state, Wigner and covariance file formats plus CSV export.

pub mod error;
mod fourier;
pub mod gaussian;
pub mod grid;
pub mod hilbert;
pub mod io;
pub mod purify;
pub mod states;
pub mod wigner;

pub use error::{Error, Result};
pub use gaussian::{CovarianceMatrix, PurityDiagnostics, SymplecticForm, ValidityReport};
pub use grid::{Partition, PhaseSpaceGrid};
pub use hilbert::{DensityMatrix, SpectralDecomposition, WaveFunction};
pub use purify::{Purification, WigsumReport};
pub use wigner::{CrossWignerGrid, SymbolGrid, TraceEstimate, WignerGrid};
