//! Exact ground states of the spin-1 XXZ chain with on-site anisotropy,
//! generalized `(N, 3)` Bell correlations in Fourier measurement bases,
//! their local-realistic bounds, and phase-plane diagnostics.

pub mod error;
pub mod hilbert;
pub mod state;
pub mod hamiltonian;
pub mod eigensolver;
pub mod bell;
pub mod lrbound;
pub mod diagnostics;
pub mod sweep;

pub use error::{Error, Result};
