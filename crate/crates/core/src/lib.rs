//! Yang–Lee edge singularity of the non-Hermitian transverse-field Ising chain.
//!
//! Exact diagonalization and γ-scans ([`ed`]), nonunitary matrix-product-state
//! quenches ([`tmps`], [`quench`]), finite-size scaling ([`scaling`]) and a
//! dense emulator of the Rydberg Floquet protocol ([`floquet`]).

pub mod ed;
pub mod error;
pub mod floquet;
pub mod io;
pub mod linalg;
pub mod model;
pub mod numerics;
pub mod quench;
pub mod scaling;
pub mod tmps;

pub use error::{Error, Result};
pub use faer::{c64, Mat};
pub use model::{Axis, InitialState, ModelParams};
