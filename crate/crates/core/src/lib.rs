//! Entanglement-assisted phase estimation in noisy qubit channels.
//!
//! The crate models phase channels Λ_φ = E∘U_φ as Kraus families, computes their quantum
//! Fisher information in several independent ways, simulates process tomography and the
//! linear-optical networks that realize the channels, and runs Monte-Carlo phase
//! estimation experiments.

pub mod channels;
pub mod circuits;
pub mod error;
pub mod estimation;
pub mod exec;
pub mod format;
pub mod linalg;
pub mod optics;
pub mod qfi;
pub mod tomography;

pub use error::{Error, Result};
pub use exec::Executor;
pub use num_complex::Complex64;
