//! Charging statistics of qubit batteries powered by a single cavity mode.
//!
//! The crate is organised bottom-up:
//!
//! - [`fockspace`]: dense linear algebra on `qubits ⊗ cavity` spaces.
//! - [`states`]: initial cavity and qubit states, including noisy ones.
//! - [`dynamics`]: Hamiltonians, tilted propagation, analytic two-qubit blocks.
//! - [`fcs`]: generating functions, energy moments, SNR and fidelity.
//! - [`protocols`]: sequential and parallel charging with per-window optimisation.
//! - [`sweeps`]: advantage surfaces and Gaussian parameter search.
//! - [`tavis2`]: scalar closed forms for two qubits, used as a test oracle.
//! - [`io`]: configuration, scenario execution, tables and manifests.
//!
//! Units: `hbar = 1`, `omega_qub = 1`. Energies are in units of the qubit
//! quantum, times are reported as the dimensionless product `g * tau`.

pub mod dynamics;
pub mod error;
pub mod fcs;
pub mod fockspace;
pub mod io;
pub mod protocols;
pub mod states;
pub mod sweeps;
pub mod tavis2;

mod par;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
