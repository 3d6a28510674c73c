//! Exact-diagonalization toolkit for a spin-1/2 superposition coupled to a
//! single thermal oscillator mode.
//!
//! The pipeline is:
//!
//! 1. [`model`] builds the truncated bare basis `|±, n⟩` and the real
//!    symmetric Hamiltonian matrix.
//! 2. [`spectral`] diagonalizes it and computes Boltzmann weights of the
//!    oscillator levels.
//! 3. [`dynamics`] turns the eigensystem into the thermal-averaged channel
//!    matrices `P, Q, R, T` and from those the reduced spin density matrix
//!    and its purity.
//! 4. [`resonance`] measures how strongly bare states share eigenstates.
//! 5. [`optimize`] finds the most decoherence-resistant initial superposition.
//! 6. [`harness`] drives parameter sweeps and writes CSV/JSON/SVG output.
//!
//! Frequencies are angular frequencies in rad/ns and times are in ns
//! throughout the library. GHz inputs are converted with [`units::ghz`].

pub mod dynamics;
pub mod error;
pub mod harness;
pub mod model;
pub mod optimize;
pub mod resonance;
pub mod spectral;
pub mod system;
pub mod units;

pub use dynamics::{
    channel_matrices, purity, purity_expanded, reduced_density, ChannelMatrices, ChannelPropagator,
    OverlapTable, SpinState,
};
pub use error::{Error, Result};
pub use model::{BareBasis, CpbParams, HamiltonianParams, InteractionMatrix, Spin};
pub use optimize::{
    bloch_channel, max_purity, max_purity_exact, purity_trajectory, s_diff, BlochChannel,
    PhaseScan, PurityReport,
};

pub use resonance::{overlap_metric, resonance_profile, OverlapMetric, ResonanceProfile};
pub use spectral::{eigh, thermal_weights, EigenSystem, Temperature, ThermalWeights};
pub use system::System;
