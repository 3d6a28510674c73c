//! One fully prepared parameter point: Hamiltonian, eigensystem, bath
//! weights and cached channel kernels.

use nalgebra::DMatrix;

use crate::dynamics::{overlap_table, ChannelMatrices, ChannelPropagator, OverlapTable};
use crate::error::Result;
use crate::model::{build_hamiltonian, HamiltonianParams};
use crate::resonance::{overlap_metric, OverlapMetric};
use crate::spectral::{eigh, thermal_weights, EigenSystem, Temperature};

#[derive(Clone, Debug)]
pub struct System {
    pub params: HamiltonianParams,
    pub hamiltonian: DMatrix<f64>,
    pub eigen: EigenSystem,
    pub table: OverlapTable,
    pub propagator: ChannelPropagator,
}

impl System {
    pub fn new(params: HamiltonianParams, temperature: Temperature) -> Result<Self> {
        let hamiltonian = build_hamiltonian(&params)?;
        let eigen = eigh(&hamiltonian)?;
        Self::from_eigen(params, hamiltonian, eigen, temperature)
    }

    /// Builds on an existing decomposition, e.g. one with flipped eigenvector signs.
    pub fn from_eigen(
        params: HamiltonianParams,
        hamiltonian: DMatrix<f64>,
        eigen: EigenSystem,
        temperature: Temperature,
    ) -> Result<Self> {
        let weights = thermal_weights(params.omega, temperature, params.n_bath)?;
        let table = overlap_table(&eigen, params.basis()?, &weights)?;
        let propagator = ChannelPropagator::new(&table);
        Ok(Self {
            params,
            hamiltonian,
            eigen,
            table,
            propagator,
        })
    }

    pub fn channel(&self, time: f64) -> ChannelMatrices {
        self.propagator.at(time)
    }

    pub fn overlap_metric(&self) -> OverlapMetric {
        overlap_metric(&self.table)
    }
}
