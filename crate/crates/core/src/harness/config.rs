use std::collections::BTreeSet;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::HamiltonianParams;
use crate::spectral::Temperature;

/// Hamiltonian parameters in user units (GHz, i.e. `ν = ω / 2π`).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BaseParams {
    pub omega_ghz: f64,
    pub omega0_ghz: f64,
    pub g_r_ghz: f64,
    pub g_nr_ghz: f64,
    pub g_ph_ghz: f64,
}

impl Default for BaseParams {
    fn default() -> Self {
        Self {
            omega_ghz: 1.0,
            omega0_ghz: 0.1,
            g_r_ghz: 0.4,
            g_nr_ghz: 1.0,
            g_ph_ghz: 0.5,
        }
    }
}

impl BaseParams {
    pub fn to_params(&self, n_bath: usize) -> Result<HamiltonianParams> {
        HamiltonianParams::from_ghz(
            self.omega_ghz,
            self.omega0_ghz,
            self.g_r_ghz,
            self.g_nr_ghz,
            self.g_ph_ghz,
            n_bath,
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepVariable {
    GR,
    GNr,
    GPh,
    /// `g_r = g_nr` moved together.
    GLocked,
}

impl SweepVariable {
    pub fn apply(self, base: &BaseParams, value_ghz: f64) -> BaseParams {
        let mut p = *base;
        match self {
            SweepVariable::GR => p.g_r_ghz = value_ghz,
            SweepVariable::GNr => p.g_nr_ghz = value_ghz,
            SweepVariable::GPh => p.g_ph_ghz = value_ghz,
            SweepVariable::GLocked => {
                p.g_r_ghz = value_ghz;
                p.g_nr_ghz = value_ghz;
            }
        }
        p
    }
}

impl std::str::FromStr for SweepVariable {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "g_r" | "g-r" => Ok(SweepVariable::GR),
            "g_nr" | "g-nr" => Ok(SweepVariable::GNr),
            "g_ph" | "g-ph" => Ok(SweepVariable::GPh),
            "g_locked" | "g-locked" => Ok(SweepVariable::GLocked),
            other => Err(Error::Config(format!("unknown sweep variable `{other}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputKind {
    SMax,
    APm,
    SDiff,
    ArgmaxState,
}

impl std::str::FromStr for OutputKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "s_max" => Ok(OutputKind::SMax),
            "a_pm" => Ok(OutputKind::APm),
            "s_diff" => Ok(OutputKind::SDiff),
            "argmax_state" => Ok(OutputKind::ArgmaxState),
            other => Err(Error::Config(format!("unknown output `{other}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub base: BaseParams,
    pub variable: SweepVariable,
    pub lo_ghz: f64,
    pub hi_ghz: f64,
    /// Number of grid points, endpoints included.
    pub steps: usize,
    pub temperature: Temperature,
    pub n_bath: usize,
    pub time_ns: f64,
    pub outputs: BTreeSet<OutputKind>,
    #[serde(default)]
    pub csv: Option<PathBuf>,
    #[serde(default)]
    pub json: Option<PathBuf>,
    #[serde(default)]
    pub svg: Option<PathBuf>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            base: BaseParams::default(),
            variable: SweepVariable::GR,
            lo_ghz: 0.1,
            hi_ghz: 2.0,
            steps: 101,
            temperature: Temperature::Kelvin(0.025),
            n_bath: 20,
            time_ns: 0.1,
            outputs: [
                OutputKind::SMax,
                OutputKind::APm,
                OutputKind::SDiff,
                OutputKind::ArgmaxState,
            ]
            .into_iter()
            .collect(),
            csv: None,
            json: None,
            svg: None,
        }
    }
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.lo_ghz.is_finite() && self.hi_ghz.is_finite()) {
            return Err(Error::Config("sweep range must be finite".into()));
        }
        if self.lo_ghz > self.hi_ghz {
            return Err(Error::Config(format!(
                "sweep range is reversed: lo = {} > hi = {}",
                self.lo_ghz, self.hi_ghz
            )));
        }
        if self.steps == 0 {
            return Err(Error::Config("steps must be at least 1".into()));
        }
        if self.outputs.is_empty() {
            return Err(Error::Config("no outputs requested".into()));
        }
        if !self.time_ns.is_finite() {
            return Err(Error::Config("evaluation time must be finite".into()));
        }
        if let Temperature::Kelvin(t) = self.temperature {
            if !(t.is_finite() && t > 0.0) {
                return Err(Error::Config(format!(
                    "temperature must be positive, got {t} K"
                )));
            }
        }
        // Catches bad fixed parameters up front.
        self.base.to_params(self.n_bath)?;
        Ok(())
    }

    /// Sweep values in GHz, evenly spaced with both endpoints.
    pub fn grid(&self) -> Vec<f64> {
        if self.steps == 1 {
            return vec![self.lo_ghz];
        }
        let span = self.hi_ghz - self.lo_ghz;
        let last = (self.steps - 1) as f64;
        (0..self.steps)
            .map(|i| self.lo_ghz + span * (i as f64 / last))
            .collect()
    }

    pub fn wants(&self, kind: OutputKind) -> bool {
        self.outputs.contains(&kind)
    }

    /// Applies the keys of a JSON object on top of this configuration.
    pub fn merged_with(&self, overrides: &serde_json::Value) -> Result<Self> {
        let mut value = serde_json::to_value(self)?;
        merge(&mut value, overrides);
        let merged: SweepConfig = serde_json::from_value(value)?;
        Ok(merged)
    }
}

fn merge(target: &mut serde_json::Value, overrides: &serde_json::Value) {
    match (target, overrides) {
        (serde_json::Value::Object(t), serde_json::Value::Object(o)) => {
            for (k, v) in o {
                match t.get_mut(k) {
                    Some(slot) if slot.is_object() && v.is_object() => merge(slot, v),
                    _ => {
                        t.insert(k.clone(), v.clone());
                    }
                }
            }
        }
        (t, o) => *t = o.clone(),
    }
}
