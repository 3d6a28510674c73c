//! Truncated bare basis, Hamiltonian assembly and the Cooper-pair-box mapping.
//!
//! The Hamiltonian (in units of ħ) is
//!
//! ```text
//! H = ω a†a + (ω₀/2) S_z + g_r (S₊ a + S₋ a†) + g_nr (S₊ a† + S₋ a) + g_ph S_z (a + a†)
//! ```
//!
//! with `S₊ = |+⟩⟨−|`, `S₋ = |−⟩⟨+|`, `S_z = |+⟩⟨+| − |−⟩⟨−|`. The oscillator
//! is truncated to its lowest `n_bath` Fock levels.

use nalgebra::{DMatrix, Matrix2, Vector2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::units::ghz;

/// Spin label of a bare state.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Spin {
    Plus,
    Minus,
}

impl Spin {
    pub const BOTH: [Spin; 2] = [Spin::Plus, Spin::Minus];

    /// Position within a 2-vector or 2×2 matrix: 0 for `|+⟩`, 1 for `|−⟩`.
    pub fn index(self) -> usize {
        match self {
            Spin::Plus => 0,
            Spin::Minus => 1,
        }
    }

    /// Eigenvalue of `S_z`.
    pub fn sign(self) -> f64 {
        match self {
            Spin::Plus => 1.0,
            Spin::Minus => -1.0,
        }
    }
}

impl std::fmt::Display for Spin {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Spin::Plus => "+",
            Spin::Minus => "-",
        })
    }
}

impl std::str::FromStr for Spin {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "+" | "plus" | "up" => Ok(Spin::Plus),
            "-" | "minus" | "down" => Ok(Spin::Minus),
            other => Err(Error::invalid(
                "spin",
                format!("expected + or -, got `{other}`"),
            )),
        }
    }
}

/// Product basis `|s, n⟩`, ordered oscillator-major: `row = 2n + s`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BareBasis {
    n_bath: usize,
}

impl BareBasis {
    pub fn new(n_bath: usize) -> Result<Self> {
        if n_bath == 0 {
            return Err(Error::invalid(
                "n_bath",
                "at least one oscillator level is required",
            ));
        }
        Ok(Self { n_bath })
    }

    pub fn n_bath(&self) -> usize {
        self.n_bath
    }

    pub fn dim(&self) -> usize {
        2 * self.n_bath
    }

    /// Row of `|spin, level⟩`.
    pub fn index(&self, spin: Spin, level: usize) -> Result<usize> {
        if level >= self.n_bath {
            return Err(Error::OutOfRange(format!(
                "oscillator level {level} outside truncation of {} levels",
                self.n_bath
            )));
        }
        Ok(2 * level + spin.index())
    }

    /// Inverse of [`BareBasis::index`].
    pub fn label(&self, row: usize) -> Result<(Spin, usize)> {
        if row >= self.dim() {
            return Err(Error::OutOfRange(format!(
                "row {row} outside basis of dimension {}",
                self.dim()
            )));
        }
        let spin = if row.is_multiple_of(2) {
            Spin::Plus
        } else {
            Spin::Minus
        };
        Ok((spin, row / 2))
    }

    pub fn labels(&self) -> impl Iterator<Item = (Spin, usize)> + '_ {
        (0..self.n_bath).flat_map(|n| Spin::BOTH.into_iter().map(move |s| (s, n)))
    }
}

pub fn build_basis(n_bath: usize) -> Result<BareBasis> {
    BareBasis::new(n_bath)
}

/// One point of the spin–oscillator parameter space. Frequencies in rad/ns.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HamiltonianParams {
    pub omega: f64,
    pub omega0: f64,
    pub g_r: f64,
    pub g_nr: f64,
    pub g_ph: f64,
    pub n_bath: usize,
}

impl HamiltonianParams {
    pub fn new(
        omega: f64,
        omega0: f64,
        g_r: f64,
        g_nr: f64,
        g_ph: f64,
        n_bath: usize,
    ) -> Result<Self> {
        let params = Self {
            omega,
            omega0,
            g_r,
            g_nr,
            g_ph,
            n_bath,
        };
        params.validate()?;
        Ok(params)
    }

    /// Same as [`HamiltonianParams::new`] with every frequency given in GHz.
    pub fn from_ghz(
        omega: f64,
        omega0: f64,
        g_r: f64,
        g_nr: f64,
        g_ph: f64,
        n_bath: usize,
    ) -> Result<Self> {
        Self::new(
            ghz(omega),
            ghz(omega0),
            ghz(g_r),
            ghz(g_nr),
            ghz(g_ph),
            n_bath,
        )
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("omega", self.omega),
            ("omega0", self.omega0),
            ("g_r", self.g_r),
            ("g_nr", self.g_nr),
            ("g_ph", self.g_ph),
        ];
        for (name, value) in fields {
            if !value.is_finite() {
                return Err(Error::invalid(name, format!("must be finite, got {value}")));
            }
        }
        if self.omega <= 0.0 {
            return Err(Error::invalid(
                "omega",
                "oscillator frequency must be positive",
            ));
        }
        if self.n_bath == 0 {
            return Err(Error::invalid(
                "n_bath",
                "at least one oscillator level is required",
            ));
        }
        Ok(())
    }

    pub fn basis(&self) -> Result<BareBasis> {
        BareBasis::new(self.n_bath)
    }

    /// Copy with all three couplings set to zero.
    pub fn uncoupled(&self) -> Self {
        Self {
            g_r: 0.0,
            g_nr: 0.0,
            g_ph: 0.0,
            ..*self
        }
    }
}

/// Dense Hamiltonian matrix in the bare basis, rad/ns.
pub fn build_hamiltonian(params: &HamiltonianParams) -> Result<DMatrix<f64>> {
    params.validate()?;
    let basis = params.basis()?;
    let n_bath = params.n_bath;
    let mut h = DMatrix::zeros(basis.dim(), basis.dim());
    let mut set = |r: usize, c: usize, v: f64| {
        h[(r, c)] = v;
        h[(c, r)] = v;
    };

    for n in 0..n_bath {
        let plus = 2 * n;
        let minus = 2 * n + 1;
        let level = n as f64;
        set(plus, plus, level * params.omega + 0.5 * params.omega0);
        set(minus, minus, level * params.omega - 0.5 * params.omega0);

        // ⟨+, n−1| S₊ a |−, n⟩ = √n
        if n >= 1 {
            set(2 * (n - 1), minus, params.g_r * level.sqrt());
        }
        if n + 1 < n_bath {
            let up = (level + 1.0).sqrt();
            // ⟨+, n+1| S₊ a† |−, n⟩ = √(n+1)
            set(2 * (n + 1), minus, params.g_nr * up);
            // ⟨±, n+1| S_z a† |±, n⟩ = ±√(n+1)
            set(2 * (n + 1), plus, params.g_ph * up);
            set(2 * (n + 1) + 1, minus, -params.g_ph * up);
        }
    }
    Ok(h)
}

/// Spin part `E_I` of the interaction `E_I ⊗ (a + a†)` on the `g_r = g_nr`
/// plane, with its eigen-decomposition. The eigenvectors span the
/// decoherence-free candidates.
#[derive(Clone, Debug, PartialEq)]
pub struct InteractionMatrix {
    pub matrix: Matrix2<f64>,
    /// Ascending.
    pub eigenvalues: [f64; 2],
    /// Normalized eigenvectors in `(|+⟩, |−⟩)` components, matching `eigenvalues`.
    pub eigenvectors: [Vector2<f64>; 2],
}

/// Relative tolerance of the `g_r = g_nr` check.
pub const DFS_PLANE_TOL: f64 = 1e-12;

pub fn interaction_matrix(params: &HamiltonianParams) -> Result<InteractionMatrix> {
    params.validate()?;
    let scale = params.g_r.abs().max(params.g_nr.abs());
    if (params.g_r - params.g_nr).abs() > DFS_PLANE_TOL * scale {
        return Err(Error::OffDfsPlane {
            g_r: params.g_r,
            g_nr: params.g_nr,
        });
    }
    let g = 0.5 * (params.g_r + params.g_nr);
    let g_ph = params.g_ph;
    let matrix = Matrix2::new(g_ph, g, g, -g_ph);

    // [[g_ph, g], [g, -g_ph]] = r [[cos φ, sin φ], [sin φ, -cos φ]]
    let r = g_ph.hypot(g);
    let half = 0.5 * g.atan2(g_ph);
    let (s, c) = half.sin_cos();
    Ok(InteractionMatrix {
        matrix,
        eigenvalues: [-r, r],
        eigenvectors: [Vector2::new(-s, c), Vector2::new(c, s)],
    })
}

/// Cooper pair box coupled to a resonator. All energies as angular
/// frequencies in rad/ns; `delta_n` is the dimensionless gate offset.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CpbParams {
    pub e_c: f64,
    pub e_j: f64,
    pub omega: f64,
    pub g: f64,
    pub delta_n: f64,
}

/// Rewrites the Cooper-pair-box Hamiltonian at the charge degeneracy point
/// in the generic form: `ω₀ = E_J`, `g_r = g_nr = g`, `g_ph = 0`.
///
/// `E_C` drops out at `δn = 0`; other gate offsets are rejected.
pub fn map_cpb(cpb: &CpbParams, n_bath: usize) -> Result<HamiltonianParams> {
    if !(-0.5..=0.5).contains(&cpb.delta_n) {
        return Err(Error::invalid(
            "delta_n",
            "gate offset must lie in [-1/2, 1/2]",
        ));
    }
    if cpb.delta_n != 0.0 {
        return Err(Error::invalid(
            "delta_n",
            format!(
                "mapping only holds at the degeneracy point delta_n = 0, got {}",
                cpb.delta_n
            ),
        ));
    }
    if !cpb.e_c.is_finite() {
        return Err(Error::invalid("e_c", "must be finite"));
    }
    HamiltonianParams::new(cpb.omega, cpb.e_j, cpb.g, cpb.g, 0.0, n_bath)
}
