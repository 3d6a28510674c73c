//! Thermal-averaged channel matrices, reduced spin density matrix and purity.
//!
//! Starting from `|ψ⟩⟨ψ| ⊗ ρ_B` with `ρ_B = Σ_n p_n |n⟩⟨n|`, the reduced spin
//! state after time `t` is linear in the four products of initial amplitudes:
//!
//! ```text
//! ρ_s(t) = |c₊|² Q(t) + |c₋|² R(t) + c₊c₋* P(t) + c₋c₊* T(t)
//! ```
//!
//! Each of `P, Q, R, T` is a sum over eigenstate pairs `(γ, γ′)` of
//! `e^{−i(E_γ − E_γ′)t} F^{kl}_{γγ′} G^{ab}_{γγ′}` where
//! `F^{kl}_{γγ′} = Σ_m ⟨k,m|γ⟩⟨γ′|l,m⟩` and
//! `G^{ab}_{γγ′} = Σ_n p_n ⟨γ|a,n⟩⟨b,n|γ′⟩`. The products `F ∘ G` do not
//! depend on time and are cached in [`ChannelPropagator`].

use nalgebra::{DMatrix, DVector, Matrix2};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::{BareBasis, Spin};
use crate::spectral::{EigenSystem, ThermalWeights};

/// Normalization tolerance for [`SpinState`].
pub const NORM_TOL: f64 = 1e-12;

/// Expansion coefficients `⟨s,m|γ⟩` of every eigenstate in the bare basis,
/// together with the energies and bath populations they are used with.
#[derive(Clone, Debug)]
pub struct OverlapTable {
    basis: BareBasis,
    coefficients: DMatrix<f64>,
    energies: DVector<f64>,
    weights: ThermalWeights,
}

pub fn overlap_table(
    eig: &EigenSystem,
    basis: BareBasis,
    weights: &ThermalWeights,
) -> Result<OverlapTable> {
    if eig.dim() != basis.dim() {
        return Err(Error::DimensionMismatch {
            expected: basis.dim(),
            found: eig.dim(),
        });
    }
    if weights.len() != basis.n_bath() {
        return Err(Error::DimensionMismatch {
            expected: basis.n_bath(),
            found: weights.len(),
        });
    }
    Ok(OverlapTable {
        basis,
        coefficients: eig.vectors().clone(),
        energies: eig.energies().clone(),
        weights: weights.clone(),
    })
}

impl OverlapTable {
    pub fn basis(&self) -> BareBasis {
        self.basis
    }

    pub fn n_bath(&self) -> usize {
        self.basis.n_bath()
    }

    /// Number of eigenstates.
    pub fn n_states(&self) -> usize {
        self.energies.len()
    }

    /// Rows indexed by bare state, columns by eigenstate.
    pub fn coefficients(&self) -> &DMatrix<f64> {
        &self.coefficients
    }

    pub fn energies(&self) -> &DVector<f64> {
        &self.energies
    }

    pub fn weights(&self) -> &ThermalWeights {
        &self.weights
    }

    /// `⟨s, m|γ⟩`. Panics on out-of-range indices.
    pub fn coefficient(&self, spin: Spin, level: usize, gamma: usize) -> f64 {
        self.coefficients[(2 * level + spin.index(), gamma)]
    }

    /// The `n_bath × N_γ` block of rows with spin `s`.
    fn spin_block(&self, spin: Spin) -> DMatrix<f64> {
        let n = self.n_bath();
        DMatrix::from_fn(n, self.n_states(), |m, g| self.coefficient(spin, m, g))
    }
}

/// The four 2×2 channel matrices at one time. Entries are indexed by
/// `(k, l)` with `+ → 0`, `− → 1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChannelMatrices {
    pub time: f64,
    /// Image of `|+⟩⟨−|`.
    pub p: Matrix2<Complex64>,
    /// Image of `|+⟩⟨+|`.
    pub q: Matrix2<Complex64>,
    /// Image of `|−⟩⟨−|`.
    pub r: Matrix2<Complex64>,
    /// Image of `|−⟩⟨+|`.
    pub t: Matrix2<Complex64>,
}

/// Time-independent kernels `F^{kl} ∘ G^{ab}` for fast evaluation of
/// [`ChannelMatrices`] at many times.
#[derive(Clone, Debug)]
pub struct ChannelPropagator {
    energies: DVector<f64>,
    // kernels[x][k][l], x over (P, Q, R, T)
    kernels: [[[DMatrix<f64>; 2]; 2]; 4],
}

const SOURCES: [(Spin, Spin); 4] = [
    (Spin::Plus, Spin::Minus),
    (Spin::Plus, Spin::Plus),
    (Spin::Minus, Spin::Minus),
    (Spin::Minus, Spin::Plus),
];

impl ChannelPropagator {
    pub fn new(table: &OverlapTable) -> Self {
        let blocks = [table.spin_block(Spin::Plus), table.spin_block(Spin::Minus)];
        let populations =
            DMatrix::from_diagonal(&DVector::from_column_slice(&table.weights().weights));
        let weighted = [&populations * &blocks[0], &populations * &blocks[1]];

        // F^{kl} = C_kᵀ C_l, G^{ab} = C_aᵀ diag(p) C_b
        let f = |k: usize, l: usize| blocks[k].transpose() * &blocks[l];
        let g = |a: usize, b: usize| blocks[a].transpose() * &weighted[b];
        let fs = [[f(0, 0), f(0, 1)], [f(1, 0), f(1, 1)]];

        let kernels = SOURCES.map(|(a, b)| {
            let gab = g(a.index(), b.index());
            [
                [fs[0][0].component_mul(&gab), fs[0][1].component_mul(&gab)],
                [fs[1][0].component_mul(&gab), fs[1][1].component_mul(&gab)],
            ]
        });
        Self {
            energies: table.energies().clone(),
            kernels,
        }
    }

    pub fn at(&self, time: f64) -> ChannelMatrices {
        // Σ_{γγ′} e^{−iE_γ t} K_{γγ′} e^{+iE_γ′ t} with u = cos − i sin
        let cos = self.energies.map(|e| (e * time).cos());
        let sin = self.energies.map(|e| (e * time).sin());
        let contract = |k: &DMatrix<f64>| {
            let kc = k * &cos;
            let ks = k * &sin;
            Complex64::new(cos.dot(&kc) + sin.dot(&ks), cos.dot(&ks) - sin.dot(&kc))
        };
        let matrices = self.kernels.each_ref().map(|x| {
            Matrix2::new(
                contract(&x[0][0]),
                contract(&x[0][1]),
                contract(&x[1][0]),
                contract(&x[1][1]),
            )
        });
        let [p, q, r, t] = matrices;
        ChannelMatrices { time, p, q, r, t }
    }
}

pub fn channel_matrices(table: &OverlapTable, time: f64) -> Result<ChannelMatrices> {
    if !time.is_finite() {
        return Err(Error::invalid("t", "time must be finite"));
    }
    Ok(ChannelPropagator::new(table).at(time))
}

/// Initial spin superposition `c₊|+⟩ + c₋|−⟩`, stored with the global phase
/// fixed so that `c₋` is real and non-negative (or `c₊` when `c₋ = 0`).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpinState {
    c_plus: Complex64,
    c_minus: Complex64,
}

impl SpinState {
    pub fn new(c_plus: Complex64, c_minus: Complex64) -> Result<Self> {
        let norm = c_plus.norm_sqr() + c_minus.norm_sqr();
        if !norm.is_finite() || (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized { norm });
        }
        let anchor = if c_minus != Complex64::new(0.0, 0.0) {
            c_minus
        } else {
            c_plus
        };
        let gauge = anchor.conj() / anchor.norm();
        let mut state = Self {
            c_plus: c_plus * gauge,
            c_minus: c_minus * gauge,
        };
        // Remove the rounding residue left in the anchor's imaginary part.
        if c_minus != Complex64::new(0.0, 0.0) {
            state.c_minus = Complex64::new(state.c_minus.norm(), 0.0);
        } else {
            state.c_plus = Complex64::new(state.c_plus.norm(), 0.0);
        }
        Ok(state)
    }

    /// Real amplitudes, as the paper-style signed coefficients.
    pub fn real(c_plus: f64, c_minus: f64) -> Result<Self> {
        Self::new(Complex64::new(c_plus, 0.0), Complex64::new(c_minus, 0.0))
    }

    /// `|c₊| e^{iθ} |+⟩ + √(1 − |c₊|²) |−⟩`.
    pub fn from_polar(c_plus_abs: f64, theta: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&c_plus_abs) {
            return Err(Error::invalid(
                "c_plus_abs",
                format!("must lie in [0, 1], got {c_plus_abs}"),
            ));
        }
        let c_minus = (1.0 - c_plus_abs * c_plus_abs).sqrt();
        Self::new(
            Complex64::from_polar(c_plus_abs, theta),
            Complex64::new(c_minus, 0.0),
        )
    }

    /// Pure state with Bloch polar angle `polar` (from `|+⟩`) and relative phase `theta`.
    pub fn from_angles(polar: f64, theta: f64) -> Self {
        let (s, c) = (0.5 * polar).sin_cos();
        Self::new(
            Complex64::from_polar(c.abs(), theta),
            Complex64::new(s.abs(), 0.0),
        )
        .expect("angles always give a normalized state")
    }

    pub fn plus() -> Self {
        Self {
            c_plus: Complex64::new(1.0, 0.0),
            c_minus: Complex64::new(0.0, 0.0),
        }
    }

    pub fn minus() -> Self {
        Self {
            c_plus: Complex64::new(0.0, 0.0),
            c_minus: Complex64::new(1.0, 0.0),
        }
    }

    pub fn c_plus(&self) -> Complex64 {
        self.c_plus
    }

    pub fn c_minus(&self) -> Complex64 {
        self.c_minus
    }

    /// Relative phase `θ = arg c₊` in the canonical gauge, in `[0, 2π)`.
    pub fn relative_phase(&self) -> f64 {
        if self.c_plus.norm() == 0.0 {
            return 0.0;
        }
        self.c_plus.arg().rem_euclid(std::f64::consts::TAU)
    }

    /// `r` with `|ψ⟩⟨ψ| = (I + r·σ)/2` in the `(|+⟩, |−⟩)` basis.
    pub fn bloch_vector(&self) -> [f64; 3] {
        let coherence = self.c_plus * self.c_minus.conj();
        [
            2.0 * coherence.re,
            -2.0 * coherence.im,
            self.c_plus.norm_sqr() - self.c_minus.norm_sqr(),
        ]
    }

    pub fn density(&self) -> Matrix2<Complex64> {
        let v = nalgebra::Vector2::new(self.c_plus, self.c_minus);
        v * v.adjoint()
    }
}

/// Reduced spin density matrix at the channel's time.
pub fn reduced_density(ch: &ChannelMatrices, psi: &SpinState) -> Matrix2<Complex64> {
    let (cp, cm) = (psi.c_plus, psi.c_minus);
    ch.q * Complex64::from(cp.norm_sqr())
        + ch.r * Complex64::from(cm.norm_sqr())
        + ch.p * (cp * cm.conj())
        + ch.t * (cm * cp.conj())
}

/// `S = Σ_{kl} |ρ_kl|² = Tr ρ²` for Hermitian `ρ`.
pub fn purity(rho: &Matrix2<Complex64>) -> f64 {
    rho.iter().map(|z| z.norm_sqr()).sum()
}

/// Purity written out term by term: three magnitude-only terms and the
/// phase-dependent interference terms.
pub fn purity_expanded(ch: &ChannelMatrices, psi: &SpinState) -> f64 {
    let (cp, cm) = (psi.c_plus, psi.c_minus);
    let (a, b) = (cp.norm_sqr(), cm.norm_sqr());
    let (p, q, r, t) = (&ch.p, &ch.q, &ch.r, &ch.t);

    let mut q_term = 0.0;
    let mut r_term = 0.0;
    let mut mixed = 0.0;
    let mut interference = Complex64::new(0.0, 0.0);
    for k in 0..2 {
        for l in 0..2 {
            q_term += q[(k, l)].norm_sqr();
            r_term += r[(k, l)].norm_sqr();
            mixed += p[(k, l)].norm_sqr()
                + t[(k, l)].norm_sqr()
                + (q[(k, l)] * r[(k, l)].conj() + q[(k, l)].conj() * r[(k, l)]).re;
            interference += cp * cp * cm.conj() * cm.conj() * p[(k, l)] * p[(l, k)]
                + a * cp.conj()
                    * cm
                    * (q[(k, l)] * p[(k, l)].conj() + p[(l, k)].conj() * q[(k, l)].conj())
                + b * cp.conj()
                    * cm
                    * (r[(k, l)] * p[(k, l)].conj() + p[(l, k)].conj() * r[(k, l)].conj());
        }
    }
    a * a * q_term + b * b * r_term + a * b * mixed + 2.0 * interference.re
}
